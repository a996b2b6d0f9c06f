#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "dataset.hpp"
#include "test_support.hpp"

using namespace graminfer;

namespace {

std::string write_temp(const char* name, const std::string& body) {
  std::string path = testsup::temp_file(name);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("bundled evaluation dataset loads with 20 records in file order") {
  auto records = load_eval(testsup::fixture_path("eval.json"));
  REQUIRE(records.ok());
  CHECK(records.value().size() == 20);
  CHECK(records.value().front().id == "r01");
  CHECK(records.value().back().id == "r20");
  CHECK_FALSE(records.value().front().code.empty());
}

TEST_CASE("empty evaluation array loads as an empty list") {
  std::string path = write_temp("gi_eval_empty.json", "[]");
  auto records = load_eval(path);
  REQUIRE(records.ok());
  CHECK(records.value().empty());
}

TEST_CASE("duplicate evaluation id is reported with the id") {
  std::string path = write_temp("gi_eval_dup.json",
                                R"([{"id":"a","name":"x","code":"1"},
                                    {"id":"a","name":"y","code":"2"}])");
  auto records = load_eval(path);
  REQUIRE_FALSE(records.ok());
  CHECK(records.error().message.find("'a'") != std::string::npos);
  CHECK(records.error().message.find("1") != std::string::npos);  // record index
}

TEST_CASE("schema violations name the record index") {
  auto missing = load_eval(write_temp("gi_eval_missing.json", R"([{"id":"a","name":"x"}])"));
  REQUIRE_FALSE(missing.ok());
  CHECK(missing.error().message.find("record 0") != std::string::npos);
  CHECK(missing.error().message.find("code") != std::string::npos);

  auto empty_code =
      load_eval(write_temp("gi_eval_ec.json", R"([{"id":"a","name":"x","code":""}])"));
  REQUIRE_FALSE(empty_code.ok());

  auto not_object = load_eval(write_temp("gi_eval_no.json", R"(["zap"])"));
  REQUIRE_FALSE(not_object.ok());

  auto bad_json = load_eval(write_temp("gi_eval_bad.json", "{nope"));
  REQUIRE_FALSE(bad_json.ok());
  CHECK(bad_json.error().message.find("JSON") != std::string::npos);
}

TEST_CASE("missing file is a dataset error") {
  auto records = load_eval(testsup::temp_file("gi_no_such_file.json"));
  REQUIRE_FALSE(records.ok());
  CHECK(records.error().message.find("not readable") != std::string::npos);
}

TEST_CASE("bundled few-shot dataset loads and self-validates") {
  auto records = load_fsl(testsup::fixture_path("fsl.json"));
  REQUIRE(records.ok());
  CHECK(records.value().size() == 3);
  CHECK(records.value()[0].id == "fsl-001");
}

TEST_CASE("few-shot exemplar without a start rule fails fast") {
  std::string path = write_temp(
      "gi_fsl_nostart.json",
      R"([{"id":"f1","code":"a","grammar":"foo: \"a\""}])");
  auto records = load_fsl(path);
  REQUIRE_FALSE(records.ok());
  CHECK(records.error().message.find("f1") != std::string::npos);
  CHECK(records.error().message.find("start") != std::string::npos);
}

TEST_CASE("few-shot exemplar whose grammar rejects its own code fails fast") {
  std::string path = write_temp(
      "gi_fsl_badparse.json",
      R"([{"id":"f2","code":"b","grammar":"start: \"a\""}])");
  auto records = load_fsl(path);
  REQUIRE_FALSE(records.ok());
  CHECK(records.error().message.find("f2") != std::string::npos);
  CHECK(records.error().message.find("does not parse") != std::string::npos);
  CHECK(records.error().message.find("No terminal matches") != std::string::npos);
}

TEST_CASE("loaded records round-trip field for field") {
  auto records = load_eval(testsup::fixture_path("eval.json"));
  REQUIRE(records.ok());
  // Serialize what we loaded and load it again.
  std::string path = testsup::temp_file("gi_eval_roundtrip.json");
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "[";
    bool first = true;
    for (const SnippetRecord& r : records.value()) {
      nlohmann::json j{{"id", r.id}, {"name", r.name}, {"code", r.code}};
      out << (first ? "" : ",") << j.dump();
      first = false;
    }
    out << "]";
  }
  auto again = load_eval(path);
  REQUIRE(again.ok());
  REQUIRE(again.value().size() == records.value().size());
  for (size_t i = 0; i < again.value().size(); ++i) {
    CHECK(again.value()[i].id == records.value()[i].id);
    CHECK(again.value()[i].name == records.value()[i].name);
    CHECK(again.value()[i].code == records.value()[i].code);
  }
}
