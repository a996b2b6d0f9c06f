#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <thread>

#ifdef GRAMINFER_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "pipeline.hpp"
#include "test_support.hpp"

using namespace graminfer;

namespace {

std::string wrap(const std::string& grammar) {
  return "<GRAMMAR>\n" + grammar + "\n</GRAMMAR>";
}

SnippetRecord snippet_record() {
  return {"walkthrough-01", "k-dsl",
          testsup::read_file(testsup::fixture_path("listings/snippet3.txt"))};
}

std::vector<FslRecord> bundled_fsl() {
  auto fsl = load_fsl(testsup::fixture_path("fsl.json"));
  REQUIRE(fsl.ok());
  return std::move(fsl).take();
}

RunConfig replay_config() {
  RunConfig cfg;
  cfg.max_iterations = 10;
  cfg.top_k = 3;
  cfg.similarity_threshold = 0.5;
  cfg.mode = RunMode::Replay;
  cfg.deterministic = true;
  return cfg;
}

// Scripted client that also records the message-list length of every call.
class ScriptedClient : public ChatClient {
 public:
  explicit ScriptedClient(std::vector<std::string> responses)
      : responses_(std::move(responses)) {}

  Result<std::string, ClientError> chat(const std::string&,
                                        const std::vector<ChatMessage>& messages) override {
    observed_lengths.push_back(messages.size());
    last_messages = messages;
    if (cursor_ >= responses_.size())
      return ClientError{ClientError::Kind::TranscriptExhausted, "script exhausted"};
    return responses_[cursor_++];
  }

  std::vector<size_t> observed_lengths;
  std::vector<ChatMessage> last_messages;

 private:
  std::vector<std::string> responses_;
  size_t cursor_ = 0;
};

}  // namespace

TEST_CASE("worked example: invalid first iteration, correct second") {
  std::string g3 = testsup::read_file(testsup::fixture_path("listings/grammar3.txt"));
  std::string g4 = testsup::read_file(testsup::fixture_path("listings/grammar4.txt"));
  ScriptedClient client({wrap(g3), wrap(g4)});
  auto fsl = bundled_fsl();
  RunConfig cfg = replay_config();

  InferResult r = infer_record(snippet_record(), fsl, PromptTemplates::defaults(), client, cfg);
  REQUIRE(r.outcome.has_value());
  const RecordOutcome& out = *r.outcome;
  CHECK(out.correct);
  CHECK(out.success_iteration == 2);
  CHECK(out.ever_valid);
  REQUIRE(out.iterations.size() == 2);
  CHECK_FALSE(out.iterations[0].valid);
  CHECK(out.iterations[0].parse == IterationTrace::ParseStatus::NotAttempted);
  CHECK(out.iterations[0].error_message == "Rule 'NAME' used but not defined");
  CHECK(out.iterations[1].valid);
  CHECK(out.iterations[1].parse == IterationTrace::ParseStatus::Ok);
  CHECK_FALSE(out.iterations[1].error_message.has_value());
  REQUIRE(out.final_grammar.has_value());
  CHECK(out.final_grammar->find("NAME: /") != std::string::npos);
  CHECK(out.fewshot.size() == 3);
}

TEST_CASE("single usable response succeeds at iteration 1 with no extra calls") {
  ScriptedClient client({wrap("start: \"a\"")});
  auto fsl = bundled_fsl();
  RunConfig cfg = replay_config();
  SnippetRecord rec{"r", "tiny", "a"};
  InferResult r = infer_record(rec, fsl, PromptTemplates::defaults(), client, cfg);
  REQUIRE(r.outcome.has_value());
  CHECK(r.outcome->correct);
  CHECK(r.outcome->success_iteration == 1);
  CHECK(client.observed_lengths.size() == 1);
}

TEST_CASE("ten unusable responses exhaust the loop cap") {
  std::vector<std::string> responses(10, "no tags in this reply at all");
  ScriptedClient client(responses);
  auto fsl = bundled_fsl();
  RunConfig cfg = replay_config();
  SnippetRecord rec{"r", "tiny", "a"};
  InferResult r = infer_record(rec, fsl, PromptTemplates::defaults(), client, cfg);
  REQUIRE(r.outcome.has_value());
  CHECK_FALSE(r.outcome->correct);
  CHECK_FALSE(r.outcome->success_iteration.has_value());
  CHECK_FALSE(r.outcome->ever_valid);
  CHECK(r.outcome->iterations.size() == 10);
  CHECK(client.observed_lengths.size() == 10);
  for (const IterationTrace& t : r.outcome->iterations) {
    CHECK_FALSE(t.extracted_grammar.has_value());
    CHECK(t.parse == IterationTrace::ParseStatus::NotAttempted);
    CHECK(t.error_message == std::string(kMissingGrammarTags));
  }
}

TEST_CASE("message history grows by an assistant/user pair per failed iteration") {
  std::vector<std::string> responses(4, wrap("start: nope"));
  responses.push_back(wrap("start: \"a\""));
  ScriptedClient client(responses);
  auto fsl = bundled_fsl();
  RunConfig cfg = replay_config();
  cfg.similarity_threshold = 0.0;  // retrieve all three exemplars for "a"
  SnippetRecord rec{"r", "tiny", "a"};
  InferResult r = infer_record(rec, fsl, PromptTemplates::defaults(), client, cfg);
  REQUIRE(r.outcome.has_value());
  CHECK(r.outcome->success_iteration == 5);
  REQUIRE(client.observed_lengths.size() == 5);
  size_t initial = client.observed_lengths[0];
  CHECK(initial == 8);  // system + 3 exemplar pairs + snippet
  for (size_t i = 0; i < client.observed_lengths.size(); ++i)
    CHECK(client.observed_lengths[i] == initial + 2 * i);
  // Appended tail alternates assistant/user, and earlier few-shot pairs stay.
  const auto& msgs = client.last_messages;
  CHECK(msgs[initial - 1].content.find("a") != std::string::npos);
  for (size_t i = initial; i < msgs.size(); i += 2) {
    CHECK(msgs[i].role == Role::Assistant);
    CHECK(msgs[i + 1].role == Role::User);
  }
  // Feedback carries the previous grammar and the engine error.
  CHECK(msgs.back().content.find("start: nope") != std::string::npos);
  CHECK(msgs.back().content.find("Rule 'nope' used but not defined") != std::string::npos);
}

TEST_CASE("compile errors and parse errors trace differently") {
  ScriptedClient client({wrap("start: broken_ref"), wrap("start: \"a\" \"b\""),
                         wrap("start: \"a\"")});
  auto fsl = bundled_fsl();
  RunConfig cfg = replay_config();
  SnippetRecord rec{"r", "tiny", "a"};
  InferResult r = infer_record(rec, fsl, PromptTemplates::defaults(), client, cfg);
  REQUIRE(r.outcome.has_value());
  const auto& its = r.outcome->iterations;
  REQUIRE(its.size() == 3);
  CHECK_FALSE(its[0].valid);
  CHECK(its[0].parse == IterationTrace::ParseStatus::NotAttempted);
  CHECK(its[1].valid);  // compiles but cannot parse "a"
  CHECK(its[1].parse == IterationTrace::ParseStatus::Error);
  CHECK(its[1].error_message->find("Unexpected token") != std::string::npos);
  CHECK(its[2].parse == IterationTrace::ParseStatus::Ok);
  CHECK(r.outcome->ever_valid);
}

TEST_CASE("transport failure aborts the record") {
  ScriptedClient client({});
  auto fsl = bundled_fsl();
  RunConfig cfg = replay_config();
  SnippetRecord rec{"r", "tiny", "a"};
  InferResult r = infer_record(rec, fsl, PromptTemplates::defaults(), client, cfg);
  CHECK_FALSE(r.outcome.has_value());
  REQUIRE(r.abort_error.has_value());
  CHECK(r.abort_error->find("exhausted") != std::string::npos);
}

TEST_CASE("full bundled replay reproduces the table counters") {
  RunConfig cfg = replay_config();
  cfg.eval_path = testsup::fixture_path("eval.json");
  cfg.fsl_path = testsup::fixture_path("fsl.json");
  cfg.transcript_path = testsup::fixture_path("transcripts/fewshot.json");
  cfg.out_path = testsup::temp_file("gi_pipeline_fewshot.json");
  auto report = run(cfg);
  REQUIRE(report.ok());
  const Metrics& m = report.value().metrics;
  CHECK(m.total == 20);
  CHECK(m.valid == 12);
  CHECK(m.correct == 12);
  CHECK(m.invalid == 8);
  CHECK(m.incorrect == 8);
  CHECK(m.gvi == 60.0);
  CHECK(m.pap == 60.0);
  CHECK(report.value().aborted.empty());
  // correct implies ever_valid on every outcome.
  for (const RecordOutcome& o : report.value().outcomes) {
    if (o.correct) CHECK(o.ever_valid);
    CHECK(o.iterations.size() <= 10);
  }
}

TEST_CASE("deterministic replay runs are byte-identical") {
  RunConfig cfg = replay_config();
  cfg.eval_path = testsup::fixture_path("eval.json");
  cfg.fsl_path = testsup::fixture_path("fsl.json");
  cfg.transcript_path = testsup::fixture_path("transcripts/fewshot.json");
  cfg.out_path = testsup::temp_file("gi_det_a.json");
  auto first = run(cfg);
  REQUIRE(first.ok());
  cfg.out_path = testsup::temp_file("gi_det_b.json");
  auto second = run(cfg);
  REQUIRE(second.ok());
  CHECK(testsup::read_file(testsup::temp_file("gi_det_a.json")) ==
        testsup::read_file(testsup::temp_file("gi_det_b.json")));
}

TEST_CASE("permuting evaluation records permutes outcomes identically") {
  auto eval = load_eval(testsup::fixture_path("eval.json"));
  REQUIRE(eval.ok());
  std::vector<SnippetRecord> reversed(eval.value().rbegin(), eval.value().rend());
  std::string reversed_path = testsup::temp_file("gi_eval_reversed.json");
  {
    nlohmann::json arr = nlohmann::json::array();
    for (const SnippetRecord& r : reversed)
      arr.push_back({{"id", r.id}, {"name", r.name}, {"code", r.code}});
    std::ofstream(reversed_path) << arr.dump();
  }

  RunConfig cfg = replay_config();
  cfg.eval_path = testsup::fixture_path("eval.json");
  cfg.fsl_path = testsup::fixture_path("fsl.json");
  cfg.transcript_path = testsup::fixture_path("transcripts/fewshot.json");
  cfg.out_path = testsup::temp_file("gi_perm_a.json");
  auto forward = run(cfg);
  REQUIRE(forward.ok());

  cfg.eval_path = reversed_path;
  cfg.out_path = testsup::temp_file("gi_perm_b.json");
  auto backward = run(cfg);
  REQUIRE(backward.ok());

  REQUIRE(forward.value().outcomes.size() == backward.value().outcomes.size());
  for (const RecordOutcome& fo : forward.value().outcomes) {
    auto it = std::find_if(backward.value().outcomes.begin(), backward.value().outcomes.end(),
                           [&](const RecordOutcome& bo) { return bo.id == fo.id; });
    REQUIRE(it != backward.value().outcomes.end());
    CHECK(it->correct == fo.correct);
    CHECK(it->success_iteration == fo.success_iteration);
    CHECK(it->ever_valid == fo.ever_valid);
    CHECK(it->iterations.size() == fo.iterations.size());
  }
}

TEST_CASE("missing transcript entries quarantine records as aborted") {
  std::string transcript = testsup::temp_file("gi_partial_transcript.json");
  std::ofstream(transcript) << R"({"walkthrough-01": []})";
  std::string eval = testsup::temp_file("gi_two_records.json");
  std::ofstream(eval) << R"([{"id":"walkthrough-01","name":"a","code":"a"},
                             {"id":"other","name":"b","code":"a"}])";

  RunConfig cfg = replay_config();
  cfg.eval_path = eval;
  cfg.fsl_path = testsup::fixture_path("fsl.json");
  cfg.transcript_path = transcript;
  cfg.out_path = testsup::temp_file("gi_aborted_report.json");
  auto report = run(cfg);
  REQUIRE(report.ok());
  CHECK(report.value().outcomes.empty());
  CHECK(report.value().aborted == std::vector<std::string>{"walkthrough-01", "other"});
  CHECK(report.value().metrics.total == 0);
  CHECK(report.value().metrics.pap == 0.0);
}

TEST_CASE("empty evaluation dataset reports zero totals") {
  std::string eval = testsup::temp_file("gi_empty_eval.json");
  std::ofstream(eval) << "[]";
  std::string transcript = testsup::temp_file("gi_empty_transcript.json");
  std::ofstream(transcript) << "{}";

  RunConfig cfg = replay_config();
  cfg.eval_path = eval;
  cfg.fsl_path = testsup::fixture_path("fsl.json");
  cfg.transcript_path = transcript;
  cfg.out_path = testsup::temp_file("gi_empty_report.json");
  auto report = run(cfg);
  REQUIRE(report.ok());
  CHECK(report.value().metrics.total == 0);
  CHECK(report.value().metrics.pap == 0.0);
  CHECK(report.value().metrics.gvi == 0.0);
}

TEST_CASE("run validates config and maps startup failures to error kinds") {
  RunConfig cfg = replay_config();
  cfg.eval_path = testsup::fixture_path("eval.json");
  cfg.fsl_path = testsup::fixture_path("fsl.json");
  cfg.out_path = testsup::temp_file("gi_unused.json");

  SUBCASE("replay without transcript is a usage error") {
    cfg.transcript_path.reset();
    auto report = run(cfg);
    REQUIRE_FALSE(report.ok());
    CHECK(report.error().exit_kind == 1);
  }
  SUBCASE("unreadable transcript is a transport error") {
    cfg.transcript_path = testsup::temp_file("gi_missing_transcript.json");
    auto report = run(cfg);
    REQUIRE_FALSE(report.ok());
    CHECK(report.error().exit_kind == 3);
  }
  SUBCASE("missing dataset is a dataset error") {
    cfg.eval_path = testsup::temp_file("gi_missing_eval.json");
    cfg.transcript_path = testsup::fixture_path("transcripts/fewshot.json");
    auto report = run(cfg);
    REQUIRE_FALSE(report.ok());
    CHECK(report.error().exit_kind == 2);
  }
  SUBCASE("max_iterations below one is a usage error") {
    cfg.transcript_path = testsup::fixture_path("transcripts/fewshot.json");
    cfg.max_iterations = 0;
    auto report = run(cfg);
    REQUIRE_FALSE(report.ok());
    CHECK(report.error().exit_kind == 1);
  }
}

TEST_CASE("record-mode run then replay of its transcript yields identical outcomes") {
  // Stub endpoint: always answers with the same tagged grammar.
  httplib::Server server;
  server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    nlohmann::json j;
    j["choices"] = {{{"message", {{"role", "assistant"},
                                  {"content", "<GRAMMAR>\nstart: \"a\"\n</GRAMMAR>"}}}}};
    res.set_content(j.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::string eval = testsup::temp_file("gi_record_eval.json");
  std::ofstream(eval) << R"([{"id":"rt1","name":"hit","code":"a"},
                             {"id":"rt2","name":"miss","code":"b"}])";
  std::string sink = testsup::temp_file("gi_record_transcript.json");

  RunConfig cfg = replay_config();
  cfg.mode = RunMode::Record;
  cfg.eval_path = eval;
  cfg.fsl_path = testsup::fixture_path("fsl.json");
  cfg.transcript_path = sink;
  cfg.out_path = testsup::temp_file("gi_record_report.json");
  cfg.max_iterations = 2;
  cfg.model.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.model.max_retries = 0;
  auto recorded = run(cfg);
  server.stop();
  listener.join();
  REQUIRE(recorded.ok());

  cfg.mode = RunMode::Replay;
  cfg.out_path = testsup::temp_file("gi_replay_report.json");
  auto replayed = run(cfg);
  REQUIRE(replayed.ok());

  // Identical outcome lists and metrics; only the config echo differs.
  CHECK(recorded.value().document["records"] == replayed.value().document["records"]);
  CHECK(recorded.value().document["metrics"] == replayed.value().document["metrics"]);
  CHECK(recorded.value().metrics.correct == 1);
  CHECK(recorded.value().metrics.total == 2);
}

TEST_CASE("failed report finalization keeps the partial file") {
  std::string out_dir = testsup::temp_file("gi_out_dir");
  std::filesystem::create_directories(out_dir);  // rename onto a directory fails

  RunConfig cfg = replay_config();
  cfg.eval_path = testsup::fixture_path("walkthrough/eval.json");
  cfg.fsl_path = testsup::fixture_path("fsl.json");
  cfg.transcript_path = testsup::fixture_path("walkthrough/transcript.json");
  cfg.out_path = out_dir;
  auto report = run(cfg);
  REQUIRE_FALSE(report.ok());
  CHECK(report.error().exit_kind == 4);
  CHECK(std::filesystem::exists(out_dir + ".partial"));
  std::filesystem::remove(out_dir + ".partial");
  std::filesystem::remove_all(out_dir);
}
