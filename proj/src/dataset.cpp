#include "dataset.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "engine/compile.hpp"

namespace graminfer {

namespace {

Result<nlohmann::json, DatasetError> load_json_array(const std::string& path,
                                                     const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return DatasetError{std::string(what) + " file not readable: " + path};
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded())
    return DatasetError{std::string(what) + " file is not valid JSON: " + path};
  if (!doc.is_array())
    return DatasetError{std::string(what) + " file must be a JSON array: " + path};
  return doc;
}

// Fetches a required non-empty (unless allow_empty) string field.
Result<std::string, DatasetError> get_field(const nlohmann::json& rec, size_t index,
                                            const char* field, bool allow_empty) {
  auto it = rec.find(field);
  if (it == rec.end() || !it->is_string())
    return DatasetError{"record " + std::to_string(index) + ": missing string field '" +
                        field + "'"};
  std::string v = it->get<std::string>();
  if (!allow_empty && v.empty())
    return DatasetError{"record " + std::to_string(index) + ": field '" + field +
                        "' is empty"};
  return v;
}

}  // namespace

Result<std::vector<SnippetRecord>, DatasetError> load_eval(const std::string& path) {
  auto doc = load_json_array(path, "evaluation");
  if (!doc.ok()) return doc.error();
  std::vector<SnippetRecord> out;
  std::set<std::string> ids;
  size_t index = 0;
  for (const auto& rec : doc.value()) {
    if (!rec.is_object())
      return DatasetError{"record " + std::to_string(index) + ": not a JSON object"};
    auto id = get_field(rec, index, "id", false);
    if (!id.ok()) return id.error();
    auto name = get_field(rec, index, "name", true);
    if (!name.ok()) return name.error();
    auto code = get_field(rec, index, "code", false);
    if (!code.ok()) return code.error();
    if (!ids.insert(id.value()).second)
      return DatasetError{"record " + std::to_string(index) + ": duplicate id '" +
                          id.value() + "'"};
    out.push_back({std::move(id).take(), std::move(name).take(), std::move(code).take()});
    ++index;
  }
  return out;
}

Result<std::vector<FslRecord>, DatasetError> load_fsl(const std::string& path) {
  auto doc = load_json_array(path, "few-shot");
  if (!doc.ok()) return doc.error();
  std::vector<FslRecord> out;
  std::set<std::string> ids;
  size_t index = 0;
  for (const auto& rec : doc.value()) {
    if (!rec.is_object())
      return DatasetError{"record " + std::to_string(index) + ": not a JSON object"};
    auto id = get_field(rec, index, "id", false);
    if (!id.ok()) return id.error();
    auto code = get_field(rec, index, "code", false);
    if (!code.ok()) return code.error();
    auto grammar = get_field(rec, index, "grammar", false);
    if (!grammar.ok()) return grammar.error();
    if (!ids.insert(id.value()).second)
      return DatasetError{"record " + std::to_string(index) + ": duplicate id '" +
                          id.value() + "'"};

    auto compiled = engine::compile(grammar.value());
    if (!compiled.ok())
      return DatasetError{"few-shot record '" + id.value() + "': grammar is invalid: " +
                          engine::format_error(compiled.error())};
    auto parsed = compiled.value().parse(code.value());
    if (!parsed.ok())
      return DatasetError{"few-shot record '" + id.value() +
                          "': grammar does not parse its own code: " +
                          engine::format_error(parsed.error())};

    out.push_back({std::move(id).take(), std::move(code).take(), std::move(grammar).take()});
    ++index;
  }
  return out;
}

}  // namespace graminfer
