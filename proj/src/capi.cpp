#include "graminfer/graminfer.h"

#include <cstring>
#include <new>

#include <json.hpp>

#include "engine/compile.hpp"
#include "pipeline.hpp"

using graminfer::engine::CompiledGrammar;

struct gi_grammar {
  CompiledGrammar compiled;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(::operator new(s.size() + 1, std::nothrow));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_out(char** slot, const std::string& value) {
  if (slot) *slot = dup_string(value);
}

gi_status run_config_from_json(const nlohmann::json& j, graminfer::RunConfig& cfg,
                               std::string& error) {
  auto str = [&](const char* key, std::string& into, bool required) -> bool {
    if (!j.contains(key)) {
      if (required) error = std::string("config is missing '") + key + "'";
      return !required;
    }
    if (!j[key].is_string()) {
      error = std::string("config field '") + key + "' must be a string";
      return false;
    }
    into = j[key].get<std::string>();
    return true;
  };
  if (!str("eval", cfg.eval_path, true)) return GI_USAGE_ERROR;
  if (!str("fsl", cfg.fsl_path, true)) return GI_USAGE_ERROR;
  if (!str("out", cfg.out_path, true)) return GI_USAGE_ERROR;
  if (j.contains("few_shot")) cfg.few_shot = j["few_shot"].get<bool>();
  if (j.contains("max_iterations")) cfg.max_iterations = j["max_iterations"].get<int>();
  if (j.contains("top_k")) cfg.top_k = j["top_k"].get<size_t>();
  if (j.contains("similarity_threshold"))
    cfg.similarity_threshold = j["similarity_threshold"].get<double>();
  if (j.contains("mode")) {
    auto mode = graminfer::parse_run_mode(j["mode"].get<std::string>());
    if (!mode) {
      error = "mode must be one of live, record, replay";
      return GI_USAGE_ERROR;
    }
    cfg.mode = *mode;
  }
  std::string s;
  if (j.contains("transcript")) {
    if (!str("transcript", s, true)) return GI_USAGE_ERROR;
    cfg.transcript_path = s;
  }
  if (j.contains("templates")) {
    if (!str("templates", s, true)) return GI_USAGE_ERROR;
    cfg.templates_dir = s;
  }
  if (j.contains("model")) cfg.model.model = j["model"].get<std::string>();
  if (j.contains("base_url")) cfg.model.base_url = j["base_url"].get<std::string>();
  if (j.contains("api_key_env")) cfg.model.api_key_env = j["api_key_env"].get<std::string>();
  if (j.contains("temperature")) cfg.model.temperature = j["temperature"].get<double>();
  if (j.contains("max_tokens")) cfg.model.max_tokens = j["max_tokens"].get<int>();
  if (j.contains("timeout_seconds")) cfg.model.timeout_seconds = j["timeout_seconds"].get<int>();
  if (j.contains("max_retries")) cfg.model.max_retries = j["max_retries"].get<int>();
  if (j.contains("deterministic")) cfg.deterministic = j["deterministic"].get<bool>();
  return GI_OK;
}

}  // namespace

extern "C" {

void gi_free(char* s) { ::operator delete(s); }

const char* gi_version(void) { return "0.1.0"; }

gi_status gi_grammar_compile(const char* source_utf8, gi_grammar** out, char** out_error) {
  if (!source_utf8 || !out) {
    set_out(out_error, "source and out handle must not be NULL");
    return GI_USAGE_ERROR;
  }
  *out = nullptr;
  try {
    auto compiled = graminfer::engine::compile(source_utf8);
    if (!compiled.ok()) {
      set_out(out_error, graminfer::engine::format_error(compiled.error()));
      return GI_GRAMMAR_INVALID;
    }
    *out = new gi_grammar{std::move(compiled).take()};
    return GI_OK;
  } catch (const std::exception& e) {
    set_out(out_error, e.what());
    return GI_INTERNAL_ERROR;
  }
}

void gi_grammar_destroy(gi_grammar* g) { delete g; }

size_t gi_grammar_warning_count(const gi_grammar* g) {
  return g ? g->compiled.warnings().size() : 0;
}

gi_status gi_grammar_warning(const gi_grammar* g, size_t index, char** out_warning) {
  if (!g || index >= g->compiled.warnings().size()) return GI_USAGE_ERROR;
  set_out(out_warning, g->compiled.warnings()[index]);
  return GI_OK;
}

gi_status gi_grammar_parse(const gi_grammar* g, const char* input_utf8, char** out_tree,
                           char** out_error) {
  if (!g || !input_utf8) {
    set_out(out_error, "grammar and input must not be NULL");
    return GI_USAGE_ERROR;
  }
  try {
    auto tree = g->compiled.parse(input_utf8);
    if (!tree.ok()) {
      set_out(out_error, graminfer::engine::format_error(tree.error()));
      return GI_PARSE_FAILED;
    }
    set_out(out_tree, graminfer::engine::format_tree(tree.value()));
    return GI_OK;
  } catch (const std::exception& e) {
    set_out(out_error, e.what());
    return GI_INTERNAL_ERROR;
  }
}

gi_status gi_run(const char* config_json, char** out_metrics_json, char** out_error) {
  if (!config_json) {
    set_out(out_error, "config must not be NULL");
    return GI_USAGE_ERROR;
  }
  try {
    nlohmann::json j = nlohmann::json::parse(config_json, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      set_out(out_error, "config must be a JSON object");
      return GI_USAGE_ERROR;
    }
    graminfer::RunConfig cfg;
    std::string cfg_error;
    gi_status st = run_config_from_json(j, cfg, cfg_error);
    if (st != GI_OK) {
      set_out(out_error, cfg_error);
      return st;
    }
    auto report = graminfer::run(cfg);
    if (!report.ok()) {
      set_out(out_error, report.error().message);
      return static_cast<gi_status>(report.error().exit_kind);
    }
    set_out(out_metrics_json, graminfer::metrics_to_json(report.value().metrics).dump(2));
    return GI_OK;
  } catch (const std::exception& e) {
    set_out(out_error, e.what());
    return GI_INTERNAL_ERROR;
  }
}

gi_status gi_metrics_verify(const char* report_json, char** out_diff, char** out_error) {
  if (!report_json) {
    set_out(out_error, "report must not be NULL");
    return GI_USAGE_ERROR;
  }
  try {
    auto verified = graminfer::verify_report(report_json);
    if (!verified.ok()) {
      set_out(out_error, verified.error());
      return GI_DATA_ERROR;
    }
    if (verified.value().empty()) {
      set_out(out_diff, "OK");
      return GI_OK;
    }
    set_out(out_diff, verified.value());
    return GI_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    set_out(out_error, e.what());
    return GI_INTERNAL_ERROR;
  }
}

}  // extern "C"
