// graminfer command line: run the inference pipeline, check a grammar against
// an input, or re-verify the metrics block of a results file. Talks to the
// core exclusively through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "graminfer/graminfer.h"

namespace {

// Owns a string returned by the library.
struct CStr {
  char* p = nullptr;
  ~CStr() { gi_free(p); }
  std::string str() const { return p ? p : ""; }
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct RunOptions {
  std::string eval, fsl, out;
  std::string few_shot = "on";
  int max_iterations = 10;
  int top_k = 3;
  double similarity_threshold = 0.5;
  std::string mode = "live";
  std::string transcript;
  std::string model;
  std::string api_base;
  std::string api_key_env;
  std::string templates;
  bool deterministic = false;
};

int cmd_run(const RunOptions& opt) {
  if ((opt.mode == "replay" || opt.mode == "record") && opt.transcript.empty()) {
    std::cerr << "error: --mode " << opt.mode << " requires --transcript\n";
    return 1;
  }
  nlohmann::json config;
  config["eval"] = opt.eval;
  config["fsl"] = opt.fsl;
  config["out"] = opt.out;
  config["few_shot"] = opt.few_shot == "on";
  config["max_iterations"] = opt.max_iterations;
  config["top_k"] = opt.top_k;
  config["similarity_threshold"] = opt.similarity_threshold;
  config["mode"] = opt.mode;
  if (!opt.transcript.empty()) config["transcript"] = opt.transcript;
  if (!opt.model.empty()) config["model"] = opt.model;
  if (!opt.api_base.empty()) config["base_url"] = opt.api_base;
  if (!opt.api_key_env.empty()) config["api_key_env"] = opt.api_key_env;
  if (!opt.templates.empty()) config["templates"] = opt.templates;
  config["deterministic"] = opt.deterministic;

  CStr metrics, error;
  gi_status st = gi_run(config.dump().c_str(), &metrics.p, &error.p);
  if (st != GI_OK) {
    std::cerr << "error: " << error.str() << "\n";
    return static_cast<int>(st);
  }
  std::cout << metrics.str() << "\n";
  return 0;
}

int cmd_check(const std::string& grammar_path, const std::string& input_path) {
  auto grammar = read_file(grammar_path);
  if (!grammar) {
    std::cerr << "error: cannot read grammar file: " << grammar_path << "\n";
    return 2;
  }
  auto input = read_file(input_path);
  if (!input) {
    std::cerr << "error: cannot read input file: " << input_path << "\n";
    return 2;
  }
  gi_grammar* g = nullptr;
  CStr error;
  gi_status st = gi_grammar_compile(grammar->c_str(), &g, &error.p);
  if (st == GI_GRAMMAR_INVALID) {
    std::cout << "INVALID: " << error.str() << "\n";
    return 0;  // diagnostics are the product, not a failure
  }
  if (st != GI_OK) {
    std::cerr << "error: " << error.str() << "\n";
    return static_cast<int>(st);
  }
  for (size_t i = 0; i < gi_grammar_warning_count(g); ++i) {
    CStr warning;
    if (gi_grammar_warning(g, i, &warning.p) == GI_OK)
      std::cerr << "warning: " << warning.str() << "\n";
  }
  CStr tree, parse_error;
  st = gi_grammar_parse(g, input->c_str(), &tree.p, &parse_error.p);
  gi_grammar_destroy(g);
  if (st == GI_PARSE_FAILED) {
    std::cout << "PARSE_ERROR: " << parse_error.str() << "\n";
    return 0;
  }
  if (st != GI_OK) {
    std::cerr << "error: " << parse_error.str() << "\n";
    return static_cast<int>(st);
  }
  std::cout << "VALID\n" << tree.str();
  return 0;
}

int cmd_metrics(const std::string& report_path) {
  auto report = read_file(report_path);
  if (!report) {
    std::cerr << "error: cannot read report file: " << report_path << "\n";
    return 2;
  }
  CStr diff, error;
  gi_status st = gi_metrics_verify(report->c_str(), &diff.p, &error.p);
  if (st == GI_OK) {
    std::cout << "OK\n";
    return 0;
  }
  if (st == GI_DATA_ERROR) {
    std::cerr << "error: " << error.str() << "\n";
    return 2;
  }
  std::cout << diff.str();
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grammar inference for DSL snippets with LALR(1) validation"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run the inference pipeline over a dataset");
  run->add_option("--eval", run_opt.eval, "Evaluation dataset (JSON)")->required();
  run->add_option("--fsl", run_opt.fsl, "Few-shot dataset (JSON)")->required();
  run->add_option("--out", run_opt.out, "Results file to write")->required();
  run->add_option("--few-shot", run_opt.few_shot, "Few-shot retrieval: on|off")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  run->add_option("--max-iterations", run_opt.max_iterations, "Feedback loop cap")
      ->capture_default_str();
  run->add_option("--top-k", run_opt.top_k, "Exemplars per prompt")->capture_default_str();
  run->add_option("--similarity-threshold", run_opt.similarity_threshold,
                  "Minimum cosine similarity")
      ->capture_default_str();
  run->add_option("--mode", run_opt.mode, "live|record|replay")
      ->check(CLI::IsMember({"live", "record", "replay"}))
      ->capture_default_str();
  run->add_option("--transcript", run_opt.transcript,
                  "Transcript file (replay source / record sink)");
  run->add_option("--model", run_opt.model, "Model name (default gpt-3.5-turbo)");
  run->add_option("--api-base", run_opt.api_base, "Chat completion API base URL");
  run->add_option("--api-key-env", run_opt.api_key_env,
                  "Environment variable holding the API key (default LLM_API_KEY)");
  run->add_option("--templates", run_opt.templates, "Directory with prompt template files");
  run->add_flag("--deterministic", run_opt.deterministic,
                "Suppress timestamps for reproducible output");

  std::string grammar_path, input_path;
  CLI::App* check = app.add_subcommand("check", "Compile a grammar and parse an input file");
  check->add_option("--grammar", grammar_path, "Grammar notation file")->required();
  check->add_option("--input", input_path, "Input snippet file")->required();

  std::string report_path;
  CLI::App* metrics =
      app.add_subcommand("metrics", "Recompute and verify the metrics of a results file");
  metrics->add_option("--report", report_path, "Results file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (run->parsed()) return cmd_run(run_opt);
  if (check->parsed()) return cmd_check(grammar_path, input_path);
  if (metrics->parsed()) return cmd_metrics(report_path);
  return 1;
}
