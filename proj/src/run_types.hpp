#pragma once

#include <optional>
#include <string>
#include <vector>

#include "llm_client.hpp"

namespace graminfer {

enum class RunMode { Live, Record, Replay };

std::string_view run_mode_name(RunMode m);
std::optional<RunMode> parse_run_mode(std::string_view name);

struct RunConfig {
  std::string eval_path;
  std::string fsl_path;
  std::string out_path;
  bool few_shot = true;
  int max_iterations = 10;
  size_t top_k = 3;
  double similarity_threshold = 0.5;
  RunMode mode = RunMode::Live;
  ModelConfig model;
  std::optional<std::string> transcript_path;
  std::optional<std::string> templates_dir;
  bool deterministic = false;  // suppresses the report timestamp
};

struct IterationTrace {
  enum class ParseStatus { Ok, Error, NotAttempted };

  int index = 1;  // 1-based
  std::string response;
  std::optional<std::string> extracted_grammar;
  bool valid = false;
  ParseStatus parse = ParseStatus::NotAttempted;
  std::optional<std::string> error_message;
  std::string prompt_hash;
};

struct FewshotRef {
  std::string id;
  double score;
};

struct RecordOutcome {
  std::string id;
  bool correct = false;
  std::optional<int> success_iteration;
  bool ever_valid = false;
  std::vector<IterationTrace> iterations;
  std::optional<std::string> final_grammar;  // most recent extracted grammar
  std::vector<FewshotRef> fewshot;
};

// Exit-code oriented error: 1 usage/config, 2 dataset, 3 transport, 4 internal.
struct RunError {
  int exit_kind;
  std::string message;
};

}  // namespace graminfer
