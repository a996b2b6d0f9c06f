#pragma once

#include "evaluator.hpp"
#include "run_types.hpp"

namespace graminfer {

struct RunReport {
  std::vector<RecordOutcome> outcomes;
  std::vector<std::string> aborted;
  Metrics metrics;
  nlohmann::ordered_json document;
};

// Outcome of one record, or the transport error that aborted it. Engine
// errors never abort a record - they are the feedback data.
struct InferResult {
  std::optional<RecordOutcome> outcome;
  std::optional<std::string> abort_error;
};

// The feedback-driven loop for a single record: retrieve exemplars (when
// few-shot is on), prompt, extract, compile, parse; on failure append the
// assistant response plus a feedback message to the growing history and try
// again, up to cfg.max_iterations. Stops at the first successful parse.
InferResult infer_record(const SnippetRecord& record, const std::vector<FslRecord>& fsl,
                         const PromptTemplates& templates, ChatClient& client,
                         const RunConfig& cfg);

// Full run over the evaluation dataset, in file order; writes the report to
// cfg.out_path and returns it.
Result<RunReport, RunError> run(const RunConfig& cfg);

}  // namespace graminfer
