#pragma once

#include <span>

#include <json.hpp>

#include "run_types.hpp"

namespace graminfer {

// Table-style counters plus the per-iteration success histogram.
// isrgc[n-1] counts records whose first success happened at iteration n.
struct Metrics {
  int total = 0;
  int valid = 0;
  int correct = 0;
  int invalid = 0;
  int incorrect = 0;
  double gvi = 0.0;  // rounded to one decimal
  double pap = 0.0;  // rounded to one decimal
  std::vector<int> isrgc;
};

// correct/total x 100 (raw double); total == 0 yields 0.0.
// Throws ContractViolation when correct > total or a count is negative.
double compute_pap(int correct, int total);
double compute_gvi(int valid, int total);

std::vector<int> compute_isrgc(std::span<const RecordOutcome> outcomes, int max_iterations);

Metrics compute_metrics(std::span<const RecordOutcome> outcomes, int max_iterations);

nlohmann::ordered_json metrics_to_json(const Metrics& m);

// The comprehensive results document: config echo (secrets and output path
// excluded), per-record outcomes, aborted ids, metrics, and - unless the run
// is deterministic - an RFC3339 timestamp.
nlohmann::ordered_json report_to_json(const RunConfig& cfg,
                                      std::span<const RecordOutcome> outcomes,
                                      std::span<const std::string> aborted, const Metrics& m,
                                      const std::optional<std::string>& timestamp);

// Writes via `<path>.partial` + rename, so a failed write leaves the partial
// file behind. Returns a diagnostic on failure.
std::optional<std::string> write_report(const std::string& path,
                                        const nlohmann::ordered_json& doc);

// Recomputes metrics from a report's records array and diffs them against the
// embedded metrics block. Returns the diff text ("" when consistent), or an
// error string when the document is malformed.
Result<std::string, std::string> verify_report(const std::string& report_json);

}  // namespace graminfer
