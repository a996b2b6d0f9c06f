#include "evaluator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace graminfer {

namespace {

double round1(double x) { return std::round(x * 10.0) / 10.0; }

double percent(int part, int total, const char* what) {
  if (part < 0 || total < 0 || part > total)
    throw ContractViolation(std::string(what) + " count out of range: " +
                            std::to_string(part) + "/" + std::to_string(total));
  if (total == 0) return 0.0;
  return static_cast<double>(part) / static_cast<double>(total) * 100.0;
}

std::string_view parse_status_name(IterationTrace::ParseStatus s) {
  switch (s) {
    case IterationTrace::ParseStatus::Ok: return "ok";
    case IterationTrace::ParseStatus::Error: return "error";
    case IterationTrace::ParseStatus::NotAttempted: return "not-attempted";
  }
  return "not-attempted";
}

}  // namespace

std::string_view run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::Live: return "live";
    case RunMode::Record: return "record";
    case RunMode::Replay: return "replay";
  }
  return "live";
}

std::optional<RunMode> parse_run_mode(std::string_view name) {
  if (name == "live") return RunMode::Live;
  if (name == "record") return RunMode::Record;
  if (name == "replay") return RunMode::Replay;
  return std::nullopt;
}

double compute_pap(int correct, int total) { return percent(correct, total, "correct"); }
double compute_gvi(int valid, int total) { return percent(valid, total, "valid"); }

std::vector<int> compute_isrgc(std::span<const RecordOutcome> outcomes, int max_iterations) {
  std::vector<int> hist(static_cast<size_t>(std::max(max_iterations, 0)), 0);
  for (const RecordOutcome& o : outcomes) {
    if (!o.success_iteration) continue;
    int n = *o.success_iteration;
    if (n < 1 || n > max_iterations)
      throw ContractViolation("success_iteration " + std::to_string(n) +
                              " outside [1, " + std::to_string(max_iterations) + "]");
    ++hist[static_cast<size_t>(n - 1)];
  }
  return hist;
}

Metrics compute_metrics(std::span<const RecordOutcome> outcomes, int max_iterations) {
  Metrics m;
  m.total = static_cast<int>(outcomes.size());
  for (const RecordOutcome& o : outcomes) {
    if (o.ever_valid) ++m.valid;
    if (o.correct) ++m.correct;
  }
  m.invalid = m.total - m.valid;
  m.incorrect = m.total - m.correct;
  m.gvi = round1(compute_gvi(m.valid, m.total));
  m.pap = round1(compute_pap(m.correct, m.total));
  m.isrgc = compute_isrgc(outcomes, max_iterations);
  return m;
}

nlohmann::ordered_json metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["total"] = m.total;
  j["valid"] = m.valid;
  j["correct"] = m.correct;
  j["invalid"] = m.invalid;
  j["incorrect"] = m.incorrect;
  j["gvi"] = m.gvi;
  j["pap"] = m.pap;
  j["isrgc"] = m.isrgc;
  return j;
}

nlohmann::ordered_json report_to_json(const RunConfig& cfg,
                                      std::span<const RecordOutcome> outcomes,
                                      std::span<const std::string> aborted, const Metrics& m,
                                      const std::optional<std::string>& timestamp) {
  nlohmann::ordered_json doc;
  auto& c = doc["config"] = nlohmann::ordered_json::object();
  c["eval"] = cfg.eval_path;
  c["fsl"] = cfg.fsl_path;
  c["few_shot"] = cfg.few_shot;
  c["max_iterations"] = cfg.max_iterations;
  c["top_k"] = cfg.top_k;
  c["similarity_threshold"] = cfg.similarity_threshold;
  c["mode"] = std::string(run_mode_name(cfg.mode));
  c["transcript"] = cfg.transcript_path ? nlohmann::ordered_json(*cfg.transcript_path)
                                        : nlohmann::ordered_json(nullptr);
  c["model"] = cfg.model.model;
  c["base_url"] = cfg.model.base_url;
  c["api_key_env"] = cfg.model.api_key_env;
  c["templates"] = cfg.templates_dir ? nlohmann::ordered_json(*cfg.templates_dir)
                                     : nlohmann::ordered_json(nullptr);
  c["deterministic"] = cfg.deterministic;

  auto& records = doc["records"] = nlohmann::ordered_json::array();
  for (const RecordOutcome& o : outcomes) {
    nlohmann::ordered_json r;
    r["id"] = o.id;
    r["status"] = o.correct ? "correct" : "incorrect";
    r["success_iteration"] = o.success_iteration
                                 ? nlohmann::ordered_json(*o.success_iteration)
                                 : nlohmann::ordered_json(nullptr);
    r["ever_valid"] = o.ever_valid;
    auto& fs = r["fewshot"] = nlohmann::ordered_json::array();
    for (const FewshotRef& f : o.fewshot) fs.push_back({{"id", f.id}, {"score", f.score}});
    r["final_grammar"] = o.final_grammar ? nlohmann::ordered_json(*o.final_grammar)
                                         : nlohmann::ordered_json(nullptr);
    auto& its = r["iterations"] = nlohmann::ordered_json::array();
    for (const IterationTrace& t : o.iterations) {
      nlohmann::ordered_json it;
      it["index"] = t.index;
      it["validity"] = t.valid ? "valid" : "invalid";
      it["parse"] = std::string(parse_status_name(t.parse));
      it["error_message"] = t.error_message ? nlohmann::ordered_json(*t.error_message)
                                            : nlohmann::ordered_json(nullptr);
      it["extracted_grammar"] = t.extracted_grammar
                                    ? nlohmann::ordered_json(*t.extracted_grammar)
                                    : nlohmann::ordered_json(nullptr);
      it["response"] = t.response;
      it["prompt_hash"] = t.prompt_hash;
      its.push_back(std::move(it));
    }
    records.push_back(std::move(r));
  }

  doc["aborted"] = aborted.empty() ? nlohmann::ordered_json::array()
                                   : nlohmann::ordered_json(aborted);
  doc["metrics"] = metrics_to_json(m);
  if (timestamp) doc["timestamp"] = *timestamp;
  return doc;
}

std::optional<std::string> write_report(const std::string& path,
                                        const nlohmann::ordered_json& doc) {
  std::string partial = path + ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) return "cannot write " + partial;
    out << doc.dump(2) << "\n";
    if (!out.good()) return "short write to " + partial;
  }
  std::error_code ec;
  std::filesystem::rename(partial, path, ec);
  if (ec)
    return "cannot finalize " + path + ": " + ec.message() + " (partial results kept in " +
           partial + ")";
  return std::nullopt;
}

Result<std::string, std::string> verify_report(const std::string& report_json) {
  using R = Result<std::string, std::string>;
  nlohmann::json doc = nlohmann::json::parse(report_json, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return R::err("report is not a JSON object");
  if (!doc.contains("records") || !doc["records"].is_array())
    return R::err("report has no records array");
  if (!doc.contains("metrics") || !doc["metrics"].is_object())
    return R::err("report has no metrics block");

  const auto& metrics = doc["metrics"];
  int max_iterations = 0;
  if (doc.contains("config") && doc["config"].contains("max_iterations") &&
      doc["config"]["max_iterations"].is_number_integer())
    max_iterations = doc["config"]["max_iterations"].get<int>();
  else if (metrics.contains("isrgc") && metrics["isrgc"].is_array())
    max_iterations = static_cast<int>(metrics["isrgc"].size());

  std::vector<RecordOutcome> outcomes;
  for (const auto& r : doc["records"]) {
    if (!r.is_object() || !r.contains("status") || !r.contains("ever_valid"))
      return R::err("malformed record entry");
    RecordOutcome o;
    o.correct = r["status"] == "correct";
    o.ever_valid = r["ever_valid"].is_boolean() && r["ever_valid"].get<bool>();
    if (r.contains("success_iteration") && r["success_iteration"].is_number_integer())
      o.success_iteration = r["success_iteration"].get<int>();
    outcomes.push_back(std::move(o));
  }

  Metrics recomputed;
  try {
    recomputed = compute_metrics(outcomes, max_iterations);
  } catch (const ContractViolation& e) {
    return R::err(std::string("report violates metric contracts: ") + e.what());
  }

  std::ostringstream diff;
  auto check_int = [&](const char* key, int want) {
    if (!metrics.contains(key) || !metrics[key].is_number_integer() ||
        metrics[key].get<int>() != want)
      diff << key << ": report has " << (metrics.contains(key) ? metrics[key].dump() : "nothing")
           << ", recomputed " << want << "\n";
  };
  auto check_pct = [&](const char* key, double want) {
    if (!metrics.contains(key) || !metrics[key].is_number() ||
        metrics[key].get<double>() != want)
      diff << key << ": report has " << (metrics.contains(key) ? metrics[key].dump() : "nothing")
           << ", recomputed " << want << "\n";
  };
  check_int("total", recomputed.total);
  check_int("valid", recomputed.valid);
  check_int("correct", recomputed.correct);
  check_int("invalid", recomputed.invalid);
  check_int("incorrect", recomputed.incorrect);
  check_pct("gvi", recomputed.gvi);
  check_pct("pap", recomputed.pap);
  bool isrgc_ok = metrics.contains("isrgc") && metrics["isrgc"].is_array() &&
                  metrics["isrgc"].size() == recomputed.isrgc.size();
  if (isrgc_ok) {
    for (size_t i = 0; i < recomputed.isrgc.size(); ++i) {
      if (!metrics["isrgc"][i].is_number_integer() ||
          metrics["isrgc"][i].get<int>() != recomputed.isrgc[i]) {
        isrgc_ok = false;
        break;
      }
    }
  }
  if (!isrgc_ok) {
    diff << "isrgc: report has "
         << (metrics.contains("isrgc") ? metrics["isrgc"].dump() : "nothing")
         << ", recomputed " << nlohmann::json(recomputed.isrgc).dump() << "\n";
  }
  return R::ok(diff.str());
}

}  // namespace graminfer
