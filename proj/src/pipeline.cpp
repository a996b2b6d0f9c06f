#include "pipeline.hpp"

#include <chrono>
#include <ctime>

#include "engine/compile.hpp"

namespace graminfer {

namespace {

std::string now_rfc3339() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

InferResult infer_record(const SnippetRecord& record, const std::vector<FslRecord>& fsl,
                         const PromptTemplates& templates, ChatClient& client,
                         const RunConfig& cfg) {
  RecordOutcome out;
  out.id = record.id;

  std::vector<SimilarityHit> hits;
  if (cfg.few_shot)
    hits = retrieve_similar(record.code, fsl, cfg.top_k, cfg.similarity_threshold);
  for (const SimilarityHit& h : hits) out.fewshot.push_back({fsl[h.index].id, h.score});

  std::vector<ChatMessage> messages = build_initial_messages(templates, hits, fsl, record.code);

  for (int i = 1; i <= cfg.max_iterations; ++i) {
    auto response = client.chat(record.id, messages);
    if (!response.ok()) return {std::nullopt, response.error().message};

    IterationTrace trace;
    trace.index = i;
    trace.response = response.value();
    trace.prompt_hash = hash_messages(messages);

    std::optional<std::string> grammar = extract_grammar(response.value());
    std::string error_text;
    if (!grammar) {
      error_text = std::string(kMissingGrammarTags);
      trace.error_message = error_text;
    } else {
      trace.extracted_grammar = grammar;
      out.final_grammar = grammar;
      auto compiled = engine::compile(*grammar);
      if (!compiled.ok()) {
        error_text = engine::format_error(compiled.error());
        trace.error_message = error_text;
      } else {
        trace.valid = true;
        out.ever_valid = true;
        auto tree = compiled.value().parse(record.code);
        if (tree.ok()) {
          trace.parse = IterationTrace::ParseStatus::Ok;
          out.iterations.push_back(std::move(trace));
          out.correct = true;
          out.success_iteration = i;
          return {std::move(out), std::nullopt};
        }
        trace.parse = IterationTrace::ParseStatus::Error;
        error_text = engine::format_error(tree.error());
        trace.error_message = error_text;
      }
    }
    out.iterations.push_back(trace);
    if (i < cfg.max_iterations) {
      messages.push_back({Role::Assistant, response.value()});
      std::optional<std::string_view> prev =
          grammar ? std::optional<std::string_view>(*grammar) : std::nullopt;
      messages.push_back(build_feedback_message(templates, prev, error_text));
    }
  }
  return {std::move(out), std::nullopt};
}

Result<RunReport, RunError> run(const RunConfig& cfg) {
  if (cfg.max_iterations < 1) return RunError{1, "max-iterations must be >= 1"};
  if (cfg.similarity_threshold < 0.0 || cfg.similarity_threshold > 1.0)
    return RunError{1, "similarity-threshold must be within [0, 1]"};
  if (cfg.model.max_retries < 0) return RunError{1, "max-retries must be >= 0"};
  if (cfg.model.timeout_seconds <= 0) return RunError{1, "timeout must be positive"};

  auto eval = load_eval(cfg.eval_path);
  if (!eval.ok()) return RunError{2, eval.error().message};
  auto fsl = load_fsl(cfg.fsl_path);
  if (!fsl.ok()) return RunError{2, fsl.error().message};

  PromptTemplates templates;
  if (cfg.templates_dir) {
    auto loaded = PromptTemplates::load_dir(*cfg.templates_dir);
    if (!loaded.ok()) return RunError{1, loaded.error()};
    templates = std::move(loaded).take();
  } else {
    templates = PromptTemplates::defaults();
  }

  std::unique_ptr<ChatClient> client;
  switch (cfg.mode) {
    case RunMode::Replay: {
      if (!cfg.transcript_path) return RunError{1, "replay mode requires a transcript"};
      auto replay = ReplayChatClient::load(*cfg.transcript_path);
      if (!replay.ok()) return RunError{3, replay.error().message};
      client = std::move(replay).take();
      break;
    }
    case RunMode::Record: {
      if (!cfg.transcript_path)
        return RunError{1, "record mode requires a transcript sink path"};
      auto recorder = RecordingChatClient::create(std::make_unique<HttpChatClient>(cfg.model),
                                                  *cfg.transcript_path);
      if (!recorder.ok()) return RunError{3, recorder.error().message};
      client = std::move(recorder).take();
      break;
    }
    case RunMode::Live:
      client = std::make_unique<HttpChatClient>(cfg.model);
      break;
  }

  std::optional<std::string> timestamp;
  if (!cfg.deterministic) timestamp = now_rfc3339();

  RunReport report;
  for (const SnippetRecord& record : eval.value()) {
    InferResult r = infer_record(record, fsl.value(), templates, *client, cfg);
    if (r.outcome)
      report.outcomes.push_back(std::move(*r.outcome));
    else
      report.aborted.push_back(record.id);
  }

  report.metrics = compute_metrics(report.outcomes, cfg.max_iterations);
  report.document =
      report_to_json(cfg, report.outcomes, report.aborted, report.metrics, timestamp);
  if (auto err = write_report(cfg.out_path, report.document)) return RunError{4, *err};
  return report;
}

}  // namespace graminfer
