#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "prompting.hpp"
#include "util.hpp"

namespace graminfer {

struct ModelConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  std::string api_key_env = "LLM_API_KEY";
  std::optional<double> temperature;  // absent: provider default
  std::optional<int> max_tokens;
  int timeout_seconds = 120;
  int max_retries = 3;
};

struct ClientError {
  enum class Kind {
    Network,
    Http,
    MalformedResponse,
    RetriesExhausted,
    TranscriptExhausted,
    Io,
  };
  Kind kind;
  std::string message;
  int http_status = 0;
};

// One chat turn: returns the assistant text of the first choice. Clients are
// shareable; the replay cursor is guarded internally.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual Result<std::string, ClientError> chat(const std::string& record_id,
                                                const std::vector<ChatMessage>& messages) = 0;
};

// POSTs {model, messages, temperature?, max_tokens?} to
// {base_url}/chat/completions with a bearer token read once from the
// configured environment variable. Timeouts, HTTP 429 and 5xx are retried
// with 1s, 2s, 4s ... backoff up to max_retries.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(ModelConfig config);
  Result<std::string, ClientError> chat(const std::string& record_id,
                                        const std::vector<ChatMessage>& messages) override;

 private:
  ModelConfig config_;
  std::string api_key_;
};

using Transcript = std::map<std::string, std::vector<std::string>>;

// Deterministic stand-in for the live model: responses are consumed strictly
// in order per record id; running out is an error, never a silent recycle.
class ReplayChatClient : public ChatClient {
 public:
  explicit ReplayChatClient(Transcript transcript);
  static Result<std::unique_ptr<ReplayChatClient>, ClientError> load(const std::string& path);

  Result<std::string, ClientError> chat(const std::string& record_id,
                                        const std::vector<ChatMessage>& messages) override;

  size_t consumed(const std::string& record_id) const;
  size_t total_consumed() const;

 private:
  Transcript transcript_;
  mutable std::mutex mu_;
  std::map<std::string, size_t> cursor_;
};

// Delegates to an inner client and appends each response to the sink
// transcript, rewriting the file atomically per call. Sink writability is
// verified up front, before any API call.
class RecordingChatClient : public ChatClient {
 public:
  static Result<std::unique_ptr<RecordingChatClient>, ClientError> create(
      std::unique_ptr<ChatClient> inner, const std::string& sink_path);

  Result<std::string, ClientError> chat(const std::string& record_id,
                                        const std::vector<ChatMessage>& messages) override;

 private:
  RecordingChatClient(std::unique_ptr<ChatClient> inner, std::string sink_path);

  std::unique_ptr<ChatClient> inner_;
  std::string sink_path_;
  std::mutex mu_;
  Transcript recorded_;
};

Result<Transcript, ClientError> load_transcript(const std::string& path);

}  // namespace graminfer
