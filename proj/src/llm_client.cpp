#include "llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#ifdef GRAMINFER_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

namespace graminfer {

namespace {

// Splits "http://host:1234/prefix" into client base and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  size_t scheme = url.find("://");
  size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  size_t slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

Result<std::string, ClientError> write_file_atomic(const std::string& path,
                                                   const std::string& body) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return ClientError{ClientError::Kind::Io, "cannot write " + tmp};
    out << body;
    if (!out.good()) return ClientError{ClientError::Kind::Io, "short write to " + tmp};
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    return ClientError{ClientError::Kind::Io, "cannot move " + tmp + " to " + path + ": " +
                                                  ec.message()};
  return std::string();
}

}  // namespace

// --- live -------------------------------------------------------------------

HttpChatClient::HttpChatClient(ModelConfig config) : config_(std::move(config)) {
  // Key is read exactly once and never logged or persisted.
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

Result<std::string, ClientError> HttpChatClient::chat(
    const std::string& /*record_id*/, const std::vector<ChatMessage>& messages) {
  nlohmann::json body;
  body["model"] = config_.model;
  auto& msgs = body["messages"] = nlohmann::json::array();
  for (const ChatMessage& m : messages)
    msgs.push_back({{"role", std::string(role_name(m.role))}, {"content", m.content}});
  if (config_.temperature) body["temperature"] = *config_.temperature;
  if (config_.max_tokens) body["max_tokens"] = *config_.max_tokens;
  const std::string payload = body.dump();

  auto [base, prefix] = split_base_url(config_.base_url);
  httplib::Client client(base);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::seconds(1LL << (attempt - 1)));
    }
    auto res = client.Post(prefix + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "network error: " + httplib::to_string(res.error());
      continue;  // connection failures and timeouts are retryable
    }
    if (res->status != 200) {
      std::string excerpt = res->body.substr(0, 200);
      if (retryable_status(res->status)) {
        last_error = "HTTP " + std::to_string(res->status) + ": " + excerpt;
        continue;
      }
      return ClientError{ClientError::Kind::Http,
                         "HTTP " + std::to_string(res->status) + ": " + excerpt, res->status};
    }
    nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty() || !doc["choices"][0].contains("message") ||
        !doc["choices"][0]["message"].contains("content") ||
        !doc["choices"][0]["message"]["content"].is_string()) {
      return ClientError{ClientError::Kind::MalformedResponse,
                         "response JSON missing choices[0].message.content"};
    }
    return doc["choices"][0]["message"]["content"].get<std::string>();
  }
  return ClientError{ClientError::Kind::RetriesExhausted,
                     "gave up after " + std::to_string(config_.max_retries) +
                         " retries; last error: " + last_error};
}

// --- replay -----------------------------------------------------------------

ReplayChatClient::ReplayChatClient(Transcript transcript) : transcript_(std::move(transcript)) {}

Result<Transcript, ClientError> load_transcript(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return ClientError{ClientError::Kind::Io, "transcript not readable: " + path};
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    return ClientError{ClientError::Kind::Io,
                       "transcript must be a JSON object of id -> responses: " + path};
  Transcript t;
  for (auto& [id, responses] : doc.items()) {
    if (!responses.is_array())
      return ClientError{ClientError::Kind::Io,
                         "transcript entry '" + id + "' must be an array of strings"};
    for (auto& r : responses) {
      if (!r.is_string())
        return ClientError{ClientError::Kind::Io,
                           "transcript entry '" + id + "' must be an array of strings"};
      t[id].push_back(r.get<std::string>());
    }
    t.try_emplace(id);  // keep empty arrays as explicit entries
  }
  return t;
}

Result<std::unique_ptr<ReplayChatClient>, ClientError> ReplayChatClient::load(
    const std::string& path) {
  auto t = load_transcript(path);
  if (!t.ok()) return t.error();
  return std::make_unique<ReplayChatClient>(std::move(t).take());
}

Result<std::string, ClientError> ReplayChatClient::chat(
    const std::string& record_id, const std::vector<ChatMessage>& /*messages*/) {
  std::lock_guard<std::mutex> lock(mu_);
  size_t& cur = cursor_[record_id];
  auto it = transcript_.find(record_id);
  if (it == transcript_.end() || cur >= it->second.size()) {
    return ClientError{ClientError::Kind::TranscriptExhausted,
                       "transcript exhausted for record '" + record_id + "' at response " +
                           std::to_string(cur)};
  }
  return it->second[cur++];
}

size_t ReplayChatClient::consumed(const std::string& record_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cursor_.find(record_id);
  return it == cursor_.end() ? 0 : it->second;
}

size_t ReplayChatClient::total_consumed() const {
  std::lock_guard<std::mutex> lock(mu_);
  size_t sum = 0;
  for (auto& [id, n] : cursor_) sum += n;
  return sum;
}

// --- record -----------------------------------------------------------------

RecordingChatClient::RecordingChatClient(std::unique_ptr<ChatClient> inner,
                                         std::string sink_path)
    : inner_(std::move(inner)), sink_path_(std::move(sink_path)) {}

Result<std::unique_ptr<RecordingChatClient>, ClientError> RecordingChatClient::create(
    std::unique_ptr<ChatClient> inner, const std::string& sink_path) {
  // Fail before the first API call if the sink cannot be written.
  auto probe = write_file_atomic(sink_path, "{}");
  if (!probe.ok()) return probe.error();
  return std::unique_ptr<RecordingChatClient>(
      new RecordingChatClient(std::move(inner), sink_path));
}

Result<std::string, ClientError> RecordingChatClient::chat(
    const std::string& record_id, const std::vector<ChatMessage>& messages) {
  auto response = inner_->chat(record_id, messages);
  if (!response.ok()) return response.error();
  std::lock_guard<std::mutex> lock(mu_);
  recorded_[record_id].push_back(response.value());
  nlohmann::json doc = nlohmann::json::object();
  for (auto& [id, responses] : recorded_) doc[id] = responses;
  auto written = write_file_atomic(sink_path_, doc.dump(2) + "\n");
  if (!written.ok()) return written.error();
  return response;
}

}  // namespace graminfer
