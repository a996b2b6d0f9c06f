#include <doctest.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>

#ifdef GRAMINFER_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "llm_client.hpp"
#include "test_support.hpp"

using namespace graminfer;

namespace {

std::vector<ChatMessage> sample_messages() {
  return {{Role::System, "you are a test"}, {Role::User, "hello"}};
}

// Local chat-completions endpoint with a scripted behaviour per test.
class FakeServer {
 public:
  explicit FakeServer(std::function<void(const httplib::Request&, httplib::Response&)> handler)
      : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   ++requests_;
                   handler_(req, res);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int requests() const { return requests_; }

 private:
  httplib::Server server_;
  std::function<void(const httplib::Request&, httplib::Response&)> handler_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> requests_{0};
};

std::string chat_body(const std::string& content) {
  nlohmann::json j;
  j["choices"] = {{{"message", {{"role", "assistant"}, {"content", content}}}}};
  return j.dump();
}

ModelConfig local_config(const FakeServer& server) {
  ModelConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model = "test-model";
  cfg.timeout_seconds = 5;
  cfg.max_retries = 3;
  return cfg;
}

}  // namespace

TEST_CASE("live client returns the first choice's content") {
  FakeServer server([](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body = nlohmann::json::parse(req.body);
    CHECK(body["model"] == "test-model");
    CHECK(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK_FALSE(body.contains("temperature"));  // default configuration omits it
    res.set_content(chat_body("the reply"), "application/json");
  });
  HttpChatClient client(local_config(server));
  auto out = client.chat("r1", sample_messages());
  REQUIRE(out.ok());
  CHECK(out.value() == "the reply");
  CHECK(server.requests() == 1);
}

TEST_CASE("429 twice then 200 succeeds after two retries") {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    static std::atomic<int> calls{0};
    if (++calls <= 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
    } else {
      res.set_content(chat_body("eventually"), "application/json");
    }
  });
  HttpChatClient client(local_config(server));
  auto started = std::chrono::steady_clock::now();
  auto out = client.chat("r1", sample_messages());
  auto elapsed = std::chrono::steady_clock::now() - started;
  REQUIRE(out.ok());
  CHECK(out.value() == "eventually");
  CHECK(server.requests() == 3);
  // Backoff 1s then 2s.
  CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() >= 2900);
}

TEST_CASE("retries stop at max_retries") {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
    res.set_content("down", "text/plain");
  });
  ModelConfig cfg = local_config(server);
  cfg.max_retries = 1;
  HttpChatClient client(cfg);
  auto out = client.chat("r1", sample_messages());
  REQUIRE_FALSE(out.ok());
  CHECK(out.error().kind == ClientError::Kind::RetriesExhausted);
  CHECK(server.requests() == 2);  // initial try + one retry
}

TEST_CASE("non-retryable HTTP status fails immediately") {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content("bad key", "text/plain");
  });
  HttpChatClient client(local_config(server));
  auto out = client.chat("r1", sample_messages());
  REQUIRE_FALSE(out.ok());
  CHECK(out.error().kind == ClientError::Kind::Http);
  CHECK(out.error().http_status == 401);
  CHECK(server.requests() == 1);
}

TEST_CASE("response without content is malformed") {
  FakeServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[{"message":{"role":"assistant"}}]})", "application/json");
  });
  HttpChatClient client(local_config(server));
  auto out = client.chat("r1", sample_messages());
  REQUIRE_FALSE(out.ok());
  CHECK(out.error().kind == ClientError::Kind::MalformedResponse);
}

TEST_CASE("replay consumes responses strictly in order and then errors") {
  ReplayChatClient client(Transcript{{"r1", {"A", "B"}}});
  auto first = client.chat("r1", sample_messages());
  REQUIRE(first.ok());
  CHECK(first.value() == "A");
  auto second = client.chat("r1", sample_messages());
  REQUIRE(second.ok());
  CHECK(second.value() == "B");
  auto third = client.chat("r1", sample_messages());
  REQUIRE_FALSE(third.ok());
  CHECK(third.error().kind == ClientError::Kind::TranscriptExhausted);
  CHECK(third.error().message.find("r1") != std::string::npos);
  CHECK(third.error().message.find("2") != std::string::npos);
  CHECK(client.consumed("r1") == 2);
}

TEST_CASE("replay for an id without entries is exhausted at cursor 0") {
  ReplayChatClient client(Transcript{{"r1", {"A"}}});
  auto out = client.chat("r2", sample_messages());
  REQUIRE_FALSE(out.ok());
  CHECK(out.error().kind == ClientError::Kind::TranscriptExhausted);
  CHECK(out.error().message.find("r2") != std::string::npos);
  CHECK(out.error().message.find("0") != std::string::npos);
}

TEST_CASE("transcript files load and reject malformed shapes") {
  std::string good = testsup::temp_file("gi_transcript_ok.json");
  std::ofstream(good) << R"({"r1": ["one", "two"], "r2": []})";
  auto t = load_transcript(good);
  REQUIRE(t.ok());
  CHECK(t.value().at("r1").size() == 2);
  CHECK(t.value().count("r2") == 1);

  std::string bad = testsup::temp_file("gi_transcript_bad.json");
  std::ofstream(bad) << R"({"r1": "not an array"})";
  CHECK_FALSE(load_transcript(bad).ok());
  CHECK_FALSE(load_transcript(testsup::temp_file("gi_transcript_missing.json")).ok());
}

TEST_CASE("recording appends per call and the file replays identically") {
  FakeServer server([](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body = nlohmann::json::parse(req.body);
    std::string label = body["messages"].back()["content"];
    res.set_content(chat_body("echo:" + label), "application/json");
  });
  std::string sink = testsup::temp_file("gi_record_sink.json");
  auto recorder =
      RecordingChatClient::create(std::make_unique<HttpChatClient>(local_config(server)), sink);
  REQUIRE(recorder.ok());

  std::vector<ChatMessage> m1{{Role::System, "s"}, {Role::User, "one"}};
  std::vector<ChatMessage> m2{{Role::System, "s"}, {Role::User, "two"}};
  REQUIRE(recorder.value()->chat("rec-a", m1).ok());
  REQUIRE(recorder.value()->chat("rec-a", m2).ok());
  REQUIRE(recorder.value()->chat("rec-b", m1).ok());

  auto replay = ReplayChatClient::load(sink);
  REQUIRE(replay.ok());
  CHECK(replay.value()->chat("rec-a", m1).value() == "echo:one");
  CHECK(replay.value()->chat("rec-a", m2).value() == "echo:two");
  CHECK(replay.value()->chat("rec-b", m1).value() == "echo:one");
}

TEST_CASE("unwritable sink fails before any API call") {
  auto recorder = RecordingChatClient::create(
      std::make_unique<ReplayChatClient>(Transcript{}),
      "/root/proj-no-such-dir/sink.json");
  REQUIRE_FALSE(recorder.ok());
  CHECK(recorder.error().kind == ClientError::Kind::Io);
}
