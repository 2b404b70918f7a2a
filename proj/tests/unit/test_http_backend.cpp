#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "tama/error.hpp"
#include "tama/http_backend.hpp"

using namespace tama;

namespace {

/// Local chat-completions stand-in. `fail_first` responses carry `fail_status`.
class FakeServer {
 public:
  FakeServer(int fail_status, int fail_first) : fail_status_(fail_status), fail_first_(fail_first) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      if (calls++ < fail_first_) {
        res.status = fail_status_;
        res.set_content(R"({"error":"nope"})", "application/json");
        return;
      }
      res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"{\"ok\":1}"}}],)"
                      R"("usage":{"prompt_tokens":7,"completion_tokens":3}})",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  [[nodiscard]] std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<int> calls{0};
  std::string last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  int fail_status_;
  int fail_first_;
};

HttpBackendConfig config_for(const FakeServer& server) {
  HttpBackendConfig cfg;
  cfg.base_url = server.url();
  cfg.api_key_env = "TAMA_TEST_KEY";
  cfg.initial_backoff = std::chrono::milliseconds(1);
  cfg.timeout = std::chrono::seconds(5);
  return cfg;
}

ChatRequest request() {
  ChatRequest r;
  r.parts = {TextPart{"describe"}, ImagePart{{1, 2, 3}}};
  return r;
}

}  // namespace

TEST_CASE("request body shape") {
  const auto body = nlohmann::json::parse(build_chat_body(request(), "high"));
  CHECK(body["model"] == "gpt-4o-2024-05-13");
  CHECK(body["temperature"] == 0.1);
  CHECK(body["top_p"] == 0.3);
  CHECK(body["response_format"]["type"] == "json_object");
  const auto& content = body["messages"][0]["content"];
  REQUIRE(content.size() == 2);
  CHECK(content[0]["text"] == "describe");
  CHECK(content[1]["image_url"]["url"] == "data:image/png;base64,AQID");
  CHECK(content[1]["image_url"]["detail"] == "high");
}

TEST_CASE("response parsing") {
  const auto r = parse_chat_body(R"({"choices":[{"message":{"content":"hi"}}]})");
  CHECK(r.text == "hi");
  CHECK_THROWS_AS((void)parse_chat_body("not json"), GatewayError);
  CHECK_THROWS_AS((void)parse_chat_body(R"({"choices":[]})"), GatewayError);
  CHECK_THROWS_AS((void)parse_chat_body(R"({"choices":[{"message":{"content":""}}]})"), GatewayError);
}

TEST_CASE("missing credential is a configuration error") {
  ::unsetenv("TAMA_TEST_MISSING_KEY");
  HttpBackendConfig cfg;
  cfg.api_key_env = "TAMA_TEST_MISSING_KEY";
  CHECK_THROWS_AS(HttpBackend{cfg}, ConfigError);
}

TEST_CASE("successful call sends the bearer token") {
  ::setenv("TAMA_TEST_KEY", "secret", 1);
  FakeServer server(500, 0);
  HttpBackend backend(config_for(server));
  const auto r = backend.complete(request());
  CHECK(r.text == R"({"ok":1})");
  REQUIRE(r.usage);
  CHECK(r.usage->prompt_tokens == 7);
  CHECK(server.last_auth == "Bearer secret");
  CHECK(server.last_body == build_chat_body(request(), "high"));
}

TEST_CASE("server errors are retried") {
  ::setenv("TAMA_TEST_KEY", "secret", 1);
  FakeServer server(500, 2);
  HttpBackend backend(config_for(server));
  CHECK(backend.complete(request()).text == R"({"ok":1})");
  CHECK(server.calls == 3);
}

TEST_CASE("retries give up after max_attempts") {
  ::setenv("TAMA_TEST_KEY", "secret", 1);
  FakeServer server(503, 10);
  HttpBackend backend(config_for(server));
  CHECK_THROWS_AS((void)backend.complete(request()), GatewayError);
  CHECK(server.calls == 3);
}

TEST_CASE("client errors are not retried") {
  ::setenv("TAMA_TEST_KEY", "secret", 1);
  FakeServer server(400, 10);
  HttpBackend backend(config_for(server));
  try {
    (void)backend.complete(request());
    FAIL("expected an error");
  } catch (const GatewayError& e) {
    CHECK(e.status() == 400);
    CHECK_FALSE(e.transient());
  }
  CHECK(server.calls == 1);
}

TEST_CASE("rate limiting is retried") {
  ::setenv("TAMA_TEST_KEY", "secret", 1);
  FakeServer server(429, 1);
  HttpBackend backend(config_for(server));
  CHECK_NOTHROW((void)backend.complete(request()));
  CHECK(server.calls == 2);
}
