#include "tama/http_backend.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "tama/digest.hpp"
#include "tama/error.hpp"

namespace tama {

std::string build_chat_body(const ChatRequest& request, const std::string& image_detail) {
  nlohmann::ordered_json content = nlohmann::ordered_json::array();
  for (const auto& part : request.parts) {
    if (const auto* text = std::get_if<TextPart>(&part)) {
      content.push_back({{"type", "text"}, {"text", text->text}});
    } else {
      const auto& image = std::get<ImagePart>(part);
      content.push_back({{"type", "image_url"},
                         {"image_url",
                          {{"url", "data:image/png;base64," + base64_encode(image.png)},
                           {"detail", image_detail}}}});
    }
  }
  nlohmann::ordered_json body;
  body["model"] = request.model_name;
  body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", content}}});
  body["temperature"] = request.temperature;
  body["top_p"] = request.top_p;
  if (request.force_structured_output) body["response_format"] = {{"type", "json_object"}};
  return body.dump();
}

ChatResponse parse_chat_body(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw GatewayError("chat response is not JSON");
  try {
    const auto& message = j.at("choices").at(0).at("message");
    ChatResponse response;
    if (message.contains("content") && message["content"].is_string()) {
      response.text = message["content"].get<std::string>();
    }
    if (response.text.empty()) throw GatewayError("chat response has no content");
    if (j.contains("usage") && j["usage"].is_object()) {
      response.usage = TokenUsage{j["usage"].value("prompt_tokens", std::int64_t{0}),
                                  j["usage"].value("completion_tokens", std::int64_t{0})};
    }
    response.backend_id = "http";
    return response;
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError(std::string("unexpected chat response shape: ") + e.what());
  }
}

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_in_flight, 1, 1024))) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("environment variable " + config_.api_key_env + " is not set");
  }
  api_key_ = key;
  if (config_.max_attempts == 0) throw ConfigError("max_attempts must be at least 1");

  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base_url needs a scheme: " + config_.base_url);
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

ChatResponse HttpBackend::attempt(const std::string& body) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  client.set_bearer_token_auth(api_key_);
  const auto result = client.Post(path_prefix_ + "/chat/completions", body, "application/json");
  if (!result) {
    throw GatewayError("request failed: " + httplib::to_string(result.error()), true);
  }
  const int status = result->status;
  if (status >= 200 && status < 300) return parse_chat_body(result->body);
  const bool transient = status == 408 || status == 429 || status >= 500;
  throw GatewayError(fmt::format("HTTP {}: {}", status, result->body.substr(0, 512)), transient, status);
}

ChatResponse HttpBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto body = build_chat_body(request, config_.image_detail);
  auto delay = config_.initial_backoff;
  for (std::size_t n = 1;; ++n) {
    try {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      return attempt(body);
    } catch (const GatewayError& e) {
      if (!e.transient()) throw;
      if (n >= config_.max_attempts) {
        throw GatewayError(fmt::format("giving up after {} attempts: {}", n, e.what()), false, e.status());
      }
      spdlog::warn("chat request attempt {} failed ({}); retrying in {} ms", n, e.what(), delay.count());
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace tama
