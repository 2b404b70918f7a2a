#pragma once

#include <chrono>
#include <semaphore>
#include <string>

#include "tama/gateway.hpp"

namespace tama {

struct HttpBackendConfig {
  /// OpenAI-compatible API root, e.g. https://api.openai.com/v1.
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "TAMA_API_KEY";
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::seconds timeout{120};
  std::size_t max_in_flight = 4;
  std::string image_detail = "high";
};

/// Request body for POST {base_url}/chat/completions.
[[nodiscard]] std::string build_chat_body(const ChatRequest& request, const std::string& image_detail);

/// Extracts the first choice's message content; throws GatewayError.
[[nodiscard]] ChatResponse parse_chat_body(const std::string& body);

/// Live backend speaking the chat-completions wire format over HTTP(S).
/// Retries transient failures (network errors, 408, 429, 5xx) with
/// exponential backoff; other 4xx responses fail immediately.
class HttpBackend final : public ChatBackend {
 public:
  /// Reads the API key from the environment; throws ConfigError if unset.
  explicit HttpBackend(HttpBackendConfig config);

  ChatResponse complete(const ChatRequest& request) override;
  [[nodiscard]] std::string id() const override { return "http"; }

 private:
  ChatResponse attempt(const std::string& body) const;

  HttpBackendConfig config_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<1024> in_flight_;
};

}  // namespace tama
