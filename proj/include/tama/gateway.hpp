#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tama {

struct TextPart {
  std::string text;
};

struct ImagePart {
  std::vector<std::uint8_t> png;
};

using MessagePart = std::variant<TextPart, ImagePart>;

inline constexpr std::string_view kDefaultModel = "gpt-4o-2024-05-13";

/// One user turn for a multimodal chat-completions model.
struct ChatRequest {
  std::vector<MessagePart> parts;
  double temperature = 0.1;
  double top_p = 0.3;
  bool force_structured_output = true;
  std::string model_name = std::string(kDefaultModel);

  /// Throws ConfigError unless there is a text part and both sampling
  /// parameters lie in [0, 1].
  void validate() const;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  std::optional<TokenUsage> usage;
  std::string backend_id;
};

/// Collision-resistant digest of everything that influences a response.
[[nodiscard]] std::string cache_key(const ChatRequest& request);

/// A chat-completion backend. Implementations must be safe to call from
/// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  [[nodiscard]] virtual std::string id() const = 0;
};

/// Placement of a request within a run. Sent as a trailing text part so
/// that offline backends can locate the relevant ground truth.
struct RequestMeta {
  std::string stage;  // "reference", "analyze" or "reflect"
  std::string series;
  std::size_t window_index = 0;
  std::size_t window_start = 0;
  std::size_t window_length = 0;
  /// Serialized prior detections (reflect stage only).
  std::string prior;
};

inline constexpr std::string_view kMetaPrefix = "<Window metadata>: ";

[[nodiscard]] TextPart make_meta_part(const RequestMeta& meta);
/// Finds and decodes the metadata part, if present.
[[nodiscard]] std::optional<RequestMeta> find_meta(const ChatRequest& request);

}  // namespace tama
