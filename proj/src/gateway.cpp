#include "tama/gateway.hpp"

#include <fmt/format.h>

#include <nlohmann/json.hpp>

#include "tama/digest.hpp"
#include "tama/error.hpp"

namespace tama {

void ChatRequest::validate() const {
  bool has_text = false;
  for (const auto& part : parts) has_text = has_text || std::holds_alternative<TextPart>(part);
  if (!has_text) throw ConfigError("chat request needs at least one text part");
  if (!(temperature >= 0.0 && temperature <= 1.0)) throw ConfigError("temperature must be in [0, 1]");
  if (!(top_p >= 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in [0, 1]");
  if (model_name.empty()) throw ConfigError("model name is empty");
}

std::string cache_key(const ChatRequest& request) {
  // Length-prefixed fields so that no two distinct requests share a preimage.
  Sha256 h;
  h.update("tama-chat-v1\n");
  h.update(fmt::format("model:{}:{}\n", request.model_name.size(), request.model_name));
  h.update(fmt::format("temperature:{:a}\ntop_p:{:a}\nstructured:{}\n", request.temperature,
                       request.top_p, request.force_structured_output ? 1 : 0));
  for (const auto& part : request.parts) {
    if (const auto* text = std::get_if<TextPart>(&part)) {
      h.update(fmt::format("text:{}:", text->text.size()));
      h.update(text->text);
    } else {
      const auto& image = std::get<ImagePart>(part);
      h.update(fmt::format("png:{}:", image.png.size()));
      h.update(image.png);
    }
    h.update("\n");
  }
  return h.hex();
}

TextPart make_meta_part(const RequestMeta& meta) {
  nlohmann::ordered_json j;
  j["stage"] = meta.stage;
  j["series"] = meta.series;
  j["window_index"] = meta.window_index;
  j["window_start"] = meta.window_start;
  j["window_length"] = meta.window_length;
  if (!meta.prior.empty()) j["prior"] = meta.prior;
  return {std::string(kMetaPrefix) + j.dump()};
}

std::optional<RequestMeta> find_meta(const ChatRequest& request) {
  for (const auto& part : request.parts) {
    const auto* text = std::get_if<TextPart>(&part);
    if (text == nullptr || text->text.rfind(kMetaPrefix, 0) != 0) continue;
    const auto j = nlohmann::json::parse(text->text.substr(kMetaPrefix.size()), nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
      RequestMeta meta;
      meta.stage = j.value("stage", "");
      meta.series = j.value("series", "");
      meta.window_index = j.value("window_index", std::size_t{0});
      meta.window_start = j.value("window_start", std::size_t{0});
      meta.window_length = j.value("window_length", std::size_t{0});
      meta.prior = j.value("prior", "");
      return meta;
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace tama
