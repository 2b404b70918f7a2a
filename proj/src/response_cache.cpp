#include "tama/response_cache.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "tama/error.hpp"

namespace tama {
namespace fs = std::filesystem;

namespace {

std::string summarize(const ChatRequest& request) {
  std::size_t texts = 0;
  std::size_t images = 0;
  for (const auto& part : request.parts) {
    std::holds_alternative<TextPart>(part) ? ++texts : ++images;
  }
  std::string where;
  if (const auto meta = find_meta(request)) {
    where = fmt::format(" {} series={} window={}", meta->stage, meta->series, meta->window_index);
  }
  return fmt::format("model={} texts={} images={}{}", request.model_name, texts, images, where);
}

}  // namespace

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
  std::ifstream in(dir_ / (key + ".json"), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto j = nlohmann::json::parse(buf.str(), nullptr, false);
  if (j.is_discarded() || !j.contains("text") || !j["text"].is_string()) return std::nullopt;
  ChatResponse response;
  response.text = j["text"].get<std::string>();
  response.backend_id = "replay";
  if (j.contains("usage") && j["usage"].is_object()) {
    response.usage = TokenUsage{j["usage"].value("prompt_tokens", std::int64_t{0}),
                                j["usage"].value("completion_tokens", std::int64_t{0})};
  }
  return response;
}

void ResponseCache::put(const std::string& key, const ChatRequest& request, const ChatResponse& response) {
  nlohmann::ordered_json j;
  j["key"] = key;
  j["summary"] = summarize(request);
  j["backend"] = response.backend_id;
  j["text"] = response.text;
  if (response.usage) {
    j["usage"] = {{"prompt_tokens", response.usage->prompt_tokens},
                  {"completion_tokens", response.usage->completion_tokens}};
  }
  const auto final_path = dir_ / (key + ".json");
  const auto tmp_path = dir_ / (key + ".json.tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary);
    if (!out) throw Error("cannot write cache entry " + tmp_path.string());
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp_path, final_path);

  std::lock_guard lock(index_mutex_);
  std::ofstream index(dir_ / "index.jsonl", std::ios::app);
  index << nlohmann::ordered_json{{"key", key}, {"summary", j["summary"]}}.dump() << '\n';
}

std::vector<ResponseCache::Entry> ResponseCache::entries() const {
  std::vector<Entry> out;
  for (const auto& item : fs::directory_iterator(dir_)) {
    const auto& p = item.path();
    if (p.extension() != ".json") continue;
    Entry e{p.stem().string(), {}, item.file_size()};
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto j = nlohmann::json::parse(buf.str(), nullptr, false);
    if (!j.is_discarded() && j.contains("summary")) e.summary = j["summary"].get<std::string>();
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });
  return out;
}

std::size_t ResponseCache::purge() {
  std::lock_guard lock(index_mutex_);
  std::size_t removed = 0;
  for (const auto& item : fs::directory_iterator(dir_)) {
    const auto ext = item.path().extension();
    if (ext == ".json") ++removed;
    if (ext == ".json" || ext == ".tmp" || item.path().filename() == "index.jsonl") fs::remove(item.path());
  }
  return removed;
}

std::string_view to_string(CacheMode mode) noexcept {
  switch (mode) {
    case CacheMode::record:
      return "record";
    case CacheMode::read_through:
      return "read_through";
    case CacheMode::strict_replay:
      return "replay";
  }
  return "replay";
}

std::optional<CacheMode> cache_mode_from_string(std::string_view name) noexcept {
  if (name == "record") return CacheMode::record;
  if (name == "read_through") return CacheMode::read_through;
  if (name == "replay") return CacheMode::strict_replay;
  return std::nullopt;
}

CachingBackend::CachingBackend(std::shared_ptr<ResponseCache> cache, std::shared_ptr<ChatBackend> inner,
                               CacheMode mode)
    : cache_(std::move(cache)), inner_(std::move(inner)), mode_(mode) {
  if (!cache_) throw ConfigError("caching backend needs a cache");
  if (!inner_ && mode_ != CacheMode::strict_replay) {
    throw ConfigError(fmt::format("cache mode '{}' needs an inner backend", to_string(mode_)));
  }
}

ChatResponse CachingBackend::complete(const ChatRequest& request) {
  request.validate();
  const auto key = cache_key(request);
  if (mode_ != CacheMode::record) {
    if (auto hit = cache_->get(key)) {
      ++hits_;
      return *hit;
    }
    if (mode_ == CacheMode::strict_replay) throw ReplayMissError(key);
  }
  ++live_calls_;
  auto response = inner_->complete(request);
  cache_->put(key, request, response);
  return response;
}

std::string CachingBackend::id() const {
  return fmt::format("cache[{}]({})", to_string(mode_), inner_ ? inner_->id() : "none");
}

}  // namespace tama
