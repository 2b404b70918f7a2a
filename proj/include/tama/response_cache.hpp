#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tama/gateway.hpp"

namespace tama {

/// Content-addressed store of chat responses: one `<key>.json` file per
/// request digest plus an append-only `index.jsonl` of request summaries.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  [[nodiscard]] std::optional<ChatResponse> get(const std::string& key) const;
  void put(const std::string& key, const ChatRequest& request, const ChatResponse& response);

  struct Entry {
    std::string key;
    std::string summary;
    std::uintmax_t bytes = 0;
  };
  [[nodiscard]] std::vector<Entry> entries() const;
  /// Removes every cached response; returns how many were deleted.
  std::size_t purge();

  [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex index_mutex_;
};

enum class CacheMode {
  /// Always call the inner backend and store the result.
  record,
  /// Serve hits from the cache; forward and store misses.
  read_through,
  /// Serve hits only; a miss raises ReplayMissError. No inner backend needed.
  strict_replay,
};

[[nodiscard]] std::string_view to_string(CacheMode mode) noexcept;
[[nodiscard]] std::optional<CacheMode> cache_mode_from_string(std::string_view name) noexcept;

class CachingBackend final : public ChatBackend {
 public:
  CachingBackend(std::shared_ptr<ResponseCache> cache, std::shared_ptr<ChatBackend> inner, CacheMode mode);

  ChatResponse complete(const ChatRequest& request) override;
  [[nodiscard]] std::string id() const override;

  /// Number of requests forwarded to the inner backend.
  [[nodiscard]] std::size_t live_calls() const noexcept { return live_calls_.load(); }
  [[nodiscard]] std::size_t hits() const noexcept { return hits_.load(); }

 private:
  std::shared_ptr<ResponseCache> cache_;
  std::shared_ptr<ChatBackend> inner_;
  CacheMode mode_;
  std::atomic<std::size_t> live_calls_{0};
  std::atomic<std::size_t> hits_{0};
};

}  // namespace tama
