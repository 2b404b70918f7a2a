#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "tama/core.hpp"
#include "tama/random.hpp"

namespace testutil {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("tama_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Random disjoint inclusive intervals inside [0, length - 1].
inline std::vector<tama::AnomalyInterval> random_intervals(tama::Rng& rng, std::size_t length, std::size_t max_count) {
  std::vector<bool> flags(length, false);
  const auto count = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(max_count)));
  for (std::size_t i = 0; i < count; ++i) {
    const auto len = static_cast<std::size_t>(rng.uniform_int(1, std::max<std::int64_t>(1, static_cast<std::int64_t>(length) / 8)));
    const auto s = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(length - 1)));
    for (auto t = s; t < std::min(length, s + len); ++t) flags[t] = true;
  }
  return tama::labels_to_intervals(tama::LabelSeries(flags));
}

}  // namespace testutil
