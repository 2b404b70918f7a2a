#pragma once

#include <vector>

#include "support/oracles.hpp"
#include "support/test_util.hpp"
#include "tama/analysis.hpp"

namespace testutil {

/// Random window analyses over a series of `length`, with window-local
/// detections that may overhang the series end.
inline std::vector<tama::WindowAnalysis> random_analyses(tama::Rng& rng, std::size_t length, std::size_t max_detections) {
  std::vector<tama::WindowAnalysis> out;
  const auto windows = rng.uniform_int(0, 6);
  std::size_t budget = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(max_detections)));
  for (std::int64_t k = 0; k < windows; ++k) {
    tama::WindowAnalysis a;
    a.window_index = static_cast<std::size_t>(k);
    a.window_start = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(length) - 1));
    a.window_length = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(length)));
    const auto n = k + 1 == windows ? budget : static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(budget)));
    budget -= n;
    for (std::size_t i = 0; i < n; ++i) {
      const auto last = static_cast<std::int64_t>(a.window_length) - 1;
      const auto s = static_cast<std::size_t>(rng.uniform_int(0, last));
      const auto e = static_cast<std::size_t>(rng.uniform_int(0, last));
      a.detections.push_back({tama::make_interval(s, e), static_cast<int>(rng.uniform_int(1, 4)),
                              tama::kAllAnomalyTypes[static_cast<std::size_t>(rng.uniform_int(0, 3))], {}});
    }
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<oracle::Interval> to_pairs(const std::vector<tama::AnomalyInterval>& ivs) {
  std::vector<oracle::Interval> out;
  for (const auto& iv : ivs) out.emplace_back(iv.start, iv.end);
  return out;
}

inline oracle::Points to_points(const std::vector<bool>& mask) {
  oracle::Points out;
  for (std::size_t t = 0; t < mask.size(); ++t) {
    if (mask[t]) out.insert(t);
  }
  return out;
}

}  // namespace testutil
