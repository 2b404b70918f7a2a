#pragma once

#include <cstddef>
#include <vector>

#include "tama/core.hpp"

namespace tama {

/// Segmentation of a series into overlapping windows of equal width.
struct WindowPlan {
  std::size_t width = 0;
  std::size_t stride = 0;
  std::vector<std::size_t> starts;

  [[nodiscard]] double overlap_ratio() const noexcept {
    return static_cast<double>(stride) / static_cast<double>(width);
  }
  [[nodiscard]] std::size_t size() const noexcept { return starts.size(); }
};

struct Window {
  std::size_t index = 0;
  std::size_t start = 0;
  std::vector<double> values;
};

/// Zero-mean, unit-variance copy of `x` (population standard deviation).
/// A constant series maps to all zeros.
[[nodiscard]] TimeSeries normalize(const TimeSeries& x);

/// Window starts at 0, stride, 2*stride, ... plus a final window anchored at
/// T - width when the regular grid leaves a tail uncovered.
/// Requires 1 <= stride < width <= T.
[[nodiscard]] WindowPlan plan_windows(std::size_t length, std::size_t width, std::size_t stride);

[[nodiscard]] std::vector<Window> cut_windows(const TimeSeries& x, const WindowPlan& plan);

struct Segmentation {
  WindowPlan plan;
  std::vector<Window> windows;
};

[[nodiscard]] Segmentation make_windows(const TimeSeries& x, std::size_t width, std::size_t stride);

/// Width 3 * period (capped at T) and stride width * overlap when not given.
struct WindowSizing {
  std::size_t width = 0;
  std::size_t stride = 0;
};

[[nodiscard]] WindowSizing default_sizing(std::size_t length, std::optional<std::size_t> period_hint,
                                          double overlap_ratio = 0.5, std::size_t periods = 3);

}  // namespace tama
