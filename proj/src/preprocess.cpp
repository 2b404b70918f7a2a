#include "tama/preprocess.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>

#include "tama/error.hpp"

namespace tama {

namespace {

/// Neumaier-compensated sum.
template <typename F>
double compensated_sum(std::span<const double> values, F term) {
  double sum = 0.0;
  double carry = 0.0;
  for (const double v : values) {
    const double x = term(v);
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + carry;
}

/// Corrected two-pass mean and population standard deviation.
std::pair<double, double> moments(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  double mean = compensated_sum(values, [](double v) { return v; }) / n;
  mean += compensated_sum(values, [mean](double v) { return v - mean; }) / n;
  const double var = compensated_sum(values, [mean](double v) { return (v - mean) * (v - mean); }) / n;
  return {mean, std::sqrt(var)};
}

}  // namespace

TimeSeries normalize(const TimeSeries& x) {
  const auto values = x.values();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return x.with_values(std::vector<double>(values.size(), 0.0));

  const auto [mean, sigma] = moments(values);
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back((v - mean) / sigma);
  // One refinement pass removes the residual left by rounding in the mean.
  const auto [m2, s2] = moments(out);
  if (s2 > 0.0) {
    for (auto& v : out) v = (v - m2) / s2;
  }
  return x.with_values(std::move(out));
}

WindowPlan plan_windows(std::size_t length, std::size_t width, std::size_t stride) {
  if (stride == 0) throw ValidationError("window stride must be positive");
  if (stride >= width) {
    throw ValidationError(
        fmt::format("window stride {} must be smaller than width {} (overlap ratio < 1)", stride, width));
  }
  if (width > length) {
    throw ValidationError(fmt::format("window width {} exceeds series length {}", width, length));
  }
  WindowPlan plan{width, stride, {}};
  for (std::size_t s = 0; s + width <= length; s += stride) plan.starts.push_back(s);
  if (plan.starts.back() < length - width) plan.starts.push_back(length - width);
  return plan;
}

std::vector<Window> cut_windows(const TimeSeries& x, const WindowPlan& plan) {
  std::vector<Window> windows;
  windows.reserve(plan.size());
  const auto values = x.values();
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto s = plan.starts[k];
    if (s + plan.width > values.size()) throw ValidationError("window plan exceeds series length");
    const auto slice = values.subspan(s, plan.width);
    windows.push_back({k, s, std::vector<double>(slice.begin(), slice.end())});
  }
  return windows;
}

Segmentation make_windows(const TimeSeries& x, std::size_t width, std::size_t stride) {
  auto plan = plan_windows(x.size(), width, stride);
  auto windows = cut_windows(x, plan);
  return {std::move(plan), std::move(windows)};
}

WindowSizing default_sizing(std::size_t length, std::optional<std::size_t> period_hint,
                            double overlap_ratio, std::size_t periods) {
  if (!(overlap_ratio > 0.0 && overlap_ratio < 1.0)) {
    throw ConfigError("overlap ratio must be in (0, 1)");
  }
  if (length < 2) throw ValidationError("series too short to window");
  std::size_t width = period_hint ? *period_hint * periods : std::min<std::size_t>(length, 600);
  width = std::clamp<std::size_t>(width, 2, length);
  auto stride = static_cast<std::size_t>(std::llround(static_cast<double>(width) * overlap_ratio));
  stride = std::clamp<std::size_t>(stride, 1, width - 1);
  return {width, stride};
}

}  // namespace tama
