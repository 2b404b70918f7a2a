#include "tama/core.hpp"

#include <algorithm>
#include <cmath>

#include "tama/error.hpp"

namespace tama {

TimeSeries::TimeSeries(std::vector<double> values, std::string name,
                       std::optional<std::size_t> period_hint)
    : values_(std::move(values)), name_(std::move(name)), period_hint_(period_hint) {
  if (values_.empty()) {
    throw ValidationError("time series '" + name_ + "' is empty");
  }
  for (std::size_t t = 0; t < values_.size(); ++t) {
    if (!std::isfinite(values_[t])) {
      throw ValidationError("time series '" + name_ + "' has a non-finite value at index " +
                            std::to_string(t));
    }
  }
  if (period_hint_ && *period_hint_ == 0) {
    throw ValidationError("period hint must be positive");
  }
}

std::string_view to_string(AnomalyType kind) noexcept {
  switch (kind) {
    case AnomalyType::Point:
      return "point";
    case AnomalyType::Shapelet:
      return "shapelet";
    case AnomalyType::Seasonal:
      return "seasonal";
    case AnomalyType::Trend:
      return "trend";
  }
  return "point";
}

std::optional<AnomalyType> anomaly_type_from_string(std::string_view name) noexcept {
  for (auto kind : kAllAnomalyTypes) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

AnomalyInterval make_interval(std::size_t a, std::size_t b) noexcept {
  return a <= b ? AnomalyInterval{a, b} : AnomalyInterval{b, a};
}

std::size_t interval_length(const AnomalyInterval& iv) noexcept { return iv.end - iv.start + 1; }

std::size_t interval_overlap(const AnomalyInterval& a, const AnomalyInterval& b) noexcept {
  const auto lo = std::max(a.start, b.start);
  const auto hi = std::min(a.end, b.end);
  return lo <= hi ? hi - lo + 1 : 0;
}

std::vector<AnomalyInterval> labels_to_intervals(const LabelSeries& labels) {
  std::vector<AnomalyInterval> runs;
  const auto& flags = labels.flags();
  std::size_t t = 0;
  while (t < flags.size()) {
    if (!flags[t]) {
      ++t;
      continue;
    }
    const auto start = t;
    while (t < flags.size() && flags[t]) ++t;
    runs.push_back({start, t - 1});
  }
  return runs;
}

LabelSeries intervals_to_labels(std::span<const AnomalyInterval> intervals, std::size_t length) {
  std::vector<bool> flags(length, false);
  for (const auto& iv : intervals) {
    if (iv.start > iv.end || iv.end >= length) {
      throw ValidationError("interval (" + std::to_string(iv.start) + ", " +
                            std::to_string(iv.end) + ") outside [0, " +
                            std::to_string(length == 0 ? 0 : length - 1) + "]");
    }
    std::fill(flags.begin() + static_cast<std::ptrdiff_t>(iv.start),
              flags.begin() + static_cast<std::ptrdiff_t>(iv.end) + 1, true);
  }
  return LabelSeries(std::move(flags));
}

}  // namespace tama
