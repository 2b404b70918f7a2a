#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tama {

/// A univariate series. Always non-empty with finite values.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> values, std::string name = {},
             std::optional<std::size_t> period_hint = std::nullopt);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t t) const { return values_[t]; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::optional<std::size_t> period_hint() const noexcept { return period_hint_; }

  [[nodiscard]] TimeSeries with_values(std::vector<double> values) const {
    return TimeSeries(std::move(values), name_, period_hint_);
  }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> values_;
  std::string name_;
  std::optional<std::size_t> period_hint_;
};

/// Per-point ground-truth anomaly flags.
class LabelSeries {
 public:
  LabelSeries() = default;
  explicit LabelSeries(std::vector<bool> flags) : flags_(std::move(flags)) {}

  [[nodiscard]] const std::vector<bool>& flags() const noexcept { return flags_; }
  [[nodiscard]] std::size_t size() const noexcept { return flags_.size(); }
  [[nodiscard]] bool operator[](std::size_t t) const { return flags_[t]; }

  friend bool operator==(const LabelSeries&, const LabelSeries&) = default;

 private:
  std::vector<bool> flags_;
};

/// Canonical anomaly taxonomy. The declaration order is also the
/// tie-break order used by classification voting.
enum class AnomalyType { Point, Shapelet, Seasonal, Trend };

inline constexpr std::array<AnomalyType, 4> kAllAnomalyTypes = {
    AnomalyType::Point, AnomalyType::Shapelet, AnomalyType::Seasonal, AnomalyType::Trend};

[[nodiscard]] std::string_view to_string(AnomalyType kind) noexcept;
/// Parses the canonical lower-case name ("point", "shapelet", ...).
[[nodiscard]] std::optional<AnomalyType> anomaly_type_from_string(std::string_view name) noexcept;

/// Inclusive index pair; start <= end.
struct AnomalyInterval {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const AnomalyInterval&, const AnomalyInterval&) = default;
  friend auto operator<=>(const AnomalyInterval&, const AnomalyInterval&) = default;
};

/// Builds an interval, swapping the endpoints if given in reverse order.
[[nodiscard]] AnomalyInterval make_interval(std::size_t a, std::size_t b) noexcept;

struct Detection {
  AnomalyInterval interval;
  int confidence = 1;  // 1..4
  AnomalyType kind = AnomalyType::Point;
  std::string explanation;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Per-point anomaly type map; nullopt where the point is normal.
using TypeMap = std::vector<std::optional<AnomalyType>>;

[[nodiscard]] std::size_t interval_length(const AnomalyInterval& iv) noexcept;
[[nodiscard]] std::size_t interval_overlap(const AnomalyInterval& a, const AnomalyInterval& b) noexcept;

/// Maximal runs of true flags, sorted by start.
[[nodiscard]] std::vector<AnomalyInterval> labels_to_intervals(const LabelSeries& labels);
/// Inverse of labels_to_intervals. Intervals must lie in [0, length-1].
[[nodiscard]] LabelSeries intervals_to_labels(std::span<const AnomalyInterval> intervals,
                                              std::size_t length);

}  // namespace tama
