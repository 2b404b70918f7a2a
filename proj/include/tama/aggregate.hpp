#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tama/analysis.hpp"
#include "tama/core.hpp"

namespace tama {

/// Pointwise summed confidence; doubles as the anomaly score.
using ConfidenceSequence = std::vector<int>;
/// Voted anomaly type, defined exactly where the confidence is positive.
using ClassSequence = TypeMap;

enum class VoteMode { confidence_weighted, raw_count };

/// Shifts a window-local detection by `window_start`, clamping to [0, T-1].
[[nodiscard]] Detection to_global(const Detection& d, std::size_t window_start, std::size_t length);

struct Accumulated {
  ConfidenceSequence confidence;
  ClassSequence classes;
};

/// Sums confidences of every covering detection and votes the type per
/// point. Ties go to the earlier AnomalyType enumerator.
[[nodiscard]] Accumulated accumulate(std::span<const WindowAnalysis> analyses, std::size_t length,
                                     VoteMode vote = VoteMode::confidence_weighted);

/// { t : confidence[t] >= c0 } as a mask.
[[nodiscard]] std::vector<bool> threshold(std::span<const int> confidence, double c0);

struct Provenance {
  std::size_t window_index = 0;
  AnomalyInterval local;
  AnomalyInterval global;
  int confidence = 0;
  AnomalyType kind = AnomalyType::Point;
  std::string explanation;
};

struct FinalResult {
  std::vector<bool> anomaly_points;
  double c0 = 1.0;
  ConfidenceSequence confidence;
  ClassSequence classes;
  std::vector<Provenance> provenance;
};

[[nodiscard]] FinalResult aggregate(std::span<const WindowAnalysis> analyses, std::size_t length,
                                    double c0 = 1.0, VoteMode vote = VoteMode::confidence_weighted);

}  // namespace tama
