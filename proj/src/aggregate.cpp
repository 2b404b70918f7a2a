#include "tama/aggregate.hpp"

#include <algorithm>
#include <array>

namespace tama {

Detection to_global(const Detection& d, std::size_t window_start, std::size_t length) {
  Detection out = d;
  const auto last = length == 0 ? 0 : length - 1;
  out.interval.start = std::min(d.interval.start + window_start, last);
  out.interval.end = std::min(d.interval.end + window_start, last);
  return out;
}

Accumulated accumulate(std::span<const WindowAnalysis> analyses, std::size_t length, VoteMode vote) {
  constexpr auto kTypes = kAllAnomalyTypes.size();
  // Difference arrays: one for the total, one per type for the vote.
  std::vector<long long> total(length + 1, 0);
  std::vector<std::array<long long, kTypes>> per_type(length + 1);
  for (auto& row : per_type) row.fill(0);

  for (const auto& analysis : analyses) {
    for (const auto& d : analysis.detections) {
      const auto g = to_global(d, analysis.window_start, length);
      if (length == 0) continue;
      total[g.interval.start] += d.confidence;
      total[g.interval.end + 1] -= d.confidence;
      const auto weight = vote == VoteMode::raw_count ? 1 : d.confidence;
      const auto k = static_cast<std::size_t>(g.kind);
      per_type[g.interval.start][k] += weight;
      per_type[g.interval.end + 1][k] -= weight;
    }
  }

  Accumulated out{ConfidenceSequence(length, 0), ClassSequence(length)};
  long long running = 0;
  std::array<long long, kTypes> votes{};
  for (std::size_t t = 0; t < length; ++t) {
    running += total[t];
    for (std::size_t k = 0; k < kTypes; ++k) votes[k] += per_type[t][k];
    out.confidence[t] = static_cast<int>(running);
    if (running > 0) {
      const auto best = std::max_element(votes.begin(), votes.end());
      out.classes[t] = kAllAnomalyTypes[static_cast<std::size_t>(best - votes.begin())];
    }
  }
  return out;
}

std::vector<bool> threshold(std::span<const int> confidence, double c0) {
  std::vector<bool> mask(confidence.size());
  for (std::size_t t = 0; t < confidence.size(); ++t) mask[t] = confidence[t] >= c0;
  return mask;
}

FinalResult aggregate(std::span<const WindowAnalysis> analyses, std::size_t length, double c0, VoteMode vote) {
  auto acc = accumulate(analyses, length, vote);
  FinalResult result;
  result.anomaly_points = threshold(acc.confidence, c0);
  result.c0 = c0;
  result.confidence = std::move(acc.confidence);
  result.classes = std::move(acc.classes);
  for (const auto& analysis : analyses) {
    for (const auto& d : analysis.detections) {
      const auto g = to_global(d, analysis.window_start, length);
      result.provenance.push_back({analysis.window_index, d.interval, g.interval, d.confidence, d.kind,
                                   d.explanation.empty() ? analysis.abnormal_description : d.explanation});
    }
  }
  return result;
}

}  // namespace tama
