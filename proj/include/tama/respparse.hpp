#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tama/core.hpp"

namespace tama {

/// Maps model-facing labels onto the canonical taxonomy, case-insensitively.
class LabelMap {
 public:
  /// global, contextual, point -> Point; frequency, seasonal -> Seasonal;
  /// trend -> Trend; shapelet -> Shapelet.
  LabelMap();

  void set(std::string_view label, AnomalyType kind);
  /// nullopt means the label is unknown.
  [[nodiscard]] std::optional<AnomalyType> lookup(std::string_view label) const;

 private:
  std::map<std::string, AnomalyType, std::less<>> map_;
};

[[nodiscard]] const LabelMap& default_label_map();

/// normalize_label with the default map; nullopt signals an unknown label.
[[nodiscard]] std::optional<AnomalyType> normalize_label(std::string_view label);

/// The label the prompts ask for: global, shapelet, frequency, trend.
[[nodiscard]] std::string_view prompt_label(AnomalyType kind) noexcept;

struct IndexListResult {
  std::vector<Detection> detections;
  std::vector<std::string> diagnostics;
};

/// Parses "[(s, e)/c/label, (i)/c/label, ...]". Never throws: indices are
/// swapped or clamped into [0, window_length - 1] with a diagnostic, entries
/// with an out-of-range confidence, unknown label or bad syntax are dropped
/// with a diagnostic.
[[nodiscard]] IndexListResult parse_index_list(std::string_view text, std::size_t window_length,
                                               const LabelMap& labels = default_label_map());

/// Inverse of parse_index_list for in-range detections.
[[nodiscard]] std::string serialize_index_list(std::span<const Detection> detections);

struct AnalysisFields {
  std::vector<Detection> detections;
  std::string abnormal_description;
  std::string abnormal_type_description;
  std::vector<std::string> diagnostics;
  /// "abnormal_index" or "corrected_abnormal_index".
  std::string index_key;
};

/// Parses the JSON object returned by the analyzing or self-reflection
/// prompt. A single fenced code block around the JSON is tolerated.
/// Throws ResponseParseError (carrying the raw text) when the text is not
/// a JSON object or has no index key.
[[nodiscard]] AnalysisFields parse_analysis(std::string_view text, std::size_t window_length,
                                            const LabelMap& labels = default_label_map());

/// Returns `normal_pattern` from a reference-learning response.
[[nodiscard]] std::string parse_normal_pattern(std::string_view text);

}  // namespace tama
