#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tama/core.hpp"

namespace tama {

/// Outcome of the analyzing stage (and optional self-reflection) for one
/// window. Detection intervals are window-local.
struct WindowAnalysis {
  std::size_t window_index = 0;
  std::size_t window_start = 0;
  std::size_t window_length = 0;

  std::vector<Detection> detections;
  std::string abnormal_description;
  std::string abnormal_type_description;
  std::string raw_response;
  std::vector<std::string> diagnostics;

  /// True when no usable response was obtained; detections are then empty.
  bool failed = false;
  std::string error;

  bool reflected = false;
  /// Detections before self-reflection replaced them.
  std::vector<Detection> pre_reflection;
  std::string reflection_raw;
  std::string reflection_error;
};

struct ReferenceSummary {
  std::string normal_pattern;
  std::vector<std::string> source_image_ids;
  /// True when the reference stage did not run (n_r = 0 or no source).
  bool skipped = false;
};

}  // namespace tama
