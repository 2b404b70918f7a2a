#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tama/aggregate.hpp"
#include "tama/metrics.hpp"
#include "tama/pipeline.hpp"

namespace tama::report {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kZRawSchema = "tama.z_raw/1";
inline constexpr std::string_view kResultSchema = "tama.result/1";
inline constexpr std::string_view kEvalSchema = "tama.eval/1";

[[nodiscard]] Json detection_json(const Detection& d);
[[nodiscard]] Detection detection_from_json(const nlohmann::json& j);

/// Per-window analyses with raw responses and the run configuration.
/// Contains nothing time- or host-dependent, so replays reproduce it exactly.
[[nodiscard]] Json z_raw_json(const PipelineRun& run, const Json& config);
/// Window analyses back from a Z_raw document.
[[nodiscard]] std::vector<WindowAnalysis> analyses_from_z_raw(const nlohmann::json& j);

/// Final anomaly set, run-length encoded sequences and provenance.
[[nodiscard]] Json result_json(const std::string& series, const FinalResult& result);

struct StoredResult {
  std::string series;
  double c0 = 1.0;
  ConfidenceSequence confidence;
  ClassSequence classes;
  std::vector<bool> anomaly_points;
};
[[nodiscard]] StoredResult parse_result(const nlohmann::json& j);

struct SeriesEval {
  std::string name;
  EvalReport report;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double max = 0.0;
};
[[nodiscard]] Summary summarize(std::span<const double> values);

/// Headline metrics per series, in report order.
[[nodiscard]] std::vector<std::pair<std::string, double>> headline(const EvalReport& r);

[[nodiscard]] Json eval_json(std::span<const SeriesEval> series, double c0, std::span<const double> alphas);
[[nodiscard]] std::string eval_text(std::span<const SeriesEval> series);
[[nodiscard]] std::string pat_csv(std::span<const SeriesEval> series);

/// JSON text with two-space indent and a trailing newline.
[[nodiscard]] std::string dump(const Json& j);
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace tama::report
