#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tama/aggregate.hpp"
#include "tama/gateway.hpp"
#include "tama/http_backend.hpp"
#include "tama/oracle.hpp"
#include "tama/pipeline.hpp"
#include "tama/report.hpp"
#include "tama/synthgen.hpp"

namespace tama::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

struct RunConfig {
  std::string backend = "oracle";  // oracle | http
  std::string cache = "off";       // off | record | read_through | replay
  std::filesystem::path manifest;
  std::filesystem::path output_dir = "tama_out";
  /// Empty: $TAMA_CACHE_DIR, else <output_dir>/cache.
  std::filesystem::path cache_dir;

  HttpBackendConfig http;
  PipelineConfig pipeline;
  std::filesystem::path prompt_dir;

  double c0 = 1.0;
  std::vector<double> alpha_grid = default_alpha_grid();
  VoteMode vote = VoteMode::confidence_weighted;
  std::size_t parallel_series = 1;
  bool write_images = true;
  std::vector<std::filesystem::path> reference_files;

  OracleFidelity oracle;
};

using Override = std::pair<std::string, std::string>;

/// Every known key, in snapshot order.
[[nodiscard]] std::vector<std::string> config_keys();

/// Sets one key from its text form. Throws ConfigError for unknown keys or
/// unparseable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Defaults, then the flat YAML file (if any), then overrides in order.
[[nodiscard]] RunConfig load_config(const std::optional<std::filesystem::path>& file,
                                    const std::vector<Override>& overrides = {});

/// Every key with its effective value, as text.
[[nodiscard]] std::vector<Override> snapshot(const RunConfig& cfg);
[[nodiscard]] std::string snapshot_yaml(const RunConfig& cfg);
/// The keys that influence model requests, as recorded in Z_raw.
[[nodiscard]] report::Json pipeline_snapshot(const RunConfig& cfg);

[[nodiscard]] std::filesystem::path resolve_cache_dir(const RunConfig& cfg);
/// Directory name for a series: characters outside [A-Za-z0-9._-] become '_'.
[[nodiscard]] std::string series_dir_name(const std::string& name);

struct SeriesStatus {
  std::string name;
  bool ok = false;
  std::string error;
  std::size_t windows = 0;
  std::size_t failed_windows = 0;
  std::size_t detections = 0;
};

struct DetectOutcome {
  int exit_code = kExitOk;
  std::vector<SeriesStatus> series;
  std::size_t live_calls = 0;
  std::size_t cache_hits = 0;
};

/// Runs the pipeline for every manifest entry and writes
/// <output_dir>/<series>/{z_raw.json,result.json,*.png}, summary.json and
/// config.yaml. `backend` replaces the configured model backend (the cache
/// still wraps it). ConfigError propagates.
[[nodiscard]] DetectOutcome run_detect(const RunConfig& cfg, std::shared_ptr<ChatBackend> backend = nullptr);

struct EvalOptions {
  std::filesystem::path results_dir;
  /// Default: the manifest recorded in the run's config.yaml.
  std::optional<std::filesystem::path> manifest;
  std::optional<std::vector<double>> alpha_grid;
  std::optional<double> c0;
  /// Default: <results_dir>/eval.
  std::optional<std::filesystem::path> output_dir;
};

struct EvalOutcome {
  int exit_code = kExitOk;
  std::vector<report::SeriesEval> series;
  std::vector<std::string> problems;
  std::filesystem::path output_dir;
};

/// Scores each series' result.json against its labels and writes
/// report.json, report.txt and pat.csv.
[[nodiscard]] EvalOutcome run_eval(const EvalOptions& options);

struct GenSynthOptions {
  std::filesystem::path output_dir;
  synth::SuiteConfig suite;
  /// YAML with suite keys or an explicit `series:` list.
  std::optional<std::filesystem::path> spec;
};

/// Writes the dataset and <output_dir>/manifest.yaml; returns the manifest path.
std::filesystem::path run_gen_synth(const GenSynthOptions& options);

/// Renders every window of a series into `output_dir`; returns the image count.
std::size_t run_render(const RunConfig& cfg, const TimeSeries& series, const std::filesystem::path& output_dir);

}  // namespace tama::cli
