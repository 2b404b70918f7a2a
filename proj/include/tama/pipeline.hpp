#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tama/analysis.hpp"
#include "tama/core.hpp"
#include "tama/gateway.hpp"
#include "tama/plotrender.hpp"
#include "tama/preprocess.hpp"
#include "tama/prompts.hpp"

namespace tama {

struct PipelineConfig {
  /// Number of reference images; 0 skips reference learning.
  std::size_t n_r = 3;
  /// Window width and stride. When unset they follow default_sizing.
  std::optional<std::size_t> window;
  std::optional<std::size_t> stride;
  double overlap = 0.5;
  std::size_t window_periods = 3;

  bool reflection = true;
  double zoom_margin = 0.25;
  /// Also attach the reference images to self-reflection requests.
  bool reflection_resend_reference_images = false;

  PlotConfig plot;
  std::uint64_t seed = 0;
  /// Concurrent windows per series.
  std::size_t max_parallel = 4;
  /// Extra attempts after a response fails to parse.
  std::size_t parse_retries = 1;

  double temperature = 0.1;
  double top_p = 0.3;
  bool json_mode = true;
  std::string model = std::string(kDefaultModel);
  PromptSet prompts = builtin_prompts();

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Where anomaly-free reference windows come from.
struct ReferenceSource {
  /// Windows lying entirely in [0, train_split) are eligible.
  std::optional<std::size_t> train_split;
  /// Separate normal series, used when no train split is given.
  std::vector<TimeSeries> external;
};

/// Receives every rendered image: "<k>", "<k>_zoom_<i>" or "ref_<i>".
/// Called from worker threads, one call at a time.
using ImageSink = std::function<void(const std::string& id, const RenderedImage& image)>;

struct PipelineRun {
  std::string series;
  std::size_t length = 0;
  WindowPlan plan;
  ReferenceSummary reference;
  /// Ordered by window index.
  std::vector<WindowAnalysis> windows;
};

/// Resolves the window width and stride for a series of `length`.
[[nodiscard]] WindowSizing resolve_sizing(const PipelineConfig& cfg, std::size_t length,
                                          std::optional<std::size_t> period_hint);

/// Sends the reference prompt with every image in one request.
[[nodiscard]] ReferenceSummary learn_references(std::span<const RenderedImage> images,
                                                std::vector<std::string> image_ids, ChatBackend& backend,
                                                const PipelineConfig& cfg, const std::string& series);

/// Placeholder summary used when reference learning is skipped.
[[nodiscard]] ReferenceSummary skipped_reference();

/// Analyzing stage for one window. Gateway and parse failures are recorded
/// in the result; ConfigError and ReplayMissError propagate.
[[nodiscard]] WindowAnalysis analyze_window(const Window& window, const RenderedImage& image,
                                            const ReferenceSummary& summary, ChatBackend& backend,
                                            const PipelineConfig& cfg, const std::string& series);

/// Self-reflection for a window with at least one prior detection. On
/// failure the prior detections are kept and the error recorded.
[[nodiscard]] WindowAnalysis reflect(const Window& window, const WindowAnalysis& prior,
                                     const RenderedImage& image, const ReferenceSummary& summary,
                                     std::span<const RenderedImage> reference_images, ChatBackend& backend,
                                     const PipelineConfig& cfg, const std::string& series,
                                     const ImageSink& sink = {});

/// Normalize, window, learn references, analyze and reflect every window.
[[nodiscard]] PipelineRun run(const TimeSeries& series, const PipelineConfig& cfg, ChatBackend& backend,
                              const ReferenceSource& source = {}, const ImageSink& sink = {});

}  // namespace tama
