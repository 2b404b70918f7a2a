#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tama/core.hpp"
#include "tama/png.hpp"
#include "tama/preprocess.hpp"

namespace tama {

inline constexpr std::size_t kMaxImageWidth = 2000;
inline constexpr std::size_t kMaxImageHeight = 768;

struct PlotConfig {
  std::size_t width_px = 1600;
  std::size_t height_px = 600;
  /// Vertical auxiliary lines at every x tick.
  bool grid = true;
  std::size_t x_tick_count = 11;
  std::size_t y_tick_target = 7;
  /// Integer magnification of the bitmap font and tick marks.
  std::size_t scale = 2;
  std::size_t line_width = 2;
  Rgb line_color{31, 119, 180};
  Rgb background{255, 255, 255};
  Rgb grid_color{200, 200, 200};
  Rgb axis_color{0, 0, 0};
};

/// Throws ConfigError when the config is unusable or exceeds 2000x768.
void validate(const PlotConfig& cfg);

struct RenderedImage {
  std::vector<std::uint8_t> png;
  /// First and last x-axis label shown.
  AnomalyInterval domain;
  PlotConfig config;
};

/// Pixel geometry of a plot; exposed so callers and tests can locate the
/// plotting area and gridline columns.
struct PlotLayout {
  std::size_t left = 0, right = 0, top = 0, bottom = 0;  // inclusive plot area
  std::vector<std::size_t> tick_indices;                // x labels
  std::vector<std::size_t> tick_columns;                // pixel column per tick
};

[[nodiscard]] PlotLayout compute_layout(const PlotConfig& cfg, AnomalyInterval domain);

/// Plots `values` with x labels first_index .. first_index + n - 1.
[[nodiscard]] RenderedImage render_values(std::span<const double> values, std::size_t first_index,
                                          const PlotConfig& cfg);

/// Window plot with window-local x labels 0 .. L_w - 1.
[[nodiscard]] RenderedImage render_window(const Window& window, const PlotConfig& cfg);

/// [start - m, end + m] clamped to the series, m = ceil(margin_frac * length(region)).
[[nodiscard]] AnomalyInterval zoom_domain(std::size_t series_length, const AnomalyInterval& region,
                                          double margin_frac);

/// Zoomed plot around `region`; x labels are indices of `series`.
[[nodiscard]] RenderedImage render_zoom(const TimeSeries& series, const AnomalyInterval& region,
                                        double margin_frac, const PlotConfig& cfg);

}  // namespace tama
