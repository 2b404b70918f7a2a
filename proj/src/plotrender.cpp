#include "tama/plotrender.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "tama/error.hpp"

namespace tama {
namespace {

// 5x7 bitmap glyphs, one 5-bit row per entry, most significant bit left.
struct Glyph {
  char ch;
  std::array<std::uint8_t, 7> rows;
};

constexpr std::array<Glyph, 14> kFont = {{
    {'0', {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110}},
    {'1', {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110}},
    {'2', {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111}},
    {'3', {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110}},
    {'4', {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010}},
    {'5', {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110}},
    {'6', {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110}},
    {'7', {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000}},
    {'8', {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110}},
    {'9', {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100}},
    {'-', {0b00000, 0b00000, 0b00000, 0b11111, 0b00000, 0b00000, 0b00000}},
    {'.', {0b00000, 0b00000, 0b00000, 0b00000, 0b00000, 0b01100, 0b01100}},
    {'e', {0b00000, 0b00000, 0b01110, 0b10001, 0b11111, 0b10000, 0b01110}},
    {'+', {0b00000, 0b00100, 0b00100, 0b11111, 0b00100, 0b00100, 0b00000}},
}};

constexpr std::size_t kGlyphW = 5;
constexpr std::size_t kGlyphH = 7;
constexpr std::size_t kAdvance = 6;
constexpr std::size_t kLabelChars = 8;

const Glyph* find_glyph(char c) {
  for (const auto& g : kFont) {
    if (g.ch == c) return &g;
  }
  return nullptr;
}

std::size_t text_width(std::string_view text, std::size_t s) {
  return text.empty() ? 0 : (text.size() * kAdvance - 1) * s;
}

void fill_rect(RgbImage& img, long x0, long y0, long x1, long y1, Rgb c) {
  x0 = std::max(x0, 0L);
  y0 = std::max(y0, 0L);
  x1 = std::min(x1, static_cast<long>(img.width) - 1);
  y1 = std::min(y1, static_cast<long>(img.height) - 1);
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) img.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c);
  }
}

void draw_text(RgbImage& img, long x, long y, std::string_view text, Rgb c, std::size_t s) {
  const auto scale = static_cast<long>(s);
  for (char ch : text) {
    if (const auto* g = find_glyph(ch)) {
      for (std::size_t row = 0; row < kGlyphH; ++row) {
        for (std::size_t col = 0; col < kGlyphW; ++col) {
          if ((g->rows[row] >> (kGlyphW - 1 - col)) & 1U) {
            const long px = x + static_cast<long>(col) * scale;
            const long py = y + static_cast<long>(row) * scale;
            fill_rect(img, px, py, px + scale - 1, py + scale - 1, c);
          }
        }
      }
    }
    x += static_cast<long>(kAdvance) * scale;
  }
}

// Bresenham with a square brush, clipped to the plot area.
void draw_line(RgbImage& img, long x0, long y0, long x1, long y1, std::size_t width, Rgb c,
               const PlotLayout& clip) {
  const long lo = -static_cast<long>((width - 1) / 2);
  const long hi = static_cast<long>(width / 2);
  auto stamp = [&](long x, long y) {
    fill_rect(img, std::max(x + lo, static_cast<long>(clip.left)),
              std::max(y + lo, static_cast<long>(clip.top)),
              std::min(x + hi, static_cast<long>(clip.right)),
              std::min(y + hi, static_cast<long>(clip.bottom)), c);
  };
  const long dx = std::abs(x1 - x0);
  const long dy = -std::abs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1;
  const long sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  while (true) {
    stamp(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

double nice_step(double raw) {
  const double exponent = std::floor(std::log10(raw));
  const double base = std::pow(10.0, exponent);
  const double fraction = raw / base;
  double nice = 10.0;
  if (fraction <= 1.0) {
    nice = 1.0;
  } else if (fraction <= 2.0) {
    nice = 2.0;
  } else if (fraction <= 5.0) {
    nice = 5.0;
  }
  return nice * base;
}

std::string format_tick(double value, double step) {
  const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
  if (std::abs(value) < step * 1e-6) value = 0.0;
  auto text = fmt::format("{:.{}f}", value, decimals);
  if (text.size() > kLabelChars) text = fmt::format("{:.2e}", value);
  return text;
}

struct Margins {
  std::size_t left, right, top, bottom;
};

Margins margins_for(const PlotConfig& cfg) {
  const auto s = cfg.scale;
  return {kLabelChars * kAdvance * s + 6 * s, 20 * s, 8 * s, kGlyphH * s + 9 * s};
}

}  // namespace

void validate(const PlotConfig& cfg) {
  if (cfg.width_px == 0 || cfg.height_px == 0) throw ConfigError("plot size must be positive");
  if (cfg.width_px > kMaxImageWidth || cfg.height_px > kMaxImageHeight) {
    throw ConfigError(fmt::format("plot size {}x{} exceeds the {}x{} cap", cfg.width_px, cfg.height_px,
                                  kMaxImageWidth, kMaxImageHeight));
  }
  if (cfg.x_tick_count < 2) throw ConfigError("x_tick_count must be at least 2");
  if (cfg.y_tick_target < 2) throw ConfigError("y_tick_target must be at least 2");
  if (cfg.scale == 0 || cfg.line_width == 0) throw ConfigError("scale and line_width must be positive");
  const auto m = margins_for(cfg);
  if (cfg.width_px < m.left + m.right + 2 * cfg.x_tick_count ||
      cfg.height_px < m.top + m.bottom + 4 * cfg.y_tick_target) {
    throw ConfigError(fmt::format("plot size {}x{} too small for scale {}", cfg.width_px, cfg.height_px,
                                  cfg.scale));
  }
}

PlotLayout compute_layout(const PlotConfig& cfg, AnomalyInterval domain) {
  validate(cfg);
  const auto m = margins_for(cfg);
  PlotLayout layout;
  layout.left = m.left;
  layout.right = cfg.width_px - 1 - m.right;
  layout.top = m.top;
  layout.bottom = cfg.height_px - 1 - m.bottom;

  const auto span = domain.end - domain.start;
  const auto n = cfg.x_tick_count;
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = domain.start + (i * span + (n - 1) / 2) / (n - 1);
    if (!layout.tick_indices.empty() && layout.tick_indices.back() == idx) continue;
    layout.tick_indices.push_back(idx);
  }
  const auto width = layout.right - layout.left;
  for (auto idx : layout.tick_indices) {
    const auto col = span == 0 ? layout.left + width / 2
                               : layout.left + ((idx - domain.start) * width + span / 2) / span;
    layout.tick_columns.push_back(col);
  }
  return layout;
}

RenderedImage render_values(std::span<const double> values, std::size_t first_index,
                            const PlotConfig& cfg) {
  if (values.empty()) throw ValidationError("cannot render an empty window");
  const AnomalyInterval domain{first_index, first_index + values.size() - 1};
  const auto layout = compute_layout(cfg, domain);
  const auto s = cfg.scale;
  RgbImage img(cfg.width_px, cfg.height_px, cfg.background);

  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(hi)))) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const auto plot_h = static_cast<double>(layout.bottom - layout.top);
  auto y_of = [&](double v) {
    return static_cast<long>(layout.bottom) - std::lround((v - lo) / (hi - lo) * plot_h);
  };
  const auto span = domain.end - domain.start;
  const auto plot_w = layout.right - layout.left;
  auto x_of = [&](std::size_t i) {
    return static_cast<long>(span == 0 ? layout.left + plot_w / 2
                                       : layout.left + (i * plot_w + span / 2) / span);
  };

  if (cfg.grid) {
    for (auto col : layout.tick_columns) {
      fill_rect(img, static_cast<long>(col), static_cast<long>(layout.top), static_cast<long>(col),
                static_cast<long>(layout.bottom), cfg.grid_color);
    }
  }

  for (std::size_t i = 1; i < values.size(); ++i) {
    draw_line(img, x_of(i - 1), y_of(values[i - 1]), x_of(i), y_of(values[i]), cfg.line_width,
              cfg.line_color, layout);
  }
  if (values.size() == 1) draw_line(img, x_of(0), y_of(values[0]), x_of(0), y_of(values[0]),
                                    cfg.line_width + 2, cfg.line_color, layout);

  const auto L = static_cast<long>(layout.left);
  const auto R = static_cast<long>(layout.right);
  const auto T = static_cast<long>(layout.top);
  const auto B = static_cast<long>(layout.bottom);
  const auto tick = static_cast<long>(3 * s);
  fill_rect(img, L - 1, T - 1, R + 1, T - 1, cfg.axis_color);
  fill_rect(img, L - 1, B + 1, R + 1, B + 1, cfg.axis_color);
  fill_rect(img, L - 1, T - 1, L - 1, B + 1, cfg.axis_color);
  fill_rect(img, R + 1, T - 1, R + 1, B + 1, cfg.axis_color);

  for (std::size_t i = 0; i < layout.tick_indices.size(); ++i) {
    const auto col = static_cast<long>(layout.tick_columns[i]);
    fill_rect(img, col, B + 2, col, B + 1 + tick, cfg.axis_color);
    const auto label = std::to_string(layout.tick_indices[i]);
    const auto w = static_cast<long>(text_width(label, s));
    const long x = std::clamp(col - w / 2, 0L, static_cast<long>(cfg.width_px) - w);
    draw_text(img, x, B + 2 + tick + static_cast<long>(2 * s), label, cfg.axis_color, s);
  }

  const double step = nice_step((hi - lo) / static_cast<double>(cfg.y_tick_target - 1));
  for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    const long y = y_of(v);
    if (y < T || y > B) continue;
    fill_rect(img, L - 1 - tick, y, L - 2, y, cfg.axis_color);
    const auto label = format_tick(v, step);
    const auto w = static_cast<long>(text_width(label, s));
    draw_text(img, L - 2 - tick - static_cast<long>(2 * s) - w,
              y - static_cast<long>(kGlyphH * s / 2), label, cfg.axis_color, s);
  }

  return {encode_png(img), domain, cfg};
}

RenderedImage render_window(const Window& window, const PlotConfig& cfg) {
  return render_values(window.values, 0, cfg);
}

AnomalyInterval zoom_domain(std::size_t series_length, const AnomalyInterval& region,
                            double margin_frac) {
  if (series_length == 0 || region.start > region.end || region.end >= series_length) {
    throw ValidationError(fmt::format("zoom region ({}, {}) outside series of length {}", region.start,
                                      region.end, series_length));
  }
  if (!(margin_frac >= 0.0) || !std::isfinite(margin_frac)) {
    throw ValidationError("zoom margin must be a non-negative number");
  }
  const auto m = static_cast<std::size_t>(
      std::ceil(margin_frac * static_cast<double>(interval_length(region)) - 1e-9));
  return {region.start > m ? region.start - m : 0, std::min(region.end + m, series_length - 1)};
}

RenderedImage render_zoom(const TimeSeries& series, const AnomalyInterval& region, double margin_frac,
                          const PlotConfig& cfg) {
  validate(cfg);
  const auto domain = zoom_domain(series.size(), region, margin_frac);
  return render_values(series.values().subspan(domain.start, interval_length(domain)), domain.start, cfg);
}

}  // namespace tama
