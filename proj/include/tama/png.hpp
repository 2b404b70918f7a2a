#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tama {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, row-major.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h, Rgb fill);

  [[nodiscard]] Rgb at(std::size_t x, std::size_t y) const {
    const auto i = (y * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(std::size_t x, std::size_t y, Rgb c) {
    const auto i = (y * width + x) * 3;
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }
};

[[nodiscard]] std::vector<std::uint8_t> encode_png(const RgbImage& image);
/// Decodes any 8-bit PNG to RGB; throws tama::Error on malformed input.
[[nodiscard]] RgbImage decode_png(std::span<const std::uint8_t> bytes);

}  // namespace tama
