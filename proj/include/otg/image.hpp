#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "otg/types.hpp"

namespace otg {

// 8-bit RGB raster, row-major, three bytes per pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, std::array<int, 3> fill = {{255, 255, 255}})
      : width(w), height(h) {
    if (w < 1 || h < 1) throw ValueError("Image: size must be positive");
    pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      pixels[i] = static_cast<std::uint8_t>(fill[i % 3]);
    }
  }

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                   static_cast<std::size_t>(x)) *
                      3 +
                  static_cast<std::size_t>(c)];
  }
  std::uint8_t at(int x, int y, int c) const {
    return const_cast<Image*>(this)->at(x, y, c);
  }

  // Background convention: a pixel belongs to the background when every
  // channel is at least 250.
  bool background(int x, int y) const {
    return at(x, y, 0) >= 250 && at(x, y, 1) >= 250 && at(x, y, 2) >= 250;
  }
};

// Binary PPM (P6, maxval 255).  Loading and re-writing a file produced by
// write_ppm reproduces it byte for byte.
Image load_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

// sRGB (8-bit, IEC 61966-2-1 decoding) to CIELAB under D65.
inline std::array<double, 3> rgb_to_lab(int r, int g, int b) {
  for (int v : {r, g, b}) {
    if (v < 0 || v > 255) {
      throw ValueError("rgb_to_lab: channel " + std::to_string(v) +
                       " outside [0, 255]");
    }
  }
  auto decode = [](int v) {
    const double c = static_cast<double>(v) / 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double rl = decode(r), gl = decode(g), bl = decode(b);
  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
  auto f = [](double t) {
    const double delta = 6.0 / 29.0;
    return t > delta * delta * delta
               ? std::cbrt(t)
               : t / (3.0 * delta * delta) + 4.0 / 29.0;
  };
  const double fx = f(x / 0.95047), fy = f(y / 1.0), fz = f(z / 1.08883);
  return {{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)}};
}

}  // namespace otg
