#include "otg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "otg/rng.hpp"

namespace otg {

namespace {

std::string padded_id(const char* prefix, Index i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, static_cast<int>(i));
  return buf;
}

}  // namespace

LinesDataset gen_vertical_lines(Index n, int size, char style) {
  if (n < 1) throw ValueError("gen_vertical_lines: n must be positive");
  if (size < 2) throw ValueError("gen_vertical_lines: size must be at least 2");
  if (style != 'A' && style != 'B') {
    throw ValueError(std::string("gen_vertical_lines: unknown style '") + style +
                     "', expected 'A' or 'B'");
  }
  const int width = style == 'A' ? 1 : 2;
  const char* prefix = style == 'A' ? "a" : "b";

  std::vector<Image> images;
  images.reserve(static_cast<std::size_t>(n));
  MatrixX<double> points(n, 1);
  std::vector<PointAttrs> attrs(static_cast<std::size_t>(n));

  for (Index k = 0; k < n; ++k) {
    const int col = static_cast<int>(k * size / n);
    Image img(size, size);
    for (int y = 0; y < size; ++y) {
      for (int w = 0; w < width; ++w) {
        const int x = std::min(col + w, size - 1);
        img.at(x, y, 0) = 0;
        img.at(x, y, 1) = 0;
        img.at(x, y, 2) = 0;
      }
    }
    images.push_back(std::move(img));
    points(k, 0) = static_cast<double>(col);
    PointAttrs& a = attrs[static_cast<std::size_t>(k)];
    a.id = padded_id(prefix, k, 3);
    if (col < 360) a.angle = static_cast<double>(col);
    a.color = {{0, 0, 0}};
  }
  return LinesDataset{std::move(images),
                      DiscreteMeasure<double>::uniform(std::move(points),
                                                       std::move(attrs))};
}

DiscreteMeasure<double> gen_interval(double lo, double hi, Index n) {
  if (n < 1) throw ValueError("gen_interval: n must be positive");
  if (!(hi >= lo)) throw ValueError("gen_interval: need hi >= lo");
  MatrixX<double> points(n, 1);
  for (Index k = 0; k < n; ++k) {
    points(k, 0) =
        n == 1 ? lo
               : lo + (hi - lo) * static_cast<double>(k) /
                          static_cast<double>(n - 1);
  }
  return DiscreteMeasure<double>::uniform(std::move(points));
}

namespace {

double draw_law(Rng& rng, const AttributeLaw& law) {
  switch (law.kind) {
    case AttributeLaw::Kind::Uniform:
      if (!(law.b > law.a)) {
        throw ValueError("AttributeLaw: uniform law needs b > a");
      }
      return rng.uniform(law.a, law.b);
    case AttributeLaw::Kind::Gaussian:
      if (!(law.b >= 0)) {
        throw ValueError("AttributeLaw: gaussian law needs sd >= 0");
      }
      return rng.gauss(law.a, law.b);
  }
  throw ValueError("AttributeLaw: unknown kind");
}

}  // namespace

DiscreteMeasure<double> gen_attributed_clusters(Index n, Index d,
                                                const AttributeLaw& angle_law,
                                                const AttributeLaw& color_law,
                                                std::uint64_t seed,
                                                double noise_sd) {
  if (n < 1) throw ValueError("gen_attributed_clusters: n must be positive");
  if (d < 2) {
    throw ValueError(
        "gen_attributed_clusters: need d >= 2 for the angle and color "
        "coordinates");
  }
  if (!(noise_sd >= 0)) {
    throw ValueError("gen_attributed_clusters: noise_sd must be non-negative");
  }
  Rng rng(seed);
  MatrixX<double> points(n, d);
  std::vector<PointAttrs> attrs(static_cast<std::size_t>(n));

  for (Index i = 0; i < n; ++i) {
    double angle = std::fmod(draw_law(rng, angle_law), 360.0);
    if (angle < 0) angle += 360.0;
    // fmod can return exactly 360.0 - eps rounding back up; keep the invariant.
    if (angle >= 360.0) angle = 0.0;

    const double color_raw = draw_law(rng, color_law);
    const int color =
        static_cast<int>(std::clamp(std::lround(color_raw), 0l, 255l));

    points(i, 0) = angle / 360.0;
    points(i, 1) = static_cast<double>(color) / 255.0;
    for (Index k = 2; k < d; ++k) points(i, k) = rng.gauss(0.0, noise_sd);

    PointAttrs& a = attrs[static_cast<std::size_t>(i)];
    a.id = padded_id("c", i, 4);
    a.angle = angle;
    a.color = {{color, color, color}};
  }
  return DiscreteMeasure<double>::uniform(std::move(points), std::move(attrs));
}

}  // namespace otg
