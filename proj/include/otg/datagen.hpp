#pragma once

#include <cstdint>
#include <vector>

#include "otg/core.hpp"
#include "otg/image.hpp"

namespace otg {

// Synthetic inputs used throughout the tests and the command line tool.  All
// generators are deterministic in their arguments (and seed, where they take
// one).

struct LinesDataset {
  std::vector<Image> images;           // one per point, same order
  DiscreteMeasure<double> measure;     // feature = line column, attrs carry it too
};

// n images of size x size, white background, one black vertical line per
// image.  Line k sits at column floor(k * size / n).  Style 'A' draws the
// line one pixel wide, style 'B' two pixels wide (clipped at the right edge).
// The k-th point's feature vector is [column]; its attrs store the column in
// `angle` (valid for size <= 360) and the line color in `color`.
LinesDataset gen_vertical_lines(Index n, int size, char style);

// n equally spaced scalars from lo to hi inclusive, uniform weights.
DiscreteMeasure<double> gen_interval(double lo, double hi, Index n);

// How a scalar attribute is drawn.
struct AttributeLaw {
  enum class Kind { Uniform, Gaussian };
  Kind kind = Kind::Uniform;
  double a = 0.0;  // lower bound, or mean
  double b = 1.0;  // upper bound, or standard deviation

  static AttributeLaw uniform(double lo, double hi) {
    return {Kind::Uniform, lo, hi};
  }
  static AttributeLaw gaussian(double mean, double sd) {
    return {Kind::Gaussian, mean, sd};
  }
};

// n points in R^d (d >= 2) with an angle and a grayscale color attribute per
// point.  feature[0] = angle / 360, feature[1] = color / 255, remaining
// coordinates are Gaussian noise with standard deviation noise_sd.  Angles
// are wrapped into [0, 360), colors clamped to [0, 255].
DiscreteMeasure<double> gen_attributed_clusters(Index n, Index d,
                                                const AttributeLaw& angle_law,
                                                const AttributeLaw& color_law,
                                                std::uint64_t seed,
                                                double noise_sd = 0.02);

}  // namespace otg
