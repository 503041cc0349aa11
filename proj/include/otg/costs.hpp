#pragma once

#include <array>
#include <optional>
#include <string>

#include <json.hpp>

#include "otg/core.hpp"
#include "otg/histogram.hpp"
#include "otg/image.hpp"

namespace otg {

enum class CostKind {
  SqEuclidean,
  Angle,
  AvgColor,
  Combined,
  HistogramWasserstein,
};

enum class AngleMode { Circular, Linear };

// Which ground cost a cost matrix is built from, plus that cost's knobs.
struct CostSpec {
  CostKind kind = CostKind::SqEuclidean;
  // Azimuth angles are periodic, so circular is the default; linear keeps
  // the raw difference for comparison.
  AngleMode angle_mode = AngleMode::Circular;
  // Weight of the color term in the combined cost.  Deliberately without a
  // default: callers must choose one.
  std::optional<double> lambda_color;
  int histogram_bins = 8;
  InnerSolverSpec inner;

  // Stable identifier for caches and provenance records.
  std::string canonical_id() const;

  static CostSpec from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

std::string cost_kind_name(CostKind kind);
CostKind cost_kind_from_name(const std::string& name);

// ---- pointwise costs ----------------------------------------------------

// Sum of squared coordinate differences.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar sq_euclidean(const Eigen::MatrixBase<DerivedU>& u,
                                       const Eigen::MatrixBase<DerivedV>& v) {
  if (u.size() != v.size()) {
    throw DimensionError("sq_euclidean: vectors have sizes " +
                         std::to_string(u.size()) + " and " +
                         std::to_string(v.size()));
  }
  return (u - v).squaredNorm();
}

// Squared difference of two azimuth angles in degrees.  Circular mode
// measures along the shorter arc, so the result is at most 180^2 = 32400.
double angle_cost(double a, double b, AngleMode mode);

// Euclidean distance between two RGB triples.
double color_distance(const std::array<int, 3>& a, const std::array<int, 3>& b);

// Euclidean distance between the mean RGB of the non-background pixels of
// two images (background: all channels >= 250).
double avg_color_distance(const Image& img_a, const Image& img_b);

// angle_cost(x.angle, y.angle) + lambda_color * color_distance(x.color,
// y.color).  Both points must carry both attributes.
double combined_cost(const PointAttrs& x, const PointAttrs& y,
                     double lambda_color, AngleMode mode = AngleMode::Circular);

// ---- matrix assembly ----------------------------------------------------

// Pairwise costs between the two supports.  Rows may be evaluated in
// parallel; the thread count is capped by the OTGUIDE_THREADS environment
// variable.  The histogram kind needs a cache to resolve image ids, so it is
// only available through the second overload.
CostMatrix<double> cost_matrix(const DiscreteMeasure<double>& mu,
                               const DiscreteMeasure<double>& nu,
                               const CostSpec& spec);

CostMatrix<double> cost_matrix(const DiscreteMeasure<double>& mu,
                               const DiscreteMeasure<double>& nu,
                               const CostSpec& spec, HistogramCache& cache);

}  // namespace otg
