#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otg/types.hpp"

namespace otg {

// Optional per-point metadata carried alongside the feature vector.
struct PointAttrs {
  std::string id;
  std::optional<double> angle;              // degrees, in [0, 360)
  std::optional<std::array<int, 3>> color;  // RGB, each channel in [0, 255]
};

namespace detail {

template <typename Scalar>
inline Scalar weight_sum_tolerance() {
  // Measures are meant to be built in double; the float instantiation only
  // exists for arithmetic on already-validated data, so it gets a tolerance
  // its precision can actually meet.
  return std::is_same_v<Scalar, float> ? Scalar(1e-5) : Scalar(1e-12);
}

inline void check_attrs(const std::vector<PointAttrs>& attrs, Index n) {
  if (!attrs.empty() && static_cast<Index>(attrs.size()) != n) {
    throw DimensionError("DiscreteMeasure: attrs size " +
                         std::to_string(attrs.size()) + " does not match " +
                         std::to_string(n) + " points");
  }
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const PointAttrs& a = attrs[i];
    if (a.angle) {
      const double ang = *a.angle;
      if (!std::isfinite(ang) || ang < 0.0 || ang >= 360.0) {
        throw ValueError("DiscreteMeasure: angle of point " +
                         std::to_string(i) + " must lie in [0, 360), got " +
                         std::to_string(ang));
      }
    }
    if (a.color) {
      for (int c : *a.color) {
        if (c < 0 || c > 255) {
          throw ValueError("DiscreteMeasure: color channel of point " +
                           std::to_string(i) + " must lie in [0, 255], got " +
                           std::to_string(c));
        }
      }
    }
  }
}

}  // namespace detail

// A weighted point cloud: n points in R^d plus a probability vector.
// Immutable after construction; every constructor validates.
template <typename Scalar = double>
class DiscreteMeasure {
 public:
  DiscreteMeasure(MatrixX<Scalar> points, VectorX<Scalar> weights,
                  std::vector<PointAttrs> attrs = {})
      : points_(std::move(points)),
        weights_(std::move(weights)),
        attrs_(std::move(attrs)) {
    if (points_.rows() < 1) {
      throw ValueError("DiscreteMeasure: need at least one point");
    }
    if (weights_.size() != points_.rows()) {
      throw DimensionError("DiscreteMeasure: " + std::to_string(points_.rows()) +
                           " points but " + std::to_string(weights_.size()) +
                           " weights");
    }
    if (!points_.allFinite()) {
      throw ValueError("DiscreteMeasure: point coordinates must be finite");
    }
    if (!weights_.allFinite() || (weights_.array() < Scalar(0)).any()) {
      throw ValueError("DiscreteMeasure: weights must be finite and non-negative");
    }
    const Scalar sum = weights_.sum();
    if (std::abs(sum - Scalar(1)) > detail::weight_sum_tolerance<Scalar>()) {
      throw ValueError("DiscreteMeasure: weights sum to " + std::to_string(sum) +
                       ", expected 1");
    }
    detail::check_attrs(attrs_, points_.rows());
  }

  // Uniform weights 1/n.
  static DiscreteMeasure uniform(MatrixX<Scalar> points,
                                 std::vector<PointAttrs> attrs = {}) {
    const Index n = points.rows();
    if (n < 1) throw ValueError("DiscreteMeasure: need at least one point");
    VectorX<Scalar> w = VectorX<Scalar>::Constant(n, Scalar(1) / Scalar(n));
    // Make the weights sum to 1 exactly so downstream marginal checks are
    // not charged for 1/n rounding.
    w(n - 1) = Scalar(1) - w.head(n - 1).sum();
    return DiscreteMeasure(std::move(points), std::move(w), std::move(attrs));
  }

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  const MatrixX<Scalar>& points() const { return points_; }
  const VectorX<Scalar>& weights() const { return weights_; }

  bool has_attrs() const { return !attrs_.empty(); }
  const std::vector<PointAttrs>& attrs() const { return attrs_; }

  const PointAttrs& attr(Index i) const {
    if (attrs_.empty()) {
      throw AttributeError("DiscreteMeasure: no attributes attached");
    }
    return attrs_.at(static_cast<std::size_t>(i));
  }

 private:
  MatrixX<Scalar> points_;
  VectorX<Scalar> weights_;
  std::vector<PointAttrs> attrs_;
};

// Pairwise ground costs between two measures.  Entries are validated to be
// finite and non-negative once, at construction, so solvers can assume both.
template <typename Scalar = double>
class CostMatrix {
 public:
  explicit CostMatrix(MatrixX<Scalar> entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1) {
      throw ValueError("CostMatrix: must be non-empty");
    }
    if (!entries_.allFinite()) {
      throw ValueError("CostMatrix: entries must be finite");
    }
    if ((entries_.array() < Scalar(0)).any()) {
      throw ValueError("CostMatrix: entries must be non-negative");
    }
  }

  Index rows() const { return entries_.rows(); }
  Index cols() const { return entries_.cols(); }
  const MatrixX<Scalar>& entries() const { return entries_; }
  Scalar operator()(Index i, Index j) const { return entries_(i, j); }

 private:
  MatrixX<Scalar> entries_;
};

// A coupling between two measures together with the marginals it is supposed
// to have.  Construction checks shapes only; whether the numbers actually
// satisfy the marginal equations is the job of validate_plan, so that plans
// read from disk can be inspected rather than rejected outright.
template <typename Scalar = double>
class TransportPlan {
 public:
  TransportPlan(MatrixX<Scalar> coupling, VectorX<Scalar> source_marginal,
                VectorX<Scalar> target_marginal, Scalar marginal_tol = Scalar(1e-9))
      : coupling_(std::move(coupling)),
        source_marginal_(std::move(source_marginal)),
        target_marginal_(std::move(target_marginal)),
        marginal_tol_(marginal_tol) {
    if (coupling_.rows() != source_marginal_.size() ||
        coupling_.cols() != target_marginal_.size()) {
      throw DimensionError(
          "TransportPlan: coupling is " + std::to_string(coupling_.rows()) +
          "x" + std::to_string(coupling_.cols()) + " but marginals have sizes " +
          std::to_string(source_marginal_.size()) + " and " +
          std::to_string(target_marginal_.size()));
    }
    if (!(marginal_tol_ >= Scalar(0))) {
      throw ValueError("TransportPlan: marginal_tol must be non-negative");
    }
  }

  Index rows() const { return coupling_.rows(); }
  Index cols() const { return coupling_.cols(); }
  const MatrixX<Scalar>& coupling() const { return coupling_; }
  const VectorX<Scalar>& source_marginal() const { return source_marginal_; }
  const VectorX<Scalar>& target_marginal() const { return target_marginal_; }
  Scalar marginal_tol() const { return marginal_tol_; }

  // The same coupling read in the opposite direction.
  TransportPlan transposed() const {
    return TransportPlan(coupling_.transpose(), target_marginal_,
                         source_marginal_, marginal_tol_);
  }

 private:
  MatrixX<Scalar> coupling_;
  VectorX<Scalar> source_marginal_;
  VectorX<Scalar> target_marginal_;
  Scalar marginal_tol_;
};

template <typename Scalar>
struct PlanValidation {
  bool valid = false;
  Scalar max_row_violation = Scalar(0);  // max_i |sum_j pi_ij - mu_i|
  Scalar max_col_violation = Scalar(0);  // max_j |sum_i pi_ij - nu_j|
  Scalar min_entry = Scalar(0);
  Scalar tol = Scalar(0);
};

// Checks non-negativity and both marginal equations against `tol` (the plan's
// own tolerance when omitted).
template <typename Scalar>
PlanValidation<Scalar> validate_plan(const TransportPlan<Scalar>& plan,
                                     std::optional<Scalar> tol = std::nullopt) {
  PlanValidation<Scalar> out;
  out.tol = tol.value_or(plan.marginal_tol());
  const MatrixX<Scalar>& pi = plan.coupling();
  out.min_entry = pi.minCoeff();
  out.max_row_violation =
      (pi.rowwise().sum() - plan.source_marginal()).cwiseAbs().maxCoeff();
  out.max_col_violation =
      (pi.colwise().sum().transpose() - plan.target_marginal())
          .cwiseAbs()
          .maxCoeff();
  out.valid = pi.allFinite() && out.min_entry >= Scalar(0) &&
              out.max_row_violation <= out.tol &&
              out.max_col_violation <= out.tol;
  return out;
}

// <pi, C>: total cost of moving mass according to the plan.
template <typename Scalar>
Scalar transport_cost(const TransportPlan<Scalar>& plan,
                      const CostMatrix<Scalar>& cost) {
  if (plan.rows() != cost.rows() || plan.cols() != cost.cols()) {
    throw DimensionError("transport_cost: plan is " + std::to_string(plan.rows()) +
                         "x" + std::to_string(plan.cols()) + ", cost is " +
                         std::to_string(cost.rows()) + "x" +
                         std::to_string(cost.cols()));
  }
  return (plan.coupling().array() * cost.entries().array()).sum();
}

}  // namespace otg
