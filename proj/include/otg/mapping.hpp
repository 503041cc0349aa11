#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "otg/core.hpp"
#include "otg/costs.hpp"
#include "otg/solvers.hpp"

namespace otg {

// Barycenters of an optimal plan, read in both directions.
template <typename Scalar = double>
struct ReferenceMap {
  MatrixX<Scalar> source_to_target;  // row i: where source point i should go
  MatrixX<Scalar> target_to_source;  // row j: where target point j comes from
  std::string provenance;            // plan hash and cost spec id
};

// An index-level mapping from sources to targets.
struct DeterministicMap {
  std::vector<Index> assignment;  // target index per source
  bool bijective = false;
};

inline bool is_permutation(const std::vector<Index>& assignment, Index n) {
  if (static_cast<Index>(assignment.size()) != n) return false;
  std::vector<char> hit(static_cast<std::size_t>(n), 0);
  for (Index j : assignment) {
    if (j < 0 || j >= n || hit[static_cast<std::size_t>(j)]) return false;
    hit[static_cast<std::size_t>(j)] = 1;
  }
  return true;
}

// Conditional mean of the targets under each source row of the plan:
// row i = sum_j (pi_ij / mu_i) * v_j.  A permutation plan reproduces the
// assigned target points bit for bit, because the single ratio pi_ij/mu_i is
// then exactly 1.
template <typename Scalar>
MatrixX<Scalar> barycentric_projection(const TransportPlan<Scalar>& plan,
                                       const DiscreteMeasure<Scalar>& nu) {
  if (plan.cols() != nu.size()) {
    throw DimensionError("barycentric_projection: plan has " +
                         std::to_string(plan.cols()) + " columns but nu " +
                         std::to_string(nu.size()) + " points");
  }
  const PlanValidation<Scalar> check = validate_plan(plan);
  if (!check.valid) {
    throw ValueError(
        "barycentric_projection: plan fails validation (row violation " +
        std::to_string(static_cast<double>(check.max_row_violation)) +
        ", column violation " +
        std::to_string(static_cast<double>(check.max_col_violation)) +
        " at tolerance " + std::to_string(static_cast<double>(check.tol)) + ")");
  }
  const Index n = plan.rows();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(n, nu.dim());
  for (Index i = 0; i < n; ++i) {
    const Scalar mass = plan.source_marginal()(i);
    if (!(mass > Scalar(0))) {
      throw ValueError("barycentric_projection: source row " +
                       std::to_string(i) + " carries no mass");
    }
    for (Index j = 0; j < plan.cols(); ++j) {
      const Scalar pij = plan.coupling()(i, j);
      if (pij == Scalar(0)) continue;
      out.row(i) += (pij / mass) * nu.points().row(j);
    }
  }
  return out;
}

// Both barycentric directions of one already-solved plan.  The reverse
// direction reads the same coupling transposed.
template <typename Scalar>
ReferenceMap<Scalar> reference_map_from_plan(const TransportPlan<Scalar>& plan,
                                             const DiscreteMeasure<Scalar>& mu,
                                             const DiscreteMeasure<Scalar>& nu,
                                             std::string provenance = "") {
  ReferenceMap<Scalar> out;
  out.source_to_target = barycentric_projection(plan, nu);
  out.target_to_source = barycentric_projection(plan.transposed(), mu);
  out.provenance = std::move(provenance);
  return out;
}

// Solves the exact transport problem under the given cost and projects it.
ReferenceMap<double> reference_map(const DiscreteMeasure<double>& mu,
                                   const DiscreteMeasure<double>& nu,
                                   const CostSpec& spec);
ReferenceMap<double> reference_map(const DiscreteMeasure<double>& mu,
                                   const DiscreteMeasure<double>& nu,
                                   const CostSpec& spec, HistogramCache& cache);

// ---- mismatching degree -------------------------------------------------
//
// S = sum_ij pi_ij c_ij for a plan; S = sum_i mu_i c(i, assignment(i)) for an
// index map.  Generator outputs are first matched to their nearest dataset
// target (squared Euclidean in feature space) and scored as an index map.

template <typename Scalar>
Scalar mismatching_degree(const TransportPlan<Scalar>& plan,
                          const CostMatrix<Scalar>& eval_cost) {
  return transport_cost(plan, eval_cost);
}

template <typename Scalar>
Scalar mismatching_degree(const DeterministicMap& map,
                          const DiscreteMeasure<Scalar>& mu,
                          const CostMatrix<Scalar>& eval_cost) {
  if (static_cast<Index>(map.assignment.size()) != mu.size() ||
      eval_cost.rows() != mu.size()) {
    throw DimensionError("mismatching_degree: map covers " +
                         std::to_string(map.assignment.size()) +
                         " sources, expected " + std::to_string(mu.size()));
  }
  Scalar total = Scalar(0);
  for (Index i = 0; i < mu.size(); ++i) {
    const Index j = map.assignment[static_cast<std::size_t>(i)];
    if (j < 0 || j >= eval_cost.cols()) {
      throw ValueError("mismatching_degree: assignment " + std::to_string(j) +
                       " out of range");
    }
    total += mu.weights()(i) * eval_cost(i, j);
  }
  return total;
}

// Index of the nearest support row for every query row, smallest index on
// ties.
template <typename Scalar>
std::vector<Index> nearest_points(const MatrixX<Scalar>& queries,
                                  const MatrixX<Scalar>& support) {
  if (queries.cols() != support.cols()) {
    throw DimensionError("nearest_points: dimension mismatch (" +
                         std::to_string(queries.cols()) + " vs " +
                         std::to_string(support.cols()) + ")");
  }
  std::vector<Index> out(static_cast<std::size_t>(queries.rows()));
  for (Index q = 0; q < queries.rows(); ++q) {
    Index best = 0;
    Scalar best_d = (queries.row(q) - support.row(0)).squaredNorm();
    for (Index s = 1; s < support.rows(); ++s) {
      const Scalar d = (queries.row(q) - support.row(s)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = s;
      }
    }
    out[static_cast<std::size_t>(q)] = best;
  }
  return out;
}

template <typename Scalar>
Scalar mismatching_degree_generated(const MatrixX<Scalar>& outputs,
                                    const DiscreteMeasure<Scalar>& mu,
                                    const DiscreteMeasure<Scalar>& nu,
                                    const CostMatrix<Scalar>& eval_cost) {
  if (outputs.rows() != mu.size()) {
    throw DimensionError("mismatching_degree: " +
                         std::to_string(outputs.rows()) +
                         " generated rows for " + std::to_string(mu.size()) +
                         " sources");
  }
  DeterministicMap map;
  map.assignment = nearest_points(outputs, nu.points());
  map.bijective = is_permutation(map.assignment, nu.size());
  return mismatching_degree(map, mu, eval_cost);
}

// CostSpec-level conveniences used by the command line tool.
double mismatching_degree(const TransportPlan<double>& plan,
                          const DiscreteMeasure<double>& mu,
                          const DiscreteMeasure<double>& nu,
                          const CostSpec& eval_cost);
double mismatching_degree(const DeterministicMap& map,
                          const DiscreteMeasure<double>& mu,
                          const DiscreteMeasure<double>& nu,
                          const CostSpec& eval_cost);

// ---- baseline maps ------------------------------------------------------

// Row-wise argmin of the cost matrix; the collapse-prone baseline.
template <typename Scalar>
DeterministicMap nearest_neighbor_map(const CostMatrix<Scalar>& cost) {
  DeterministicMap map;
  map.assignment.resize(static_cast<std::size_t>(cost.rows()));
  for (Index i = 0; i < cost.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < cost.cols(); ++j) {
      if (cost(i, j) < cost(i, best)) best = j;
    }
    map.assignment[static_cast<std::size_t>(i)] = best;
  }
  map.bijective =
      cost.rows() == cost.cols() && is_permutation(map.assignment, cost.cols());
  return map;
}

DeterministicMap nearest_neighbor_map(const DiscreteMeasure<double>& mu,
                                      const DiscreteMeasure<double>& nu,
                                      const CostSpec& spec);

// Uniformly random permutation; same seed, same permutation.
DeterministicMap random_bijection(Index n, std::uint64_t seed);

// Reads a permutation out of a near-permutation plan.  assignment(i) is the
// row argmax; the map counts as bijective only when those argmaxes form a
// permutation and each carries at least `threshold` mass (default 0.9/n).
template <typename Scalar>
DeterministicMap extract_assignment(const TransportPlan<Scalar>& plan,
                                    std::optional<Scalar> threshold = {}) {
  if (plan.rows() != plan.cols()) {
    throw DimensionError("extract_assignment: plan must be square, got " +
                         std::to_string(plan.rows()) + "x" +
                         std::to_string(plan.cols()));
  }
  const Index n = plan.rows();
  const Scalar min_mass =
      threshold.value_or(Scalar(0.9) / static_cast<Scalar>(n));
  DeterministicMap map;
  map.assignment.resize(static_cast<std::size_t>(n));
  bool heavy_enough = true;
  for (Index i = 0; i < n; ++i) {
    Index best = 0;
    for (Index j = 1; j < n; ++j) {
      if (plan.coupling()(i, j) > plan.coupling()(i, best)) best = j;
    }
    map.assignment[static_cast<std::size_t>(i)] = best;
    heavy_enough = heavy_enough && plan.coupling()(i, best) >= min_mass;
  }
  map.bijective = heavy_enough && is_permutation(map.assignment, n);
  return map;
}

// Angle attribute of each generated point's nearest target-dataset point.
std::vector<double> azimuth_readout(const MatrixX<double>& generated,
                                    const DiscreteMeasure<double>& nu);

// ---- on-disk form -------------------------------------------------------
//
// JSON lines, one barycenter per line:
//   {"direction": "uv", "index": 3, "barycenter": [..]}
// preceded by a header line {"provenance": "..."}.

void write_reference_map_jsonl(const std::filesystem::path& path,
                               const ReferenceMap<double>& map);
ReferenceMap<double> load_reference_map_jsonl(const std::filesystem::path& path);

}  // namespace otg
