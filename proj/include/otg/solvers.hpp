#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "otg/core.hpp"

namespace otg {

template <typename Scalar>
struct SolveResult {
  TransportPlan<Scalar> plan;
  Scalar objective = Scalar(0);   // equals transport_cost(plan, cost)
  Index iterations = 0;           // pivots, sweeps, or permutations tried
  bool converged = true;
  // Dual potentials (f over sources, g over targets) when the method
  // produces them.  For the exact solver they certify optimality:
  // f_i + g_j <= c_ij everywhere, with equality on the support.
  std::optional<VectorX<Scalar>> dual_source;
  std::optional<VectorX<Scalar>> dual_target;
};

// Scales a non-negative approximate coupling so both marginals hold exactly
// (up to roundoff): shrink overfull rows, then overfull columns, then add a
// rank-one correction carrying the missing mass.  The result stays
// non-negative and moves at most the initial marginal violation in L1.
template <typename Scalar>
void round_to_marginals(MatrixX<Scalar>& pi, const VectorX<Scalar>& mu,
                        const VectorX<Scalar>& nu) {
  const Index n = pi.rows(), m = pi.cols();
  for (Index i = 0; i < n; ++i) {
    const Scalar r = pi.row(i).sum();
    if (r > mu(i)) pi.row(i) *= mu(i) / r;
  }
  for (Index j = 0; j < m; ++j) {
    const Scalar c = pi.col(j).sum();
    if (c > nu(j)) pi.col(j) *= nu(j) / c;
  }
  VectorX<Scalar> err_r = (mu - pi.rowwise().sum()).cwiseMax(Scalar(0));
  VectorX<Scalar> err_c =
      (nu - pi.colwise().sum().transpose()).cwiseMax(Scalar(0));
  const Scalar missing = err_r.sum();
  if (missing > Scalar(0)) {
    pi.noalias() += (err_r / missing) * err_c.transpose();
  }
}

namespace detail {

// Transportation simplex working state.  Nodes 0..n-1 are sources, n..n+m-1
// sinks; the basis is a spanning tree with exactly n+m-1 arcs.
template <typename Scalar>
class NetworkSimplex {
 public:
  NetworkSimplex(const VectorX<Scalar>& supply, const VectorX<Scalar>& demand,
                 const MatrixX<Scalar>& cost)
      : n_(supply.size()),
        m_(demand.size()),
        cost_(cost),
        supply_(supply),
        demand_(demand),
        f_(n_),
        g_(m_) {
    build_initial_basis();
    compute_duals();
  }

  // Returns the number of pivots performed.  Throws SolverError when
  // max_pivots is reached before optimality.
  Index run(Index max_pivots) {
    const Scalar scale = std::max(Scalar(1), cost_.maxCoeff());
    const Scalar enter_tol = Scalar(1e-12) * scale;
    const Index total = n_ * m_;
    const Index block = std::max<Index>(
        64, static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(total)))));

    Index pivots = 0;
    Index cursor = 0;
    while (true) {
      // Block search: scan cells in chunks, take the most negative reduced
      // cost seen in the first chunk that has one.
      Index best = -1;
      Scalar best_red = -enter_tol;
      Index scanned = 0;
      while (scanned < total) {
        const Index count = std::min(block, total - scanned);
        for (Index t = 0; t < count; ++t) {
          const Index cell = (cursor + t) % total;
          const Index i = cell / m_, j = cell % m_;
          const Scalar red = cost_(i, j) - f_(i) - g_(j);
          if (red < best_red) {
            best_red = red;
            best = cell;
          }
        }
        cursor = (cursor + count) % total;
        scanned += count;
        if (best >= 0) break;
      }
      if (best < 0) return pivots;  // dual feasible: optimal

      if (pivots >= max_pivots) {
        throw SolverError("network simplex exceeded the pivot cap of " +
                          std::to_string(max_pivots) + " pivots (" +
                          std::to_string(n_) + "x" + std::to_string(m_) +
                          " instance)");
      }
      pivot(best / m_, best % m_);
      ++pivots;
    }
  }

  // Re-solves the tree for the given (unperturbed) marginals by peeling
  // leaves, clamping the tiny negative flows degeneracy can leave behind.
  MatrixX<Scalar> extract(const VectorX<Scalar>& mu,
                          const VectorX<Scalar>& nu) const {
    const Index nodes = n_ + m_;
    VectorX<Scalar> residual(nodes);
    residual.head(n_) = mu;
    residual.tail(m_) = nu;

    std::vector<Index> deg(static_cast<std::size_t>(nodes));
    std::vector<std::vector<Index>> adj = adj_;
    for (Index v = 0; v < nodes; ++v) {
      deg[static_cast<std::size_t>(v)] =
          static_cast<Index>(adj[static_cast<std::size_t>(v)].size());
    }
    std::vector<char> edge_done(arc_i_.size(), 0);
    std::vector<Index> stack;
    for (Index v = 0; v < nodes; ++v) {
      if (deg[static_cast<std::size_t>(v)] == 1) stack.push_back(v);
    }

    MatrixX<Scalar> pi = MatrixX<Scalar>::Zero(n_, m_);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      if (deg[static_cast<std::size_t>(v)] != 1) continue;
      Index edge = -1;
      for (Index e : adj[static_cast<std::size_t>(v)]) {
        if (!edge_done[static_cast<std::size_t>(e)]) {
          edge = e;
          break;
        }
      }
      if (edge < 0) continue;
      const Index i = arc_i_[static_cast<std::size_t>(edge)];
      const Index j = arc_j_[static_cast<std::size_t>(edge)];
      const Index other = (v < n_) ? n_ + j : i;
      const Scalar flow = residual(v);
      pi(i, j) = std::max(flow, Scalar(0));
      residual(other) -= flow;
      residual(v) = Scalar(0);
      edge_done[static_cast<std::size_t>(edge)] = 1;
      --deg[static_cast<std::size_t>(v)];
      if (--deg[static_cast<std::size_t>(other)] == 1) stack.push_back(other);
    }
    return pi;
  }

  const VectorX<Scalar>& dual_source() const { return f_; }
  const VectorX<Scalar>& dual_target() const { return g_; }

 private:
  void build_initial_basis() {
    // North-west corner rule on the perturbed marginals.
    VectorX<Scalar> ra = supply_, rb = demand_;
    Index i = 0, j = 0;
    adj_.assign(static_cast<std::size_t>(n_ + m_), {});
    while (true) {
      const Scalar q = std::min(ra(i), rb(j));
      add_arc(i, j, q);
      ra(i) -= q;
      rb(j) -= q;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (j == m_ - 1) {
        ++i;
      } else if (i == n_ - 1) {
        ++j;
      } else if (ra(i) < rb(j)) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void add_arc(Index i, Index j, Scalar flow) {
    const Index e = static_cast<Index>(arc_i_.size());
    arc_i_.push_back(i);
    arc_j_.push_back(j);
    flow_.push_back(flow);
    adj_[static_cast<std::size_t>(i)].push_back(e);
    adj_[static_cast<std::size_t>(n_ + j)].push_back(e);
  }

  // Dual potentials from the spanning tree, rooted at source 0 with f_0 = 0.
  void compute_duals() {
    const Index nodes = n_ + m_;
    std::vector<char> seen(static_cast<std::size_t>(nodes), 0);
    std::vector<Index> queue{0};
    seen[0] = 1;
    f_(0) = Scalar(0);
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const Index v = queue[q];
      for (Index e : adj_[static_cast<std::size_t>(v)]) {
        const Index i = arc_i_[static_cast<std::size_t>(e)];
        const Index j = arc_j_[static_cast<std::size_t>(e)];
        const Index other = (v < n_) ? n_ + j : i;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = 1;
        if (other < n_) {
          f_(other) = cost_(i, j) - g_(j);
        } else {
          g_(other - n_) = cost_(i, j) - f_(i);
        }
        queue.push_back(other);
      }
    }
  }

  // Brings arc (ei, ej) into the basis: finds the unique tree path between
  // its endpoints, shifts flow around the induced cycle, and drops the arc
  // whose flow reaches zero first.
  void pivot(Index ei, Index ej) {
    const Index nodes = n_ + m_;
    const Index src = ei, dst = n_ + ej;
    std::vector<Index> parent(static_cast<std::size_t>(nodes), -1);
    std::vector<Index> via(static_cast<std::size_t>(nodes), -1);
    std::vector<char> seen(static_cast<std::size_t>(nodes), 0);
    std::vector<Index> queue{src};
    seen[static_cast<std::size_t>(src)] = 1;
    while (!seen[static_cast<std::size_t>(dst)]) {
      // The basis is a spanning tree, so the search always reaches dst.
      std::vector<Index> next;
      for (Index v : queue) {
        for (Index e : adj_[static_cast<std::size_t>(v)]) {
          const Index i = arc_i_[static_cast<std::size_t>(e)];
          const Index j = arc_j_[static_cast<std::size_t>(e)];
          const Index other = (v < n_) ? n_ + j : i;
          if (seen[static_cast<std::size_t>(other)]) continue;
          seen[static_cast<std::size_t>(other)] = 1;
          parent[static_cast<std::size_t>(other)] = v;
          via[static_cast<std::size_t>(other)] = e;
          next.push_back(other);
        }
      }
      queue = std::move(next);
    }

    // Walk dst -> src; path_edges[0] ends up incident to src.
    std::vector<Index> path_edges;
    for (Index v = dst; v != src; v = parent[static_cast<std::size_t>(v)]) {
      path_edges.push_back(via[static_cast<std::size_t>(v)]);
    }
    std::reverse(path_edges.begin(), path_edges.end());

    // Flow conservation around the cycle: the entering arc gains theta, path
    // arcs alternate starting with a loss on the arc leaving src.
    Scalar theta = std::numeric_limits<Scalar>::infinity();
    Index leaving = -1;
    for (std::size_t t = 0; t < path_edges.size(); t += 2) {
      const Scalar fl = flow_[static_cast<std::size_t>(path_edges[t])];
      if (fl < theta) {
        theta = fl;
        leaving = path_edges[t];
      }
    }
    for (std::size_t t = 0; t < path_edges.size(); ++t) {
      flow_[static_cast<std::size_t>(path_edges[t])] +=
          (t % 2 == 0) ? -theta : theta;
    }

    // Replace the leaving arc in place.
    detach_arc(leaving);
    arc_i_[static_cast<std::size_t>(leaving)] = ei;
    arc_j_[static_cast<std::size_t>(leaving)] = ej;
    flow_[static_cast<std::size_t>(leaving)] = theta;
    adj_[static_cast<std::size_t>(ei)].push_back(leaving);
    adj_[static_cast<std::size_t>(n_ + ej)].push_back(leaving);

    compute_duals();
  }

  void detach_arc(Index e) {
    for (Index v : {arc_i_[static_cast<std::size_t>(e)],
                    n_ + arc_j_[static_cast<std::size_t>(e)]}) {
      auto& lst = adj_[static_cast<std::size_t>(v)];
      lst.erase(std::find(lst.begin(), lst.end(), e));
    }
  }

  Index n_, m_;
  const MatrixX<Scalar>& cost_;
  VectorX<Scalar> supply_, demand_;
  std::vector<Index> arc_i_, arc_j_;
  std::vector<Scalar> flow_;
  std::vector<std::vector<Index>> adj_;
  VectorX<Scalar> f_, g_;
};

template <typename Scalar>
void check_problem_shapes(const DiscreteMeasure<Scalar>& mu,
                          const DiscreteMeasure<Scalar>& nu,
                          const CostMatrix<Scalar>& cost, const char* who) {
  if (cost.rows() != mu.size() || cost.cols() != nu.size()) {
    throw DimensionError(std::string(who) + ": cost matrix is " +
                         std::to_string(cost.rows()) + "x" +
                         std::to_string(cost.cols()) + " but measures have " +
                         std::to_string(mu.size()) + " and " +
                         std::to_string(nu.size()) + " points");
  }
}

template <typename Scalar>
SolveResult<Scalar> solve_exact_capped(const DiscreteMeasure<Scalar>& mu,
                                       const DiscreteMeasure<Scalar>& nu,
                                       const CostMatrix<Scalar>& cost,
                                       Index max_pivots) {
  check_problem_shapes(mu, nu, cost, "solve_exact");
  const Index n = mu.size(), m = nu.size();

  // Perturb the supplies to break degenerate ties; the slack is absorbed by
  // the last demand and discarded again when flows are re-solved on the true
  // marginals.
  VectorX<Scalar> supply = mu.weights();
  VectorX<Scalar> demand = nu.weights();
  Scalar added = Scalar(0);
  for (Index i = 0; i < n; ++i) {
    const Scalar delta = Scalar(1e-12) * static_cast<Scalar>(i);
    supply(i) += delta;
    added += delta;
  }
  demand(m - 1) += added;

  NetworkSimplex<Scalar> simplex(supply, demand, cost.entries());
  const Index pivots = simplex.run(max_pivots);

  MatrixX<Scalar> pi = simplex.extract(mu.weights(), nu.weights());
  // Degenerate bases can leave clamped negatives on the order of the total
  // perturbation; repair the marginals when that is visible.
  const Scalar viol = std::max(
      (pi.rowwise().sum() - mu.weights()).cwiseAbs().maxCoeff(),
      (pi.colwise().sum().transpose() - nu.weights()).cwiseAbs().maxCoeff());
  if (viol > Scalar(1e-13)) {
    round_to_marginals(pi, mu.weights(), nu.weights());
  }

  SolveResult<Scalar> out{
      TransportPlan<Scalar>(std::move(pi), mu.weights(), nu.weights(),
                            Scalar(1e-9)),
      Scalar(0), pivots, true, simplex.dual_source(), simplex.dual_target()};
  out.objective = transport_cost(out.plan, cost);
  return out;
}

}  // namespace detail

// Exact optimal transport via the transportation simplex.  Deterministic;
// certifies optimality through the returned dual potentials.
template <typename Scalar>
SolveResult<Scalar> solve_exact(const DiscreteMeasure<Scalar>& mu,
                                const DiscreteMeasure<Scalar>& nu,
                                const CostMatrix<Scalar>& cost) {
  const Index nodes = mu.size() + nu.size();
  return detail::solve_exact_capped(mu, nu, cost, 50 * nodes * nodes);
}

template <typename Scalar>
struct SinkhornConfig {
  Scalar epsilon = Scalar(1e-2);
  Index max_iter = 100000;
  Scalar tol = Scalar(1e-6);  // L1 marginal violation, worse of the two sides
  // Unset: pick the log-domain kernel automatically when epsilon is small
  // relative to the costs (epsilon < 1e-2 * max cost).
  std::optional<bool> log_domain;
};

// Entropy-regularized transport.  The returned coupling is rounded onto the
// exact marginals, so validate_plan passes at tight tolerances even though
// the fixed-point iteration stops at config.tol.
template <typename Scalar>
SolveResult<Scalar> solve_sinkhorn(const DiscreteMeasure<Scalar>& mu,
                                   const DiscreteMeasure<Scalar>& nu,
                                   const CostMatrix<Scalar>& cost,
                                   const SinkhornConfig<Scalar>& config) {
  detail::check_problem_shapes(mu, nu, cost, "solve_sinkhorn");
  if (!(config.epsilon > Scalar(0))) {
    throw ValueError("solve_sinkhorn: epsilon must be positive");
  }
  if (!(config.tol > Scalar(0)) || config.max_iter < 1) {
    throw ValueError("solve_sinkhorn: tol must be positive and max_iter >= 1");
  }
  const Index n = mu.size(), m = nu.size();
  const MatrixX<Scalar>& c = cost.entries();
  const VectorX<Scalar>& a = mu.weights();
  const VectorX<Scalar>& b = nu.weights();
  const Scalar eps = config.epsilon;
  const bool log_domain =
      config.log_domain.value_or(eps < Scalar(1e-2) * c.maxCoeff());

  MatrixX<Scalar> pi(n, m);
  VectorX<Scalar> dual_f(n), dual_g(m);
  Index iter = 0;
  bool converged = false;
  Scalar best_viol = std::numeric_limits<Scalar>::infinity();

  if (!log_domain) {
    const MatrixX<Scalar> kernel = (-c / eps).array().exp().matrix();
    // exp underflow can wipe out whole rows or columns of the kernel (or
    // clamp them to denormals that no longer distinguish costs); the scaling
    // iteration then diverges or quietly converges to the wrong plan.
    const Scalar tiny = Scalar(1e-290);
    if (kernel.rowwise().maxCoeff().minCoeff() < tiny ||
        kernel.colwise().maxCoeff().minCoeff() < tiny) {
      throw SolverError(
          "solve_sinkhorn: kernel exp(-cost/epsilon) underflowed at epsilon " +
          std::to_string(static_cast<double>(eps)) +
          "; retry with log_domain = true");
    }
    VectorX<Scalar> u = VectorX<Scalar>::Ones(n);
    VectorX<Scalar> v = VectorX<Scalar>::Ones(m);
    VectorX<Scalar> best_u = u, best_v = v;
    for (iter = 1; iter <= config.max_iter; ++iter) {
      const VectorX<Scalar> kv = kernel * v;
      u = a.cwiseQuotient(kv);
      const VectorX<Scalar> ktu = kernel.transpose() * u;
      v = b.cwiseQuotient(ktu);
      if (!u.allFinite() || !v.allFinite()) {
        throw SolverError(
            "solve_sinkhorn: scaling factors overflowed at epsilon " +
            std::to_string(static_cast<double>(eps)) +
            "; retry with log_domain = true");
      }
      // Columns are exact right after the v-update; only rows can be off.
      const Scalar viol =
          (u.cwiseProduct(kernel * v) - a).template lpNorm<1>();
      if (viol < best_viol) {
        best_viol = viol;
        best_u = u;
        best_v = v;
      }
      if (viol <= config.tol) {
        converged = true;
        break;
      }
    }
    if (iter > config.max_iter) iter = config.max_iter;
    pi = best_u.asDiagonal() * kernel * best_v.asDiagonal();
    for (Index i = 0; i < n; ++i) {
      dual_f(i) = best_u(i) > Scalar(0)
                      ? eps * std::log(best_u(i))
                      : -std::numeric_limits<Scalar>::infinity();
    }
    for (Index j = 0; j < m; ++j) {
      dual_g(j) = best_v(j) > Scalar(0)
                      ? eps * std::log(best_v(j))
                      : -std::numeric_limits<Scalar>::infinity();
    }
  } else {
    VectorX<Scalar> f = VectorX<Scalar>::Zero(n);
    VectorX<Scalar> g = VectorX<Scalar>::Zero(m);
    VectorX<Scalar> best_f = f, best_g = g;
    const VectorX<Scalar> log_a = a.array().log().matrix();
    const VectorX<Scalar> log_b = b.array().log().matrix();
    MatrixX<Scalar> work(n, m);
    for (iter = 1; iter <= config.max_iter; ++iter) {
      // f_i = eps log a_i - eps LSE_j((g_j - c_ij)/eps), then symmetrically.
      work = ((-c).rowwise() + g.transpose()) / eps;
      for (Index i = 0; i < n; ++i) {
        const Scalar hi = work.row(i).maxCoeff();
        f(i) = eps * (log_a(i) - hi -
                      std::log((work.row(i).array() - hi).exp().sum()));
      }
      work = (((-c).colwise() + f)) / eps;
      for (Index j = 0; j < m; ++j) {
        const Scalar hj = work.col(j).maxCoeff();
        g(j) = eps * (log_b(j) - hj -
                      std::log((work.col(j).array() - hj).exp().sum()));
      }
      pi = ((((-c).colwise() + f).rowwise() + g.transpose()) / eps)
               .array()
               .exp()
               .matrix();
      const Scalar viol =
          (pi.rowwise().sum() - a).template lpNorm<1>();
      if (viol < best_viol) {
        best_viol = viol;
        best_f = f;
        best_g = g;
      }
      if (viol <= config.tol) {
        converged = true;
        break;
      }
    }
    if (iter > config.max_iter) iter = config.max_iter;
    pi = ((((-c).colwise() + best_f).rowwise() + best_g.transpose()) / eps)
             .array()
             .exp()
             .matrix();
    dual_f = best_f;
    dual_g = best_g;
  }

  round_to_marginals(pi, a, b);
  SolveResult<Scalar> out{
      TransportPlan<Scalar>(std::move(pi), a, b, Scalar(1e-6)),
      Scalar(0), iter, converged, std::move(dual_f), std::move(dual_g)};
  out.objective = transport_cost(out.plan, cost);
  return out;
}

// Exhaustive search over permutations.  Only defined for equal-size uniform
// marginals, where permutation matrices are exactly the extreme points of
// the feasible set, so the best permutation is a true optimum.  Ties resolve
// to the lexicographically smallest assignment.
template <typename Scalar>
SolveResult<Scalar> brute_force_solve(const DiscreteMeasure<Scalar>& mu,
                                      const DiscreteMeasure<Scalar>& nu,
                                      const CostMatrix<Scalar>& cost) {
  detail::check_problem_shapes(mu, nu, cost, "brute_force_solve");
  const Index n = mu.size();
  if (nu.size() != n) {
    throw ValueError("brute_force_solve: measures must have equal size");
  }
  if (n > 8) {
    throw ValueError("brute_force_solve: limited to n <= 8, got " +
                     std::to_string(n));
  }
  const Scalar w = Scalar(1) / static_cast<Scalar>(n);
  for (const auto& weights : {mu.weights(), nu.weights()}) {
    if ((weights.array() - w).cwiseAbs().maxCoeff() > Scalar(1e-12)) {
      throw ValueError("brute_force_solve: weights must be uniform");
    }
  }

  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::vector<Index> best = perm;
  Scalar best_cost = std::numeric_limits<Scalar>::infinity();
  Index tried = 0;
  do {
    Scalar total = Scalar(0);
    for (Index i = 0; i < n; ++i) {
      total += cost(i, perm[static_cast<std::size_t>(i)]);
    }
    if (total < best_cost) {
      best_cost = total;
      best = perm;
    }
    ++tried;
  } while (std::next_permutation(perm.begin(), perm.end()));

  MatrixX<Scalar> pi = MatrixX<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    pi(i, best[static_cast<std::size_t>(i)]) = mu.weights()(i);
  }
  SolveResult<Scalar> out{
      TransportPlan<Scalar>(std::move(pi), mu.weights(), nu.weights(),
                            Scalar(1e-9)),
      Scalar(0), tried, true, std::nullopt, std::nullopt};
  out.objective = transport_cost(out.plan, cost);
  return out;
}

}  // namespace otg
