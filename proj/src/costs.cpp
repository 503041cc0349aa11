#include "otg/costs.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

namespace otg {

using nlohmann::ordered_json;

std::string cost_kind_name(CostKind kind) {
  switch (kind) {
    case CostKind::SqEuclidean: return "sq_euclidean";
    case CostKind::Angle: return "angle";
    case CostKind::AvgColor: return "avg_color";
    case CostKind::Combined: return "combined";
    case CostKind::HistogramWasserstein: return "histogram_wasserstein";
  }
  throw ValueError("cost_kind_name: unknown kind");
}

CostKind cost_kind_from_name(const std::string& name) {
  if (name == "sq_euclidean") return CostKind::SqEuclidean;
  if (name == "angle") return CostKind::Angle;
  if (name == "avg_color") return CostKind::AvgColor;
  if (name == "combined") return CostKind::Combined;
  if (name == "histogram_wasserstein") return CostKind::HistogramWasserstein;
  throw ValueError("unknown cost kind '" + name +
                   "'; expected one of sq_euclidean, angle, avg_color, "
                   "combined, histogram_wasserstein");
}

std::string CostSpec::canonical_id() const {
  return to_json().dump();
}

ordered_json CostSpec::to_json() const {
  ordered_json j;
  j["kind"] = cost_kind_name(kind);
  j["angle_mode"] = angle_mode == AngleMode::Circular ? "circular" : "linear";
  if (lambda_color) {
    j["lambda_color"] = *lambda_color;
  } else {
    j["lambda_color"] = nullptr;
  }
  j["bins"] = histogram_bins;
  ordered_json inner_j;
  switch (inner.method) {
    case InnerSolverSpec::Method::Auto: inner_j["method"] = "auto"; break;
    case InnerSolverSpec::Method::Exact: inner_j["method"] = "exact"; break;
    case InnerSolverSpec::Method::Sinkhorn: inner_j["method"] = "sinkhorn"; break;
  }
  inner_j["epsilon"] = inner.epsilon;
  j["inner"] = std::move(inner_j);
  return j;
}

CostSpec CostSpec::from_json(const ordered_json& j) {
  if (!j.is_object()) throw ValueError("cost spec: expected a JSON object");
  CostSpec spec;
  if (!j.contains("kind")) throw ValueError("cost spec: missing \"kind\"");
  spec.kind = cost_kind_from_name(j["kind"].get<std::string>());
  if (j.contains("angle_mode")) {
    const std::string mode = j["angle_mode"].get<std::string>();
    if (mode == "circular") {
      spec.angle_mode = AngleMode::Circular;
    } else if (mode == "linear") {
      spec.angle_mode = AngleMode::Linear;
    } else {
      throw ValueError("cost spec: angle_mode must be circular or linear, got '" +
                       mode + "'");
    }
  }
  if (j.contains("lambda_color") && !j["lambda_color"].is_null()) {
    const double lambda = j["lambda_color"].get<double>();
    if (!std::isfinite(lambda) || lambda < 0.0) {
      throw ValueError("cost spec: lambda_color must be finite and >= 0");
    }
    spec.lambda_color = lambda;
  }
  if (j.contains("bins")) {
    spec.histogram_bins = j["bins"].get<int>();
    if (spec.histogram_bins < 2) {
      throw ValueError("cost spec: bins must be at least 2");
    }
  }
  if (j.contains("inner")) {
    const ordered_json& inner_j = j["inner"];
    const std::string method = inner_j.value("method", "auto");
    if (method == "auto") {
      spec.inner.method = InnerSolverSpec::Method::Auto;
    } else if (method == "exact") {
      spec.inner.method = InnerSolverSpec::Method::Exact;
    } else if (method == "sinkhorn") {
      spec.inner.method = InnerSolverSpec::Method::Sinkhorn;
    } else {
      throw ValueError("cost spec: inner.method must be auto, exact or sinkhorn");
    }
    if (inner_j.contains("epsilon")) {
      spec.inner.epsilon = inner_j["epsilon"].get<double>();
      if (!(spec.inner.epsilon >= 0.0)) {
        throw ValueError("cost spec: inner.epsilon must be >= 0");
      }
    }
  }
  return spec;
}

double angle_cost(double a, double b, AngleMode mode) {
  for (double v : {a, b}) {
    if (!std::isfinite(v) || v < 0.0 || v >= 360.0) {
      throw ValueError("angle_cost: angle " + std::to_string(v) +
                       " outside [0, 360)");
    }
  }
  double diff = std::abs(a - b);
  if (mode == AngleMode::Circular) diff = std::min(diff, 360.0 - diff);
  return diff * diff;
}

double color_distance(const std::array<int, 3>& a, const std::array<int, 3>& b) {
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double d = static_cast<double>(a[c]) - static_cast<double>(b[c]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace {

std::array<double, 3> masked_mean_rgb(const Image& img, const char* which) {
  std::array<double, 3> sum{{0.0, 0.0, 0.0}};
  double count = 0.0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.background(x, y)) continue;
      for (int c = 0; c < 3; ++c) sum[c] += img.at(x, y, c);
      count += 1.0;
    }
  }
  if (count == 0.0) {
    throw ValueError(std::string("avg_color_distance: ") + which +
                     " image is entirely background");
  }
  for (int c = 0; c < 3; ++c) sum[c] /= count;
  return sum;
}

}  // namespace

double avg_color_distance(const Image& img_a, const Image& img_b) {
  const auto ma = masked_mean_rgb(img_a, "first");
  const auto mb = masked_mean_rgb(img_b, "second");
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double d = ma[c] - mb[c];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double combined_cost(const PointAttrs& x, const PointAttrs& y,
                     double lambda_color, AngleMode mode) {
  if (!x.angle || !y.angle) {
    throw AttributeError("combined_cost: point '" +
                         (x.angle ? y.id : x.id) + "' has no angle attribute");
  }
  if (!x.color || !y.color) {
    throw AttributeError("combined_cost: point '" +
                         (x.color ? y.id : x.id) + "' has no color attribute");
  }
  if (!std::isfinite(lambda_color) || lambda_color < 0.0) {
    throw ValueError("combined_cost: lambda_color must be finite and >= 0");
  }
  return angle_cost(*x.angle, *y.angle, mode) +
         lambda_color * color_distance(*x.color, *y.color);
}

namespace {

int thread_budget(Index rows) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("OTGUIDE_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed >= 1) hw = std::min<unsigned>(hw, parsed);
  }
  return static_cast<int>(
      std::min<Index>(static_cast<Index>(hw), std::max<Index>(rows, 1)));
}

// Runs fn(i) for every row, splitting rows across the thread budget.  Each
// worker owns a disjoint contiguous range, so writes never race.
template <typename Fn>
void parallel_rows(Index rows, const Fn& fn) {
  const int threads = thread_budget(rows);
  if (threads <= 1) {
    for (Index i = 0; i < rows; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  const Index chunk = (rows + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const Index lo = static_cast<Index>(t) * chunk;
      const Index hi = std::min(rows, lo + chunk);
      try {
        for (Index i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

const PointAttrs& need_angle(const DiscreteMeasure<double>& m, Index i) {
  const PointAttrs& a = m.attr(i);
  if (!a.angle) {
    throw AttributeError("cost_matrix: point '" + a.id +
                         "' has no angle attribute");
  }
  return a;
}

const PointAttrs& need_color(const DiscreteMeasure<double>& m, Index i) {
  const PointAttrs& a = m.attr(i);
  if (!a.color) {
    throw AttributeError("cost_matrix: point '" + a.id +
                         "' has no color attribute");
  }
  return a;
}

const PointAttrs& need_id(const DiscreteMeasure<double>& m, Index i) {
  const PointAttrs& a = m.attr(i);
  if (a.id.empty()) {
    throw AttributeError("cost_matrix: point " + std::to_string(i) +
                         " has no id to look its histogram up by");
  }
  return a;
}

}  // namespace

CostMatrix<double> cost_matrix(const DiscreteMeasure<double>& mu,
                               const DiscreteMeasure<double>& nu,
                               const CostSpec& spec) {
  const Index n = mu.size(), m = nu.size();
  MatrixX<double> entries(n, m);

  switch (spec.kind) {
    case CostKind::SqEuclidean: {
      if (mu.dim() != nu.dim()) {
        throw DimensionError("cost_matrix: feature dimensions differ (" +
                             std::to_string(mu.dim()) + " vs " +
                             std::to_string(nu.dim()) + ")");
      }
      parallel_rows(n, [&](Index i) {
        for (Index j = 0; j < m; ++j) {
          entries(i, j) = (mu.points().row(i) - nu.points().row(j)).squaredNorm();
        }
      });
      break;
    }
    case CostKind::Angle: {
      for (Index i = 0; i < n; ++i) need_angle(mu, i);
      for (Index j = 0; j < m; ++j) need_angle(nu, j);
      parallel_rows(n, [&](Index i) {
        const double ai = *mu.attr(i).angle;
        for (Index j = 0; j < m; ++j) {
          entries(i, j) = angle_cost(ai, *nu.attr(j).angle, spec.angle_mode);
        }
      });
      break;
    }
    case CostKind::AvgColor: {
      for (Index i = 0; i < n; ++i) need_color(mu, i);
      for (Index j = 0; j < m; ++j) need_color(nu, j);
      parallel_rows(n, [&](Index i) {
        const auto& ci = *mu.attr(i).color;
        for (Index j = 0; j < m; ++j) {
          entries(i, j) = color_distance(ci, *nu.attr(j).color);
        }
      });
      break;
    }
    case CostKind::Combined: {
      if (!spec.lambda_color) {
        throw ValueError(
            "cost_matrix: the combined cost needs an explicit lambda_color");
      }
      for (Index i = 0; i < n; ++i) {
        need_angle(mu, i);
        need_color(mu, i);
      }
      for (Index j = 0; j < m; ++j) {
        need_angle(nu, j);
        need_color(nu, j);
      }
      const double lambda = *spec.lambda_color;
      parallel_rows(n, [&](Index i) {
        const PointAttrs& xi = mu.attr(i);
        for (Index j = 0; j < m; ++j) {
          entries(i, j) = combined_cost(xi, nu.attr(j), lambda, spec.angle_mode);
        }
      });
      break;
    }
    case CostKind::HistogramWasserstein:
      throw ValueError(
          "cost_matrix: the histogram kind needs a histogram cache; use the "
          "overload taking one");
  }
  return CostMatrix<double>(std::move(entries));
}

CostMatrix<double> cost_matrix(const DiscreteMeasure<double>& mu,
                               const DiscreteMeasure<double>& nu,
                               const CostSpec& spec, HistogramCache& cache) {
  if (spec.kind != CostKind::HistogramWasserstein) {
    return cost_matrix(mu, nu, spec);
  }
  const Index n = mu.size(), m = nu.size();
  if (cache.bins() != spec.histogram_bins) {
    throw DimensionError("cost_matrix: cache uses " +
                         std::to_string(cache.bins()) + " bins but the spec " +
                         std::to_string(spec.histogram_bins));
  }

  // Resolve every histogram serially first; the parallel phase then only
  // reads local copies.
  std::vector<LabHistogram> rows_h, cols_h;
  rows_h.reserve(static_cast<std::size_t>(n));
  cols_h.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i) rows_h.push_back(cache.get(need_id(mu, i).id));
  for (Index j = 0; j < m; ++j) cols_h.push_back(cache.get(need_id(nu, j).id));

  MatrixX<double> entries(n, m);
  parallel_rows(n, [&](Index i) {
    for (Index j = 0; j < m; ++j) {
      entries(i, j) =
          histogram_wasserstein(rows_h[static_cast<std::size_t>(i)],
                                cols_h[static_cast<std::size_t>(j)], spec.inner);
    }
  });
  return CostMatrix<double>(std::move(entries));
}

}  // namespace otg
