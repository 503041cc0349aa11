#include "otg/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "otg/solvers.hpp"

namespace otg {

LabHistogram::LabHistogram(DiscreteMeasure<double> measure, int bins,
                           std::vector<Index> bin_ids)
    : measure_(std::move(measure)), bins_(bins), bin_ids_(std::move(bin_ids)) {
  if (bins_ < 2) throw ValueError("LabHistogram: bins must be at least 2");
  if (static_cast<Index>(bin_ids_.size()) != measure_.size()) {
    throw DimensionError("LabHistogram: one bin id per occupied bin required");
  }
  if (!std::is_sorted(bin_ids_.begin(), bin_ids_.end())) {
    throw ValueError("LabHistogram: bin ids must be increasing");
  }
}

Index lab_bin_index(const std::array<double, 3>& lab, int bins) {
  auto axis = [bins](double value, double lo, double span) {
    const double t = (value - lo) / span * static_cast<double>(bins);
    return std::clamp<Index>(static_cast<Index>(std::floor(t)), 0, bins - 1);
  };
  const Index il = axis(lab[0], 0.0, 100.0);
  const Index ia = axis(lab[1], -128.0, 256.0);
  const Index ib = axis(lab[2], -128.0, 256.0);
  return (il * bins + ia) * bins + ib;
}

std::array<double, 3> lab_bin_center(Index flat, int bins) {
  const Index ib = flat % bins;
  const Index ia = (flat / bins) % bins;
  const Index il = flat / (static_cast<Index>(bins) * bins);
  auto center = [bins](Index idx, double lo, double span) {
    return lo + (static_cast<double>(idx) + 0.5) * span / static_cast<double>(bins);
  };
  return {{center(il, 0.0, 100.0), center(ia, -128.0, 256.0),
           center(ib, -128.0, 256.0)}};
}

LabHistogram lab_histogram(const Image& image, int bins) {
  if (bins < 2) throw ValueError("lab_histogram: bins must be at least 2");
  if (image.width < 1 || image.height < 1) {
    throw ValueError("lab_histogram: empty image");
  }
  std::map<Index, double> counts;  // ordered: bin ids come out sorted
  double total = 0.0;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if (image.background(x, y)) continue;
      const auto lab =
          rgb_to_lab(image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2));
      counts[lab_bin_index(lab, bins)] += 1.0;
      total += 1.0;
    }
  }
  if (counts.empty()) {
    throw ValueError("lab_histogram: every pixel is background");
  }

  const Index k = static_cast<Index>(counts.size());
  MatrixX<double> points(k, 3);
  VectorX<double> weights(k);
  std::vector<Index> ids;
  ids.reserve(static_cast<std::size_t>(k));
  Index row = 0;
  for (const auto& [flat, count] : counts) {
    const auto c = lab_bin_center(flat, bins);
    points(row, 0) = c[0];
    points(row, 1) = c[1];
    points(row, 2) = c[2];
    weights(row) = count / total;
    ids.push_back(flat);
    ++row;
  }
  // Absorb the normalization roundoff so the measure's weight-sum check
  // holds exactly.
  weights(k - 1) = 1.0 - weights.head(k - 1).sum();
  return LabHistogram(
      DiscreteMeasure<double>(std::move(points), std::move(weights)), bins,
      std::move(ids));
}

namespace {

// Lexicographic order on (bin ids, weights); gives histogram_wasserstein a
// canonical argument order so c(a, b) and c(b, a) run the same solve.
bool histogram_less(const LabHistogram& x, const LabHistogram& y) {
  if (x.bin_ids() != y.bin_ids()) return x.bin_ids() < y.bin_ids();
  const auto& wx = x.measure().weights();
  const auto& wy = y.measure().weights();
  for (Index i = 0; i < wx.size(); ++i) {
    if (wx(i) != wy(i)) return wx(i) < wy(i);
  }
  return false;
}

}  // namespace

double histogram_wasserstein(const LabHistogram& h1, const LabHistogram& h2,
                             const InnerSolverSpec& inner) {
  if (h1.bins() != h2.bins()) {
    throw DimensionError("histogram_wasserstein: grids differ (" +
                         std::to_string(h1.bins()) + " vs " +
                         std::to_string(h2.bins()) + " bins per axis)");
  }
  const LabHistogram* a = &h1;
  const LabHistogram* b = &h2;
  if (histogram_less(*b, *a)) std::swap(a, b);

  const Index n = a->occupied(), m = b->occupied();
  MatrixX<double> ground(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      ground(i, j) =
          (a->measure().points().row(i) - b->measure().points().row(j)).norm();
    }
  }
  CostMatrix<double> cost(std::move(ground));

  InnerSolverSpec::Method method = inner.method;
  if (method == InnerSolverSpec::Method::Auto) {
    method = std::max(n, m) <= 512 ? InnerSolverSpec::Method::Exact
                                   : InnerSolverSpec::Method::Sinkhorn;
  }
  if (method == InnerSolverSpec::Method::Exact) {
    return solve_exact(a->measure(), b->measure(), cost).objective;
  }
  double eps = inner.epsilon;
  if (!(eps > 0.0)) {
    // 1e-2 times the median ground cost.
    std::vector<double> vals(cost.entries().data(),
                             cost.entries().data() + cost.entries().size());
    std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
    eps = 1e-2 * std::max(vals[vals.size() / 2], 1e-12);
  }
  SinkhornConfig<double> config;
  config.epsilon = eps;
  return solve_sinkhorn(a->measure(), b->measure(), cost, config).objective;
}

HistogramCache::HistogramCache(std::function<Image(const std::string&)> loader,
                               int bins, bool enabled)
    : loader_(std::move(loader)), bins_(bins), enabled_(enabled) {
  if (!loader_) throw ValueError("HistogramCache: loader required");
  if (bins_ < 2) throw ValueError("HistogramCache: bins must be at least 2");
}

HistogramCache HistogramCache::for_ppm_dir(const std::filesystem::path& dir,
                                           int bins, bool enabled) {
  return HistogramCache(
      [dir](const std::string& id) { return load_ppm(dir / (id + ".ppm")); },
      bins, enabled);
}

LabHistogram HistogramCache::get(const std::string& id) {
  if (enabled_) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(id);
    if (it != entries_.end()) return it->second;
  }
  LabHistogram h = lab_histogram(loader_(id), bins_);
  if (enabled_) {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_.emplace(id, h);
  }
  return h;
}

void HistogramCache::prepopulate(const std::vector<std::string>& ids) {
  for (const std::string& id : ids) get(id);
}

std::size_t HistogramCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

}  // namespace otg
