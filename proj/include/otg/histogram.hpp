#pragma once

#include <functional>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "otg/core.hpp"
#include "otg/image.hpp"

namespace otg {

// How the inner transport problem of histogram_wasserstein is solved.
struct InnerSolverSpec {
  enum class Method { Auto, Exact, Sinkhorn };
  Method method = Method::Auto;
  // Sinkhorn regularization; 0 means "pick 1e-2 times the median ground
  // cost".  Ignored by the exact method.
  double epsilon = 0.0;
};

// Color histogram over a fixed Lab grid.  Only occupied bins are stored: the
// measure's points are the Lab centers of those bins, its weights the
// normalized pixel counts.  bin_ids lists the flat grid index of each point,
// in increasing order.
class LabHistogram {
 public:
  LabHistogram(DiscreteMeasure<double> measure, int bins,
               std::vector<Index> bin_ids);

  const DiscreteMeasure<double>& measure() const { return measure_; }
  int bins() const { return bins_; }
  const std::vector<Index>& bin_ids() const { return bin_ids_; }
  Index occupied() const { return measure_.size(); }

 private:
  DiscreteMeasure<double> measure_;
  int bins_;
  std::vector<Index> bin_ids_;
};

// Flat index of the Lab bin holding (L, a, b) on a bins^3 grid covering
// L in [0, 100] and a, b in [-128, 127].  Values straying slightly outside
// (the sRGB gamut corners land at e.g. L = 100 + 1e-6) are clamped to the
// boundary bins.
Index lab_bin_index(const std::array<double, 3>& lab, int bins);

// Center of the bin with the given flat index.
std::array<double, 3> lab_bin_center(Index flat, int bins);

// Histogram of an image's non-background pixels (background: all channels
// >= 250).  Throws when every pixel is background.
LabHistogram lab_histogram(const Image& image, int bins = 8);

// Transport cost between two histograms on the same grid under the
// Euclidean distance of Lab bin centers.  Symmetric by construction: the
// pair is put into a canonical order before solving.
double histogram_wasserstein(const LabHistogram& h1, const LabHistogram& h2,
                             const InnerSolverSpec& inner = {});

// Image-id keyed histogram store.  `get` computes through `loader` on a
// miss; disabling the cache makes every call recompute, which is only
// useful for checking that caching does not change results.
class HistogramCache {
 public:
  HistogramCache(std::function<Image(const std::string&)> loader, int bins,
                 bool enabled = true);

  // Loads PPM files named <dir>/<id>.ppm.
  static HistogramCache for_ppm_dir(const std::filesystem::path& dir, int bins,
                                    bool enabled = true);

  LabHistogram get(const std::string& id);
  void prepopulate(const std::vector<std::string>& ids);
  std::size_t size() const;
  int bins() const { return bins_; }

 private:
  std::function<Image(const std::string&)> loader_;
  int bins_;
  bool enabled_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, LabHistogram> entries_;
};

}  // namespace otg
