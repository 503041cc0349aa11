#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "otg/core.hpp"
#include "otg/costs.hpp"
#include "otg/mapping.hpp"
#include "otg/neural.hpp"

namespace otg {

enum class RefNorm { L2 };

struct TrainConfig {
  double lambda_gp = 10.0;
  double lambda_rec = 100.0;  // weight of the round-trip reconstruction term
  double lambda_ref = 0.0;    // weight of the pull toward the references
  double lr0 = 2e-4;          // decays linearly to zero over the run
  Index epochs = 2000;        // one critic round plus one generator step each
  Index batch = 32;
  Index critic_steps = 5;
  std::uint64_t seed = 0;
  RefNorm ref_norm = RefNorm::L2;

  void validate() const;
  static TrainConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
};

// Per-dimension affine rescaling of a point cloud.  Training happens on
// standardized features; checkpoints are folded back to raw features so
// callers never see the rescaling.
struct Standardizer {
  VectorX<double> mean;
  VectorX<double> scale;  // standard deviation, floored away from zero

  static Standardizer fit(const MatrixX<double>& points);
  static Standardizer identity(Index dim);
  MatrixX<double> apply(const MatrixX<double>& raw) const;
  MatrixX<double> invert(const MatrixX<double>& standardized) const;
};

// Absorbs input/output standardization into the first and last affine
// layers, producing a network that acts on raw features.
Mlp<double> fold_standardization(const Mlp<double>& net, const Standardizer& in,
                                 const Standardizer& out);

struct CriticLossResult {
  double loss = 0.0;         // minimized: -wasserstein + lambda_gp * penalty
  double wasserstein = 0.0;  // E[D(real)] - E[D(fake)]
  double penalty = 0.0;
  MlpGrads<double> grads;
  Index zero_norm_samples = 0;
};

// interp_t holds one coefficient per sample; interpolates are
// t*real + (1-t)*fake row by row.
CriticLossResult critic_loss(const Mlp<double>& critic,
                             const MatrixX<double>& real,
                             const MatrixX<double>& fake, double lambda_gp,
                             const VectorX<double>& interp_t);

struct GeneratorLossResult {
  double total = 0.0;  // adversarial + lambda_rec*cycle + lambda_ref*reference
  double adversarial = 0.0;
  double cycle = 0.0;      // mean round-trip L2 distance, unweighted
  double reference = 0.0;  // mean distance to the reference rows, unweighted
  MlpGrads<double> forward_grads;
  MlpGrads<double> backward_grads;  // reached through the cycle term only
};

// One direction of the objective: push batch through g_fwd, score with the
// critic, close the cycle with g_bwd, and pull toward refs (row i of refs
// belongs to row i of batch).
GeneratorLossResult generator_loss(const Mlp<double>& g_fwd,
                                   const Mlp<double>& g_bwd,
                                   const Mlp<double>& critic,
                                   const MatrixX<double>& batch,
                                   const MatrixX<double>& refs,
                                   double lambda_rec, double lambda_ref);

struct EpochStats {
  double critic_loss = 0.0;      // both critics, last critic step of the epoch
  double gen_total = 0.0;        // both directions summed
  double gen_adversarial = 0.0;
  double gen_cycle = 0.0;        // unweighted
  double gen_reference = 0.0;    // unweighted
  double s_uv = 0.0;             // mismatching degree, sources through g_uv
  double s_vu = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  Mlp<double> g_uv, g_vu;          // raw-feature generators
  Mlp<double> critic_u, critic_v;  // raw-feature critics
  bool diverged = false;
  Index completed_epochs = 0;
};

// The full loop: critic_steps critic updates per side, then one generator
// update per side, per epoch, with the learning rate decaying linearly to
// zero.  Deterministic in config.seed.  A loss beyond 1e8 (or a non-finite
// one) stops the run early with diverged set and the parameters kept as of
// the last completed update.
TrainReport train(const DiscreteMeasure<double>& mu,
                  const DiscreteMeasure<double>& nu,
                  const ReferenceMap<double>& refs,
                  const CostMatrix<double>& eval_cost,
                  const TrainConfig& config);

// reference_map with a disk cache keyed by both dataset hashes and the cost
// spec; a hit is read back bit-identical.
ReferenceMap<double> precompute_references(const DiscreteMeasure<double>& mu,
                                           const DiscreteMeasure<double>& nu,
                                           const CostSpec& spec,
                                           const std::filesystem::path& cache_dir);
ReferenceMap<double> precompute_references(const DiscreteMeasure<double>& mu,
                                           const DiscreteMeasure<double>& nu,
                                           const CostSpec& spec,
                                           HistogramCache& cache,
                                           const std::filesystem::path& cache_dir);

// Mismatching degree of a raw-feature generator on held-out sources, scored
// against the fixed target dataset (eval_cost is holdout x targets).
double evaluate_generalization(const Mlp<double>& generator,
                               const DiscreteMeasure<double>& holdout,
                               const DiscreteMeasure<double>& nu,
                               const CostMatrix<double>& eval_cost);

// One CSV row per epoch, columns matching EpochStats.
void write_train_csv(const std::filesystem::path& path,
                     const TrainReport& report);

}  // namespace otg
