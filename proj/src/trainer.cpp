#include "otg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "otg/rng.hpp"
#include "otg/serialize.hpp"
#include "otg/solvers.hpp"

namespace otg {

using nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (!(lambda_gp >= 0.0) || !(lambda_rec >= 0.0) || !(lambda_ref >= 0.0)) {
    throw ValueError("train config: every lambda must be >= 0");
  }
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) {
    throw ValueError("train config: lr0 must be positive");
  }
  if (epochs < 1) throw ValueError("train config: epochs must be at least 1");
  if (batch < 1) throw ValueError("train config: batch must be at least 1");
  if (critic_steps < 1) {
    throw ValueError("train config: critic_steps must be at least 1");
  }
}

ordered_json TrainConfig::to_json() const {
  ordered_json j;
  j["lambda_gp"] = lambda_gp;
  j["lambda_rec"] = lambda_rec;
  j["lambda_ref"] = lambda_ref;
  j["lr0"] = lr0;
  j["epochs"] = epochs;
  j["batch"] = batch;
  j["critic_steps"] = critic_steps;
  j["seed"] = seed;
  j["ref_norm"] = "l2";
  return j;
}

TrainConfig TrainConfig::from_json(const ordered_json& j) {
  if (!j.is_object()) throw ValueError("train config: expected a JSON object");
  TrainConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "lambda_gp") {
      config.lambda_gp = value.get<double>();
    } else if (key == "lambda_rec") {
      config.lambda_rec = value.get<double>();
    } else if (key == "lambda_ref") {
      config.lambda_ref = value.get<double>();
    } else if (key == "lr0") {
      config.lr0 = value.get<double>();
    } else if (key == "epochs") {
      config.epochs = value.get<Index>();
    } else if (key == "batch") {
      config.batch = value.get<Index>();
    } else if (key == "critic_steps") {
      config.critic_steps = value.get<Index>();
    } else if (key == "seed") {
      config.seed = value.get<std::uint64_t>();
    } else if (key == "ref_norm") {
      if (value.get<std::string>() != "l2") {
        throw ValueError("train config: ref_norm must be \"l2\"");
      }
    } else {
      throw ValueError("train config: unknown field \"" + key + "\"");
    }
  }
  config.validate();
  return config;
}

Standardizer Standardizer::fit(const MatrixX<double>& points) {
  Standardizer s;
  s.mean = points.colwise().mean();
  const MatrixX<double> centered = points.rowwise() - s.mean.transpose();
  s.scale = (centered.array().square().colwise().mean()).sqrt();
  for (Index d = 0; d < s.scale.size(); ++d) {
    if (s.scale(d) < 1e-12) s.scale(d) = 1.0;  // constant feature: leave it be
  }
  return s;
}

Standardizer Standardizer::identity(Index dim) {
  Standardizer s;
  s.mean = VectorX<double>::Zero(dim);
  s.scale = VectorX<double>::Ones(dim);
  return s;
}

MatrixX<double> Standardizer::apply(const MatrixX<double>& raw) const {
  return ((raw.rowwise() - mean.transpose()).array().rowwise() /
          scale.transpose().array())
      .matrix();
}

MatrixX<double> Standardizer::invert(const MatrixX<double>& standardized) const {
  return ((standardized.array().rowwise() * scale.transpose().array()).matrix()
              .rowwise() +
          mean.transpose());
}

Mlp<double> fold_standardization(const Mlp<double>& net, const Standardizer& in,
                                 const Standardizer& out) {
  net.validate();
  if (in.mean.size() != net.input_dim() || out.mean.size() != net.output_dim()) {
    throw DimensionError("fold_standardization: rescaling does not match net");
  }
  Mlp<double> folded = net;
  MatrixX<double>& w0 = folded.weights.front();
  for (Index i = 0; i < w0.rows(); ++i) w0.row(i) /= in.scale(i);
  folded.biases.front() -= w0.transpose() * in.mean;
  MatrixX<double>& wl = folded.weights.back();
  for (Index j = 0; j < wl.cols(); ++j) wl.col(j) *= out.scale(j);
  folded.biases.back() =
      folded.biases.back().cwiseProduct(out.scale) + out.mean;
  return folded;
}

namespace {

void accumulate(MlpGrads<double>& dst, const MlpGrads<double>& src,
                double factor) {
  for (std::size_t l = 0; l < dst.weights.size(); ++l) {
    dst.weights[l] += factor * src.weights[l];
    dst.biases[l] += factor * src.biases[l];
  }
}

// Gradient of mean_i ||rows_i||: rows_i / (k * ||rows_i||), zero where the
// residual vanishes.
MatrixX<double> mean_norm_grad(const MatrixX<double>& rows, double& value) {
  const Index k = rows.rows();
  MatrixX<double> grad(k, rows.cols());
  value = 0.0;
  for (Index i = 0; i < k; ++i) {
    const double norm = rows.row(i).norm();
    value += norm / k;
    if (norm == 0.0) {
      grad.row(i).setZero();
    } else {
      grad.row(i) = rows.row(i) / (norm * k);
    }
  }
  return grad;
}

}  // namespace

CriticLossResult critic_loss(const Mlp<double>& critic,
                             const MatrixX<double>& real,
                             const MatrixX<double>& fake, double lambda_gp,
                             const VectorX<double>& interp_t) {
  const Index k = real.rows();
  if (fake.rows() != k || fake.cols() != real.cols()) {
    throw DimensionError("critic_loss: real batch is " + std::to_string(k) +
                         "x" + std::to_string(real.cols()) + ", fake is " +
                         std::to_string(fake.rows()) + "x" +
                         std::to_string(fake.cols()));
  }
  if (interp_t.size() != k) {
    throw DimensionError("critic_loss: need one interpolation coefficient per "
                         "sample");
  }
  if (!(lambda_gp >= 0.0)) {
    throw ValueError("critic_loss: lambda_gp must be >= 0");
  }

  ForwardResult<double> on_real = forward(critic, real);
  ForwardResult<double> on_fake = forward(critic, fake);

  MatrixX<double> interpolates(k, real.cols());
  for (Index i = 0; i < k; ++i) {
    const double t = interp_t(i);
    interpolates.row(i) = t * real.row(i) + (1.0 - t) * fake.row(i);
  }
  GradientPenalty<double> gp = gradient_penalty(critic, interpolates);

  CriticLossResult out;
  out.wasserstein = (on_real.outputs.mean() - on_fake.outputs.mean());
  out.penalty = gp.penalty;
  out.zero_norm_samples = gp.zero_norm_samples;
  out.loss = -out.wasserstein + lambda_gp * out.penalty;
  if (!std::isfinite(out.loss)) {
    throw SolverError("critic loss is not finite (wasserstein " +
                      std::to_string(out.wasserstein) + ", penalty " +
                      std::to_string(out.penalty) + ")");
  }

  const MatrixX<double> up =
      MatrixX<double>::Constant(k, 1, 1.0 / static_cast<double>(k));
  out.grads = backward(critic, on_fake.tape, up).params;
  accumulate(out.grads, backward(critic, on_real.tape, MatrixX<double>(-up)).params,
             1.0);
  accumulate(out.grads, gp.params, lambda_gp);
  return out;
}

GeneratorLossResult generator_loss(const Mlp<double>& g_fwd,
                                   const Mlp<double>& g_bwd,
                                   const Mlp<double>& critic,
                                   const MatrixX<double>& batch,
                                   const MatrixX<double>& refs,
                                   double lambda_rec, double lambda_ref) {
  const Index k = batch.rows();
  if (refs.rows() != k || refs.cols() != g_fwd.output_dim()) {
    throw DimensionError("generator_loss: refs are " +
                         std::to_string(refs.rows()) + "x" +
                         std::to_string(refs.cols()) + ", expected " +
                         std::to_string(k) + "x" +
                         std::to_string(g_fwd.output_dim()));
  }
  if (!(lambda_rec >= 0.0) || !(lambda_ref >= 0.0)) {
    throw ValueError("generator_loss: lambdas must be >= 0");
  }

  ForwardResult<double> fwd = forward(g_fwd, batch);
  const MatrixX<double>& fake = fwd.outputs;
  ForwardResult<double> cyc = forward(g_bwd, fake);
  ForwardResult<double> score = forward(critic, fake);

  GeneratorLossResult out;
  out.adversarial = -score.outputs.mean();

  double cycle_value = 0.0;
  MatrixX<double> d_rec = mean_norm_grad(cyc.outputs - batch, cycle_value);
  out.cycle = cycle_value;

  double ref_value = 0.0;
  MatrixX<double> d_fake_ref = mean_norm_grad(fake - refs, ref_value);
  out.reference = ref_value;

  out.total =
      out.adversarial + lambda_rec * out.cycle + lambda_ref * out.reference;
  if (!std::isfinite(out.total)) {
    throw SolverError("generator loss is not finite (adversarial " +
                      std::to_string(out.adversarial) + ", cycle " +
                      std::to_string(out.cycle) + ", reference " +
                      std::to_string(ref_value) + ")");
  }

  // Pull every path's gradient back to the fake batch, then once through
  // g_fwd.
  BackwardResult<double> through_cycle =
      backward(g_bwd, cyc.tape, MatrixX<double>(lambda_rec * d_rec));
  out.backward_grads = through_cycle.params;

  const MatrixX<double> d_score = MatrixX<double>::Constant(
      k, 1, -1.0 / static_cast<double>(k));
  MatrixX<double> d_fake = backward(critic, score.tape, d_score).inputs;
  d_fake += through_cycle.inputs;
  d_fake += lambda_ref * d_fake_ref;
  out.forward_grads = backward(g_fwd, fwd.tape, d_fake).params;
  return out;
}

namespace {

// Epoch-spanning shuffled index stream; reshuffles whenever exhausted.
class IndexSampler {
 public:
  IndexSampler(Index n, Rng& rng) : rng_(rng), order_(static_cast<std::size_t>(n)) {
    for (Index i = 0; i < n; ++i) order_[static_cast<std::size_t>(i)] = i;
    rng_.shuffle(order_);
  }

  std::vector<Index> next(Index count) {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<Index>(out.size()) < count) {
      if (pos_ == order_.size()) {
        rng_.shuffle(order_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  Rng& rng_;
  std::vector<Index> order_;
  std::size_t pos_ = 0;
};

MatrixX<double> take_rows(const MatrixX<double>& m,
                          const std::vector<Index>& idx) {
  MatrixX<double> out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(idx[i]);
  }
  return out;
}

VectorX<double> draw_uniform(Rng& rng, Index k) {
  VectorX<double> t(k);
  for (Index i = 0; i < k; ++i) t(i) = rng.uniform();
  return t;
}

constexpr double kDivergenceLimit = 1e8;
constexpr Index kHiddenWidth = 64;

}  // namespace

TrainReport train(const DiscreteMeasure<double>& mu,
                  const DiscreteMeasure<double>& nu,
                  const ReferenceMap<double>& refs,
                  const CostMatrix<double>& eval_cost,
                  const TrainConfig& config) {
  config.validate();
  const Index n = mu.size(), m = nu.size();
  const Index du = mu.dim(), dv = nu.dim();
  if (refs.source_to_target.rows() != n || refs.source_to_target.cols() != dv ||
      refs.target_to_source.rows() != m || refs.target_to_source.cols() != du) {
    throw DimensionError("train: reference map does not cover both datasets");
  }
  if (eval_cost.rows() != n || eval_cost.cols() != m) {
    throw DimensionError("train: eval cost is " + std::to_string(eval_cost.rows()) +
                         "x" + std::to_string(eval_cost.cols()) + ", datasets are " +
                         std::to_string(n) + " and " + std::to_string(m));
  }

  const Standardizer su = Standardizer::fit(mu.points());
  const Standardizer sv = Standardizer::fit(nu.points());
  const MatrixX<double> U = su.apply(mu.points());
  const MatrixX<double> V = sv.apply(nu.points());
  const MatrixX<double> refs_v = sv.apply(refs.source_to_target);
  const MatrixX<double> refs_u = su.apply(refs.target_to_source);
  const CostMatrix<double> eval_cost_t(eval_cost.entries().transpose());

  Mlp<double> g_uv = glorot_mlp<double>({du, kHiddenWidth, kHiddenWidth, dv},
                                        derive_seed(config.seed, 1));
  Mlp<double> g_vu = glorot_mlp<double>({dv, kHiddenWidth, kHiddenWidth, du},
                                        derive_seed(config.seed, 2));
  Mlp<double> d_u = glorot_mlp<double>({du, kHiddenWidth, kHiddenWidth, 1},
                                       derive_seed(config.seed, 3));
  Mlp<double> d_v = glorot_mlp<double>({dv, kHiddenWidth, kHiddenWidth, 1},
                                       derive_seed(config.seed, 4));
  AdamState<double> st_guv = AdamState<double>::zeros_like(g_uv);
  AdamState<double> st_gvu = AdamState<double>::zeros_like(g_vu);
  AdamState<double> st_du = AdamState<double>::zeros_like(d_u);
  AdamState<double> st_dv = AdamState<double>::zeros_like(d_v);

  Rng rng(derive_seed(config.seed, 0));
  IndexSampler sample_u(n, rng), sample_v(m, rng);
  const Index k = std::min({config.batch, n, m});

  TrainReport report;
  report.epochs.reserve(static_cast<std::size_t>(config.epochs));

  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.lr0 * (1.0 - static_cast<double>(epoch) /
                                              static_cast<double>(config.epochs));
    EpochStats stats;
    try {
      for (Index step = 0; step < config.critic_steps; ++step) {
        const std::vector<Index> iu = sample_u.next(k);
        const std::vector<Index> iv = sample_v.next(k);
        const MatrixX<double> u_batch = take_rows(U, iu);
        const MatrixX<double> v_batch = take_rows(V, iv);
        const MatrixX<double> fake_v = forward(g_uv, u_batch).outputs;
        const MatrixX<double> fake_u = forward(g_vu, v_batch).outputs;

        CriticLossResult cv = critic_loss(d_v, v_batch, fake_v, config.lambda_gp,
                                          draw_uniform(rng, k));
        adam_step(d_v, cv.grads, st_dv, lr);
        CriticLossResult cu = critic_loss(d_u, u_batch, fake_u, config.lambda_gp,
                                          draw_uniform(rng, k));
        adam_step(d_u, cu.grads, st_du, lr);
        stats.critic_loss = cu.loss + cv.loss;
      }

      const std::vector<Index> iu = sample_u.next(k);
      const std::vector<Index> iv = sample_v.next(k);
      GeneratorLossResult to_v =
          generator_loss(g_uv, g_vu, d_v, take_rows(U, iu), take_rows(refs_v, iu),
                         config.lambda_rec, config.lambda_ref);
      GeneratorLossResult to_u =
          generator_loss(g_vu, g_uv, d_u, take_rows(V, iv), take_rows(refs_u, iv),
                         config.lambda_rec, config.lambda_ref);
      MlpGrads<double> guv_grads = to_v.forward_grads;
      accumulate(guv_grads, to_u.backward_grads, 1.0);
      MlpGrads<double> gvu_grads = to_u.forward_grads;
      accumulate(gvu_grads, to_v.backward_grads, 1.0);
      adam_step(g_uv, guv_grads, st_guv, lr);
      adam_step(g_vu, gvu_grads, st_gvu, lr);

      stats.gen_total = to_v.total + to_u.total;
      stats.gen_adversarial = to_v.adversarial + to_u.adversarial;
      stats.gen_cycle = to_v.cycle + to_u.cycle;
      stats.gen_reference = to_v.reference + to_u.reference;
    } catch (const SolverError&) {
      report.diverged = true;
      break;
    } catch (const ValueError&) {
      // Non-finite parameters or gradients downstream of a blow-up; same
      // outcome as a non-finite loss.
      report.diverged = true;
      break;
    }

    stats.s_uv = mismatching_degree_generated(
        sv.invert(forward(g_uv, U).outputs), mu, nu, eval_cost);
    stats.s_vu = mismatching_degree_generated(
        su.invert(forward(g_vu, V).outputs), nu, mu, eval_cost_t);
    report.epochs.push_back(stats);
    report.completed_epochs = epoch + 1;

    if (std::abs(stats.critic_loss) > kDivergenceLimit ||
        std::abs(stats.gen_total) > kDivergenceLimit) {
      report.diverged = true;
      break;
    }
  }

  report.g_uv = fold_standardization(g_uv, su, sv);
  report.g_vu = fold_standardization(g_vu, sv, su);
  report.critic_u = fold_standardization(d_u, su, Standardizer::identity(1));
  report.critic_v = fold_standardization(d_v, sv, Standardizer::identity(1));
  return report;
}

namespace {

std::filesystem::path reference_cache_path(const DiscreteMeasure<double>& mu,
                                           const DiscreteMeasure<double>& nu,
                                           const CostSpec& spec,
                                           const std::filesystem::path& dir) {
  const std::string key = hex64(measure_hash(mu)) + ":" +
                          hex64(measure_hash(nu)) + ":" + spec.canonical_id();
  return dir / ("refs_" + hex64(fnv1a64(key)) + ".jsonl");
}

template <typename Solve>
ReferenceMap<double> cached_references(const DiscreteMeasure<double>& mu,
                                       const DiscreteMeasure<double>& nu,
                                       const CostSpec& spec,
                                       const std::filesystem::path& cache_dir,
                                       Solve&& solve) {
  const std::filesystem::path path =
      reference_cache_path(mu, nu, spec, cache_dir);
  if (std::filesystem::exists(path)) {
    return load_reference_map_jsonl(path);
  }
  ReferenceMap<double> map = solve();
  write_reference_map_jsonl(path, map);
  return map;
}

}  // namespace

ReferenceMap<double> precompute_references(
    const DiscreteMeasure<double>& mu, const DiscreteMeasure<double>& nu,
    const CostSpec& spec, const std::filesystem::path& cache_dir) {
  return cached_references(mu, nu, spec, cache_dir,
                           [&] { return reference_map(mu, nu, spec); });
}

ReferenceMap<double> precompute_references(
    const DiscreteMeasure<double>& mu, const DiscreteMeasure<double>& nu,
    const CostSpec& spec, HistogramCache& cache,
    const std::filesystem::path& cache_dir) {
  return cached_references(mu, nu, spec, cache_dir,
                           [&] { return reference_map(mu, nu, spec, cache); });
}

double evaluate_generalization(const Mlp<double>& generator,
                               const DiscreteMeasure<double>& holdout,
                               const DiscreteMeasure<double>& nu,
                               const CostMatrix<double>& eval_cost) {
  if (holdout.dim() != generator.input_dim()) {
    throw DimensionError("evaluate_generalization: holdout features have " +
                         std::to_string(holdout.dim()) +
                         " dimensions, generator expects " +
                         std::to_string(generator.input_dim()));
  }
  const MatrixX<double> outputs = forward(generator, holdout.points()).outputs;
  return mismatching_degree_generated(outputs, holdout, nu, eval_cost);
}

void write_train_csv(const std::filesystem::path& path,
                     const TrainReport& report) {
  std::ostringstream out;
  out << "epoch,critic_loss,gen_total,gen_adversarial,gen_cycle,"
         "gen_reference,s_uv,s_vu\n";
  char line[320];
  for (std::size_t e = 0; e < report.epochs.size(); ++e) {
    const EpochStats& s = report.epochs[e];
    std::snprintf(line, sizeof(line),
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e,
                  s.critic_loss, s.gen_total, s.gen_adversarial, s.gen_cycle,
                  s.gen_reference, s.s_uv, s.s_vu);
    out << line;
  }
  write_text_atomic(path, out.str());
}

}  // namespace otg
