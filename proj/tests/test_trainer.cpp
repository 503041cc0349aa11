#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "otg/datagen.hpp"
#include "otg/rng.hpp"
#include "otg/serialize.hpp"
#include "otg/trainer.hpp"

using namespace otg;

namespace {

MatrixX<double> random_batch(Index k, Index d, Rng& rng) {
  MatrixX<double> x(k, d);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = rng.uniform(-1.5, 1.5);
  }
  return x;
}

void check_close(double got, double want, double tol_rel) {
  const double tol = tol_rel * std::max({1e-3, std::abs(got), std::abs(want)});
  CHECK(std::abs(got - want) <= tol);
}

CostMatrix<double> sq_cost(const DiscreteMeasure<double>& mu,
                           const DiscreteMeasure<double>& nu) {
  CostSpec spec;
  return cost_matrix(mu, nu, spec);
}

std::filesystem::path fresh_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("train config validates and round-trips through JSON") {
  TrainConfig config;
  config.lambda_ref = 200.0;
  config.epochs = 7;
  config.seed = 42;
  TrainConfig back = TrainConfig::from_json(config.to_json());
  CHECK(back.lambda_ref == 200.0);
  CHECK(back.epochs == 7);
  CHECK(back.seed == 42);
  CHECK(back.lambda_gp == 10.0);
  CHECK(back.critic_steps == 5);

  TrainConfig bad = config;
  bad.lambda_rec = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValueError);
  bad = config;
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), ValueError);

  CHECK_THROWS_WITH_AS(
      TrainConfig::from_json(nlohmann::ordered_json{{"lambda_reff", 1.0}}),
      doctest::Contains("lambda_reff"), ValueError);
  CHECK_THROWS_AS(
      TrainConfig::from_json(nlohmann::ordered_json{{"ref_norm", "l1"}}),
      ValueError);
}

TEST_CASE("standardizer round-trips and folding preserves the function") {
  Rng rng(1);
  MatrixX<double> pts = random_batch(20, 3, rng);
  pts.col(1) *= 40.0;
  pts.col(2).array() += 17.0;
  Standardizer s = Standardizer::fit(pts);
  MatrixX<double> z = s.apply(pts);
  CHECK(z.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  CHECK((z.array().square().colwise().mean().sqrt() - 1.0).abs().maxCoeff() <
        1e-12);
  CHECK((s.invert(z) - pts).cwiseAbs().maxCoeff() < 1e-12);

  Standardizer out = Standardizer::fit(random_batch(10, 2, rng));
  Mlp<double> net = glorot_mlp<double>({3, 8, 2}, 5);
  Mlp<double> folded = fold_standardization(net, s, out);
  MatrixX<double> probe = random_batch(6, 3, rng);
  MatrixX<double> via_fold = forward(folded, probe).outputs;
  MatrixX<double> via_standardized =
      out.invert(forward(net, s.apply(probe)).outputs);
  CHECK((via_fold - via_standardized).cwiseAbs().maxCoeff() < 1e-12);

  Mlp<double> same = fold_standardization(
      net, Standardizer::identity(3), Standardizer::identity(2));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    CHECK((same.weights[l] - net.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((same.biases[l] - net.biases[l]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("critic loss vanishes for matched batches under a unit critic") {
  Mlp<double> critic;
  critic.dims = {2, 1};
  MatrixX<double> w(2, 1);
  w << 0.6, 0.8;  // unit norm
  critic.weights = {w};
  critic.biases = {VectorX<double>::Zero(1)};

  Rng rng(2);
  MatrixX<double> batch = random_batch(5, 2, rng);
  VectorX<double> t(5);
  t << 0.1, 0.4, 0.5, 0.8, 0.9;
  CriticLossResult res = critic_loss(critic, batch, batch, 10.0, t);
  CHECK(res.wasserstein == 0.0);
  CHECK(res.penalty == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(res.loss == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(res.grads.weights[0].cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("a constant critic pays exactly the gradient penalty") {
  Mlp<double> critic;
  critic.dims = {2, 2, 1};
  critic.weights = {MatrixX<double>::Zero(2, 2), MatrixX<double>::Zero(2, 1)};
  critic.biases = {VectorX<double>::Zero(2), VectorX<double>::Ones(1) * 3.0};

  Rng rng(3);
  MatrixX<double> real = random_batch(4, 2, rng);
  MatrixX<double> fake = random_batch(4, 2, rng);
  VectorX<double> t(4);
  t << 0.2, 0.4, 0.6, 0.8;
  CriticLossResult res = critic_loss(critic, real, fake, 10.0, t);
  CHECK(res.wasserstein == 0.0);  // D is constant
  CHECK(res.penalty == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(res.loss == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(res.zero_norm_samples == 4);
}

TEST_CASE("critic loss gradients match finite differences") {
  Rng rng(4);
  Mlp<double> critic = glorot_mlp<double>({3, 8, 1}, 11);
  MatrixX<double> real = random_batch(6, 3, rng);
  MatrixX<double> fake = random_batch(6, 3, rng);
  VectorX<double> t(6);
  for (Index i = 0; i < 6; ++i) t(i) = rng.uniform();

  CriticLossResult res = critic_loss(critic, real, fake, 10.0, t);
  const double h = 1e-5;
  for (std::size_t l = 0; l < critic.weights.size(); ++l) {
    for (Index i = 0; i < critic.weights[l].rows(); ++i) {
      for (Index j = 0; j < critic.weights[l].cols(); ++j) {
        Mlp<double> plus = critic, minus = critic;
        plus.weights[l](i, j) += h;
        minus.weights[l](i, j) -= h;
        const double fd = (critic_loss(plus, real, fake, 10.0, t).loss -
                           critic_loss(minus, real, fake, 10.0, t).loss) /
                          (2 * h);
        check_close(res.grads.weights[l](i, j), fd, 1e-3);
      }
    }
    for (Index j = 0; j < critic.biases[l].size(); ++j) {
      Mlp<double> plus = critic, minus = critic;
      plus.biases[l](j) += h;
      minus.biases[l](j) -= h;
      const double fd = (critic_loss(plus, real, fake, 10.0, t).loss -
                         critic_loss(minus, real, fake, 10.0, t).loss) /
                        (2 * h);
      check_close(res.grads.biases[l](j), fd, 1e-3);
    }
  }
}

TEST_CASE("generator loss drops to the adversarial term when unweighted") {
  Rng rng(5);
  Mlp<double> g_fwd = glorot_mlp<double>({2, 6, 2}, 21);
  Mlp<double> g_bwd = glorot_mlp<double>({2, 6, 2}, 22);
  Mlp<double> critic = glorot_mlp<double>({2, 6, 1}, 23);
  MatrixX<double> batch = random_batch(5, 2, rng);
  MatrixX<double> refs = random_batch(5, 2, rng);

  GeneratorLossResult res =
      generator_loss(g_fwd, g_bwd, critic, batch, refs, 0.0, 0.0);
  CHECK(res.total == res.adversarial);

  // Frozen critic, lambdas zero: the generator gradient is exactly the
  // adversarial path, and the cycle partner receives nothing.
  ForwardResult<double> f1 = forward(g_fwd, batch);
  ForwardResult<double> sc = forward(critic, f1.outputs);
  MatrixX<double> d_score =
      MatrixX<double>::Constant(5, 1, -1.0 / 5.0);
  MatrixX<double> d_fake = backward(critic, sc.tape, d_score).inputs;
  MlpGrads<double> adv_only = backward(g_fwd, f1.tape, d_fake).params;
  for (std::size_t l = 0; l < adv_only.weights.size(); ++l) {
    CHECK((res.forward_grads.weights[l] - adv_only.weights[l])
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    CHECK(res.backward_grads.weights[l].cwiseAbs().maxCoeff() == 0.0);
    CHECK(res.backward_grads.biases[l].cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("exact inverse pair with matching references scores zero twice") {
  // g_fwd shifts by +2, g_bwd undoes it; refs equal the shifted batch.
  Mlp<double> g_fwd, g_bwd;
  g_fwd.dims = g_bwd.dims = {1, 1};
  g_fwd.weights = {MatrixX<double>::Ones(1, 1)};
  g_fwd.biases = {VectorX<double>::Ones(1) * 2.0};
  g_bwd.weights = {MatrixX<double>::Ones(1, 1)};
  g_bwd.biases = {VectorX<double>::Ones(1) * -2.0};
  Mlp<double> critic = glorot_mlp<double>({1, 4, 1}, 31);

  Rng rng(6);
  MatrixX<double> batch = random_batch(6, 1, rng);
  MatrixX<double> refs = batch.array() + 2.0;
  GeneratorLossResult res =
      generator_loss(g_fwd, g_bwd, critic, batch, refs, 300.0, 100.0);
  CHECK(res.cycle == 0.0);
  CHECK(res.reference == 0.0);
  CHECK(res.total == res.adversarial);
}

TEST_CASE("generator loss decomposes into its recorded parts") {
  Rng rng(7);
  Mlp<double> g_fwd = glorot_mlp<double>({2, 6, 2}, 41);
  Mlp<double> g_bwd = glorot_mlp<double>({2, 6, 2}, 42);
  Mlp<double> critic = glorot_mlp<double>({2, 6, 1}, 43);
  MatrixX<double> batch = random_batch(8, 2, rng);
  MatrixX<double> refs = random_batch(8, 2, rng);

  GeneratorLossResult res =
      generator_loss(g_fwd, g_bwd, critic, batch, refs, 300.0, 100.0);
  CHECK(std::abs(res.total - (res.adversarial + 300.0 * res.cycle +
                              100.0 * res.reference)) < 1e-10);
  CHECK(res.cycle > 0.0);
  CHECK(res.reference > 0.0);

  MatrixX<double> misaligned = random_batch(7, 2, rng);
  CHECK_THROWS_AS(
      generator_loss(g_fwd, g_bwd, critic, batch, misaligned, 1.0, 1.0),
      DimensionError);
}

TEST_CASE("generator loss gradients match finite differences") {
  Rng rng(8);
  Mlp<double> g_fwd = glorot_mlp<double>({2, 6, 2}, 51);
  Mlp<double> g_bwd = glorot_mlp<double>({2, 6, 2}, 52);
  Mlp<double> critic = glorot_mlp<double>({2, 6, 1}, 53);
  MatrixX<double> batch = random_batch(5, 2, rng);
  MatrixX<double> refs = random_batch(5, 2, rng);
  const double lrec = 30.0, lref = 10.0;

  GeneratorLossResult res =
      generator_loss(g_fwd, g_bwd, critic, batch, refs, lrec, lref);
  const double h = 1e-5;
  for (std::size_t l = 0; l < g_fwd.weights.size(); ++l) {
    for (Index i = 0; i < g_fwd.weights[l].rows(); ++i) {
      for (Index j = 0; j < g_fwd.weights[l].cols(); ++j) {
        Mlp<double> plus = g_fwd, minus = g_fwd;
        plus.weights[l](i, j) += h;
        minus.weights[l](i, j) -= h;
        const double fd =
            (generator_loss(plus, g_bwd, critic, batch, refs, lrec, lref).total -
             generator_loss(minus, g_bwd, critic, batch, refs, lrec, lref)
                 .total) /
            (2 * h);
        check_close(res.forward_grads.weights[l](i, j), fd, 1e-4);
      }
    }
    for (Index i = 0; i < g_bwd.weights[l].rows(); ++i) {
      for (Index j = 0; j < g_bwd.weights[l].cols(); ++j) {
        Mlp<double> plus = g_bwd, minus = g_bwd;
        plus.weights[l](i, j) += h;
        minus.weights[l](i, j) -= h;
        const double fd =
            (generator_loss(g_fwd, plus, critic, batch, refs, lrec, lref)
                 .total -
             generator_loss(g_fwd, minus, critic, batch, refs, lrec, lref)
                 .total) /
            (2 * h);
        check_close(res.backward_grads.weights[l](i, j), fd, 1e-4);
      }
    }
  }
}

TEST_CASE("reference precomputation caches to disk bit for bit") {
  auto mu = gen_interval(0.0, 3.0, 4);
  auto nu = gen_interval(4.0, 7.0, 4);
  CostSpec spec;
  const auto dir = fresh_dir("otg_refs_cache_test");

  ReferenceMap<double> first = precompute_references(mu, nu, spec, dir);
  for (Index i = 0; i < 4; ++i) {
    CHECK(first.source_to_target(i, 0) ==
          doctest::Approx(4.0 + i).epsilon(1e-12));
  }
  // Exactly one cache file appears, and a second call returns its content.
  Index files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    (void)entry;
    ++files;
  }
  CHECK(files == 1);
  ReferenceMap<double> second = precompute_references(mu, nu, spec, dir);
  CHECK((second.source_to_target - first.source_to_target)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((second.target_to_source - first.target_to_source)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(second.provenance == first.provenance);

  // A different cost spec misses the cache.
  CostSpec angle_free = spec;
  angle_free.angle_mode = AngleMode::Linear;
  precompute_references(mu, nu, angle_free, dir);
  files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    (void)entry;
    ++files;
  }
  CHECK(files == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical measures precompute identity references") {
  Rng rng(9);
  MatrixX<double> pts = random_batch(5, 2, rng);
  auto mu = DiscreteMeasure<double>::uniform(pts);
  const auto dir = fresh_dir("otg_refs_identity_test");
  ReferenceMap<double> refs = precompute_references(mu, mu, CostSpec{}, dir);
  CHECK((refs.source_to_target - pts).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((refs.target_to_source - pts).cwiseAbs().maxCoeff() < 1e-12);
  std::filesystem::remove_all(dir);
}

TEST_CASE("training is deterministic and fills every epoch") {
  auto mu = gen_interval(0.0, 7.0, 8);
  auto nu = gen_interval(8.0, 15.0, 8);
  const auto dir = fresh_dir("otg_train_det_test");
  ReferenceMap<double> refs = precompute_references(mu, nu, CostSpec{}, dir);
  const CostMatrix<double> cost = sq_cost(mu, nu);

  TrainConfig config;
  config.epochs = 5;
  config.batch = 8;
  config.lambda_rec = 100.0;
  config.lambda_ref = 50.0;
  config.seed = 7;

  TrainReport a = train(mu, nu, refs, cost, config);
  TrainReport b = train(mu, nu, refs, cost, config);
  REQUIRE(a.epochs.size() == 5);
  CHECK(a.completed_epochs == 5);
  CHECK_FALSE(a.diverged);
  for (std::size_t e = 0; e < 5; ++e) {
    CHECK(a.epochs[e].critic_loss == b.epochs[e].critic_loss);
    CHECK(a.epochs[e].gen_total == b.epochs[e].gen_total);
    CHECK(a.epochs[e].s_uv == b.epochs[e].s_uv);
    CHECK(a.epochs[e].s_vu == b.epochs[e].s_vu);
  }
  for (std::size_t l = 0; l < a.g_uv.weights.size(); ++l) {
    CHECK((a.g_uv.weights[l] - b.g_uv.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.g_vu.weights[l] - b.g_vu.weights[l]).cwiseAbs().maxCoeff() == 0.0);
  }
  // The generator loss decomposition holds every epoch.
  for (const EpochStats& s : a.epochs) {
    CHECK(std::abs(s.gen_total -
                   (s.gen_adversarial + config.lambda_rec * s.gen_cycle +
                    config.lambda_ref * s.gen_reference)) < 1e-10);
  }

  // A different seed gives a genuinely different run.
  config.seed = 8;
  TrainReport c = train(mu, nu, refs, cost, config);
  CHECK(c.epochs[4].gen_total != a.epochs[4].gen_total);
  std::filesystem::remove_all(dir);
}

TEST_CASE("an absurd learning rate trips the divergence detector") {
  auto mu = gen_interval(0.0, 7.0, 8);
  auto nu = gen_interval(8.0, 15.0, 8);
  const auto dir = fresh_dir("otg_train_div_test");
  ReferenceMap<double> refs = precompute_references(mu, nu, CostSpec{}, dir);
  const CostMatrix<double> cost = sq_cost(mu, nu);

  TrainConfig config;
  config.epochs = 50;
  config.batch = 8;
  config.lr0 = 1e12;
  config.lambda_rec = 100.0;
  config.seed = 1;
  TrainReport report = train(mu, nu, refs, cost, config);
  CHECK(report.diverged);
  CHECK(report.completed_epochs < 50);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a short guided run pulls outputs toward the references") {
  auto mu = gen_interval(0.0, 7.0, 8);
  auto nu = gen_interval(8.0, 15.0, 8);
  const auto dir = fresh_dir("otg_train_pull_test");
  ReferenceMap<double> refs = precompute_references(mu, nu, CostSpec{}, dir);
  const CostMatrix<double> cost = sq_cost(mu, nu);

  TrainConfig config;
  config.epochs = 300;
  config.batch = 8;
  config.lambda_rec = 100.0;
  config.lambda_ref = 1e4;
  config.seed = 3;
  TrainReport report = train(mu, nu, refs, cost, config);
  REQUIRE(report.epochs.size() == 300);
  double early = 0.0, late = 0.0;
  for (std::size_t e = 0; e < 30; ++e) early += report.epochs[e].gen_reference;
  for (std::size_t e = 270; e < 300; ++e) late += report.epochs[e].gen_reference;
  CHECK(late < early);
  std::filesystem::remove_all(dir);
}

TEST_CASE("the reference loss responds monotonically to its weight") {
  auto mu = gen_interval(0.0, 7.0, 8);
  auto nu = gen_interval(8.0, 15.0, 8);
  const auto dir = fresh_dir("otg_train_mono_test");
  ReferenceMap<double> refs = precompute_references(mu, nu, CostSpec{}, dir);
  const CostMatrix<double> cost = sq_cost(mu, nu);

  std::vector<double> medians;
  for (double lref : {0.0, 50.0, 200.0, 1e4}) {
    std::vector<double> finals;
    for (std::uint64_t seed : {0, 1, 2}) {
      TrainConfig config;
      config.epochs = 400;
      config.batch = 8;
      config.lambda_rec = 100.0;
      config.lambda_ref = lref;
      config.seed = seed;
      TrainReport report = train(mu, nu, refs, cost, config);
      REQUIRE_FALSE(report.diverged);
      finals.push_back(report.epochs.back().gen_reference);
    }
    std::sort(finals.begin(), finals.end());
    medians.push_back(finals[1]);
  }
  // Once the weight is on, the achieved reference loss drops by orders of
  // magnitude and stays down.  The plateau values jitter at the optimizer's
  // limit-cycle amplitude, hence the 0.05 feature-unit slack (measured
  // plateau medians sit near 0.02 against an unguided 3.5).
  CHECK(medians[1] <= 0.1 * medians[0]);
  for (std::size_t k = 1; k < medians.size(); ++k) {
    CHECK(medians[k] <= medians[k - 1] + 0.05);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("a guided map generalizes to interpolated sources") {
  auto mu = gen_interval(0.0, 7.0, 8);
  auto nu = gen_interval(8.0, 15.0, 8);
  const auto dir = fresh_dir("otg_train_holdout_test");
  ReferenceMap<double> refs = precompute_references(mu, nu, CostSpec{}, dir);
  const CostMatrix<double> cost = sq_cost(mu, nu);

  TrainConfig config;
  config.epochs = 400;
  config.batch = 8;
  config.lambda_rec = 100.0;
  config.lambda_ref = 1e4;
  config.seed = 3;
  TrainReport report = train(mu, nu, refs, cost, config);
  REQUIRE_FALSE(report.diverged);

  const double s_train = evaluate_generalization(report.g_uv, mu, nu, cost);
  auto holdout = gen_interval(0.5, 6.5, 7);
  const double s_holdout = evaluate_generalization(
      report.g_uv, holdout, nu, sq_cost(holdout, nu));
  CHECK(s_holdout <= 3.0 * s_train);
  std::filesystem::remove_all(dir);
}

TEST_CASE("an untrained generator scores like a random bijection") {
  // Under the circular angle cost a collapsed map is no cheaper than an
  // arbitrary one, so fresh random nets land inside the random-bijection
  // score distribution (measured z-scores around 1.0 to 1.4).
  auto mu = gen_attributed_clusters(128, 4, AttributeLaw::uniform(0, 360),
                                    AttributeLaw::uniform(0, 255), 101);
  auto nu = gen_attributed_clusters(128, 4, AttributeLaw::uniform(0, 360),
                                    AttributeLaw::uniform(0, 255), 202);
  CostSpec spec;
  spec.kind = CostKind::Angle;
  const CostMatrix<double> cost = cost_matrix(mu, nu, spec);

  std::vector<double> draws;
  for (int k = 0; k < 100; ++k) {
    draws.push_back(
        mismatching_degree(random_bijection(128, 9000 + k), mu, cost));
  }
  double mean = 0.0;
  for (double v : draws) mean += v;
  mean /= static_cast<double>(draws.size());
  double sd = 0.0;
  for (double v : draws) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / static_cast<double>(draws.size()));

  for (std::uint64_t seed : {7, 77, 777}) {
    Mlp<double> untrained = glorot_mlp<double>({4, 64, 64, 4}, seed);
    const double s = evaluate_generalization(untrained, mu, nu, cost);
    CHECK(std::abs(s - mean) <= 3.0 * sd);
  }
}

TEST_CASE("generalization on the training set matches the training score") {
  auto mu = gen_interval(0.0, 7.0, 8);
  auto nu = gen_interval(8.0, 15.0, 8);
  const auto dir = fresh_dir("otg_eval_gen_test");
  ReferenceMap<double> refs = precompute_references(mu, nu, CostSpec{}, dir);
  const CostMatrix<double> cost = sq_cost(mu, nu);

  TrainConfig config;
  config.epochs = 5;
  config.batch = 8;
  config.seed = 11;
  TrainReport report = train(mu, nu, refs, cost, config);

  const double direct = mismatching_degree_generated(
      forward(report.g_uv, mu.points()).outputs, mu, nu, cost);
  const double via_eval = evaluate_generalization(report.g_uv, mu, nu, cost);
  CHECK(via_eval == direct);
  // The folded generator reproduces the last training-epoch score.
  CHECK(via_eval == doctest::Approx(report.epochs.back().s_uv).epsilon(1e-9));

  Mlp<double> wrong = glorot_mlp<double>({3, 4, 1}, 1);
  CHECK_THROWS_AS(evaluate_generalization(wrong, mu, nu, cost), DimensionError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("per-epoch CSV has a header and one row per epoch") {
  TrainReport report;
  report.epochs.resize(3);
  report.epochs[1].gen_total = -0.5;
  report.epochs[2].s_uv = 12.25;
  const auto path =
      std::filesystem::temp_directory_path() / "otg_train_report.csv";
  write_train_csv(path, report);
  const std::string text = read_text(path);
  CHECK(text.find("epoch,critic_loss,gen_total") == 0);
  Index rows = 0;
  for (char c : text) rows += c == '\n' ? 1 : 0;
  CHECK(rows == 4);
  CHECK(text.find("12.25") != std::string::npos);
  std::filesystem::remove(path);
}
