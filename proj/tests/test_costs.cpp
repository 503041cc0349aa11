#include <doctest.h>

#include <cstdlib>

#include "otg/costs.hpp"
#include "otg/datagen.hpp"
#include "otg/rng.hpp"
#include "otg/solvers.hpp"

using namespace otg;

namespace {

Image solid(int w, int h, int r, int g, int b) {
  return Image(w, h, {{r, g, b}});
}

// Equal-count multi-color image: k columns, column i in colors[i].
Image striped(const std::vector<std::array<int, 3>>& colors, int rows) {
  Image img(static_cast<int>(colors.size()), rows);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = static_cast<std::uint8_t>(colors[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)]);
      }
    }
  }
  return img;
}

}  // namespace

TEST_CASE("sq_euclidean") {
  Eigen::VectorXd u(3), v(3);
  u << 1.0, 2.0, 3.0;
  v = u;
  CHECK(sq_euclidean(u, v) == 0.0);

  Eigen::VectorXd a(1), b(1);
  a << 0.0;
  b << 32.0;
  CHECK(sq_euclidean(a, b) == 1024.0);

  Rng rng(13);
  Eigen::VectorXd x(5), y(5);
  for (int i = 0; i < 5; ++i) {
    x(i) = rng.uniform(-3.0, 3.0);
    y(i) = rng.uniform(-3.0, 3.0);
  }
  double oracle = 0.0;
  for (int i = 0; i < 5; ++i) oracle += (x(i) - y(i)) * (x(i) - y(i));
  CHECK(std::abs(sq_euclidean(x, y) - oracle) <= 1e-12);

  Eigen::VectorXd short_v(2);
  CHECK_THROWS_AS(sq_euclidean(x, short_v), DimensionError);
}

TEST_CASE("angle_cost") {
  CHECK(angle_cost(90.0, 90.0, AngleMode::Circular) == 0.0);
  CHECK(angle_cost(90.0, 90.0, AngleMode::Linear) == 0.0);
  CHECK(angle_cost(350.0, 10.0, AngleMode::Circular) == 400.0);
  CHECK(angle_cost(350.0, 10.0, AngleMode::Linear) == 115600.0);
  CHECK_THROWS_AS(angle_cost(360.0, 0.0, AngleMode::Circular), ValueError);
  CHECK_THROWS_AS(angle_cost(10.0, -0.5, AngleMode::Linear), ValueError);

  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const double a = rng.uniform(0.0, 360.0);
    const double b = rng.uniform(0.0, 360.0);
    const double circ = angle_cost(a, b, AngleMode::Circular);
    CHECK(circ <= 32400.0);
    CHECK(circ == angle_cost(b, a, AngleMode::Circular));
    CHECK(angle_cost(a, b, AngleMode::Linear) <= 360.0 * 360.0);
  }
}

TEST_CASE("avg_color_distance") {
  // Patches on a dark field so nothing is background.
  Image red = solid(4, 4, 255, 0, 0);
  Image blue = solid(4, 4, 0, 0, 255);
  CHECK(avg_color_distance(red, red) == 0.0);
  const double expect = std::sqrt(2.0 * 255.0 * 255.0);
  CHECK(avg_color_distance(red, blue) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(avg_color_distance(blue, red) ==
        doctest::Approx(expect).epsilon(1e-12));

  SUBCASE("white pixels are excluded from the mean") {
    Image half(4, 4);  // white by default
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 2; ++x) {
        half.at(x, y, 0) = 255;
        half.at(x, y, 1) = 0;
        half.at(x, y, 2) = 0;
      }
    }
    CHECK(avg_color_distance(half, red) == 0.0);
  }
  SUBCASE("near-white counts as background too") {
    Image faint = solid(2, 2, 250, 252, 255);
    CHECK_THROWS_AS(avg_color_distance(faint, red), ValueError);
    CHECK_THROWS_AS(avg_color_distance(red, faint), ValueError);
  }
  SUBCASE("pixel order does not matter") {
    Image a = striped({{{10, 20, 30}}, {{200, 100, 0}}}, 3);
    Image b = striped({{{200, 100, 0}}, {{10, 20, 30}}}, 3);
    Image probe = solid(2, 2, 0, 200, 0);
    CHECK(avg_color_distance(a, probe) ==
          doctest::Approx(avg_color_distance(b, probe)).epsilon(1e-15));
  }
}

TEST_CASE("combined_cost") {
  PointAttrs x, y;
  x.id = "x";
  y.id = "y";
  x.angle = 40.0;
  y.angle = 40.0;
  x.color = {{100, 100, 100}};
  y.color = {{100, 100, 100}};
  CHECK(combined_cost(x, y, 3.0) == 0.0);

  y.color = {{10, 10, 10}};
  CHECK(combined_cost(x, y, 0.0) == 0.0);

  x.angle = 0.0;
  y.angle = 10.0;
  x.color = {{50, 0, 0}};
  y.color = {{0, 0, 0}};
  // angle gap 10 degrees, color distance 50, lambda 2 -> 100 + 100
  CHECK(combined_cost(x, y, 2.0) == doctest::Approx(200.0).epsilon(1e-13));
  CHECK(combined_cost(x, y, 2.0) == combined_cost(y, x, 2.0));

  SUBCASE("missing attributes name the point") {
    PointAttrs bare;
    bare.id = "naked";
    bare.angle = 5.0;
    try {
      combined_cost(x, bare, 1.0);
      FAIL("expected AttributeError");
    } catch (const AttributeError& e) {
      CHECK(std::string(e.what()).find("naked") != std::string::npos);
    }
    bare.color = {{1, 2, 3}};
    bare.angle.reset();
    CHECK_THROWS_AS(combined_cost(x, bare, 1.0), AttributeError);
  }
}

TEST_CASE("lab_histogram") {
  SUBCASE("single color occupies one bin") {
    LabHistogram h = lab_histogram(solid(5, 3, 128, 128, 128));
    CHECK(h.occupied() == 1);
    CHECK(h.measure().weights()(0) == 1.0);
    // L = 53.585, a = b = 0 for mid gray: bins (4, 3, 4) on the 8-grid.
    CHECK(h.bin_ids()[0] == (4 * 8 + 3) * 8 + 4);
  }
  SUBCASE("two colors in equal counts split the mass") {
    Image img = striped({{{255, 0, 0}}, {{0, 0, 255}}}, 4);
    LabHistogram h = lab_histogram(img);
    REQUIRE(h.occupied() == 2);
    CHECK(h.measure().weights()(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(h.measure().weights()(1) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("four-pixel image lands in the reference bins") {
    Image img = striped({{{255, 0, 0}}, {{0, 255, 0}}, {{0, 0, 255}}, {{128, 128, 128}}}, 1);
    LabHistogram h = lab_histogram(img);
    REQUIRE(h.occupied() == 4);
    // Flat indices from the independent Lab oracle: red (4,6,6),
    // green (7,1,6), blue (2,6,0), gray (4,3,4).
    std::vector<Index> expect = {(2 * 8 + 6) * 8 + 0, (4 * 8 + 3) * 8 + 4,
                                 (4 * 8 + 6) * 8 + 6, (7 * 8 + 1) * 8 + 6};
    CHECK(h.bin_ids() == expect);
  }
  SUBCASE("background-only image is rejected") {
    CHECK_THROWS_AS(lab_histogram(solid(3, 3, 255, 255, 255)), ValueError);
    CHECK_THROWS_AS(lab_histogram(solid(3, 3, 251, 250, 253)), ValueError);
  }
  SUBCASE("bin centers invert bin indices") {
    for (Index flat : {0, 7, 64, 311, 511}) {
      const auto c = lab_bin_center(flat, 8);
      CHECK(lab_bin_index(c, 8) == flat);
    }
  }
}

TEST_CASE("histogram_wasserstein") {
  LabHistogram red = lab_histogram(solid(2, 2, 255, 0, 0));
  LabHistogram blue = lab_histogram(solid(2, 2, 0, 0, 255));

  CHECK(histogram_wasserstein(red, red) == 0.0);

  const auto cr = lab_bin_center(red.bin_ids()[0], 8);
  const auto cb = lab_bin_center(blue.bin_ids()[0], 8);
  const double expect = std::sqrt(
      (cr[0] - cb[0]) * (cr[0] - cb[0]) + (cr[1] - cb[1]) * (cr[1] - cb[1]) +
      (cr[2] - cb[2]) * (cr[2] - cb[2]));
  CHECK(histogram_wasserstein(red, blue) ==
        doctest::Approx(expect).epsilon(1e-12));

  SUBCASE("exactly symmetric") {
    Rng rng(3);
    for (int t = 0; t < 5; ++t) {
      std::vector<std::array<int, 3>> c1, c2;
      for (int k = 0; k < 5; ++k) {
        c1.push_back({{static_cast<int>(rng.bounded(240)),
                       static_cast<int>(rng.bounded(240)),
                       static_cast<int>(rng.bounded(240))}});
        c2.push_back({{static_cast<int>(rng.bounded(240)),
                       static_cast<int>(rng.bounded(240)),
                       static_cast<int>(rng.bounded(240))}});
      }
      LabHistogram h1 = lab_histogram(striped(c1, 2 + t));
      LabHistogram h2 = lab_histogram(striped(c2, 3));
      CHECK(histogram_wasserstein(h1, h2) == histogram_wasserstein(h2, h1));
    }
  }
  SUBCASE("triangle inequality under the exact inner solver") {
    Rng rng(17);
    InnerSolverSpec exact{InnerSolverSpec::Method::Exact, 0.0};
    for (int t = 0; t < 12; ++t) {
      auto random_hist = [&rng]() {
        std::vector<std::array<int, 3>> colors;
        const int k = 2 + static_cast<int>(rng.bounded(5));
        for (int i = 0; i < k; ++i) {
          colors.push_back({{static_cast<int>(rng.bounded(249)),
                             static_cast<int>(rng.bounded(249)),
                             static_cast<int>(rng.bounded(249))}});
        }
        return lab_histogram(striped(colors, 1 + static_cast<int>(rng.bounded(4))));
      };
      LabHistogram a = random_hist(), b = random_hist(), c = random_hist();
      const double ab = histogram_wasserstein(a, b, exact);
      const double bc = histogram_wasserstein(b, c, exact);
      const double ac = histogram_wasserstein(a, c, exact);
      CHECK(ac <= ab + bc + 1e-6);
    }
  }
  SUBCASE("six-bin exact solve matches the brute-force oracle") {
    Rng rng(29);
    for (int t = 0; t < 8; ++t) {
      auto six_colors = [&rng]() {
        std::vector<std::array<int, 3>> colors;
        std::vector<Index> seen;
        while (colors.size() < 6) {
          std::array<int, 3> c = {{static_cast<int>(rng.bounded(249)),
                                   static_cast<int>(rng.bounded(249)),
                                   static_cast<int>(rng.bounded(249))}};
          const Index bin = lab_bin_index(rgb_to_lab(c[0], c[1], c[2]), 8);
          if (std::find(seen.begin(), seen.end(), bin) != seen.end()) continue;
          seen.push_back(bin);
          colors.push_back(c);
        }
        return colors;
      };
      LabHistogram h1 = lab_histogram(striped(six_colors(), 2));
      LabHistogram h2 = lab_histogram(striped(six_colors(), 2));
      REQUIRE(h1.occupied() == 6);
      REQUIRE(h2.occupied() == 6);

      MatrixX<double> ground(6, 6);
      for (Index i = 0; i < 6; ++i) {
        for (Index j = 0; j < 6; ++j) {
          ground(i, j) =
              (h1.measure().points().row(i) - h2.measure().points().row(j))
                  .norm();
        }
      }
      SolveResult<double> brute = brute_force_solve(
          h1.measure(), h2.measure(), CostMatrix<double>(ground));
      const double via_exact = histogram_wasserstein(
          h1, h2, InnerSolverSpec{InnerSolverSpec::Method::Exact, 0.0});
      CHECK(std::abs(via_exact - brute.objective) <= 1e-9);
    }
  }
  SUBCASE("sinkhorn inner solver approximates the exact one") {
    const double exact = histogram_wasserstein(red, blue);
    const double approx = histogram_wasserstein(
        red, blue, InnerSolverSpec{InnerSolverSpec::Method::Sinkhorn, 0.0});
    CHECK(std::abs(approx - exact) <= 0.05 * std::max(exact, 1.0));
  }
  SUBCASE("grid mismatch is structural") {
    LabHistogram coarse = lab_histogram(solid(2, 2, 255, 0, 0), 4);
    CHECK_THROWS_AS(histogram_wasserstein(red, coarse), DimensionError);
  }
}

TEST_CASE("cost matrix assembly") {
  SUBCASE("sq_euclidean zero diagonal and pointwise agreement") {
    Rng rng(41);
    MatrixX<double> p(4, 3);
    for (Index i = 0; i < 4; ++i) {
      for (Index k = 0; k < 3; ++k) p(i, k) = rng.uniform(-2.0, 2.0);
    }
    DiscreteMeasure<double> mu = DiscreteMeasure<double>::uniform(p);
    CostSpec spec;
    CostMatrix<double> cm = cost_matrix(mu, mu, spec);
    for (Index i = 0; i < 4; ++i) {
      CHECK(cm(i, i) == 0.0);
      for (Index j = 0; j < 4; ++j) {
        CHECK(cm(i, j) ==
              sq_euclidean(p.row(i).transpose(), p.row(j).transpose()));
        CHECK(cm(i, j) == cm(j, i));
      }
    }
  }
  SUBCASE("2x3 rectangle matches pointwise calls") {
    MatrixX<double> a(2, 2), b(3, 2);
    a << 0.0, 0.0, 1.0, 1.0;
    b << 2.0, 0.0, 0.0, 3.0, -1.0, -1.0;
    CostSpec spec;
    CostMatrix<double> cm = cost_matrix(DiscreteMeasure<double>::uniform(a),
                                        DiscreteMeasure<double>::uniform(b), spec);
    REQUIRE(cm.rows() == 2);
    REQUIRE(cm.cols() == 3);
    for (Index i = 0; i < 2; ++i) {
      for (Index j = 0; j < 3; ++j) {
        CHECK(cm(i, j) ==
              sq_euclidean(a.row(i).transpose(), b.row(j).transpose()));
      }
    }
  }
  SUBCASE("attribute costs match pointwise calls and report missing ids") {
    DiscreteMeasure<double> m = gen_attributed_clusters(
        12, 3, AttributeLaw::uniform(0.0, 360.0),
        AttributeLaw::gaussian(100.0, 30.0), 7);
    CostSpec spec;
    spec.kind = CostKind::Combined;
    spec.lambda_color = 1.5;
    CostMatrix<double> cm = cost_matrix(m, m, spec);
    for (Index i = 0; i < 12; ++i) {
      for (Index j = 0; j < 12; ++j) {
        CHECK(cm(i, j) == combined_cost(m.attr(i), m.attr(j), 1.5));
      }
    }

    spec.kind = CostKind::Angle;
    CostMatrix<double> am = cost_matrix(m, m, spec);
    CHECK(am(1, 2) ==
          angle_cost(*m.attr(1).angle, *m.attr(2).angle, AngleMode::Circular));

    MatrixX<double> p(2, 1);
    p << 0.0, 1.0;
    std::vector<PointAttrs> attrs(2);
    attrs[0].id = "with";
    attrs[0].angle = 10.0;
    attrs[1].id = "without";
    DiscreteMeasure<double> partial = DiscreteMeasure<double>::uniform(p, attrs);
    try {
      cost_matrix(partial, partial, spec);
      FAIL("expected AttributeError");
    } catch (const AttributeError& e) {
      CHECK(std::string(e.what()).find("without") != std::string::npos);
    }
  }
  SUBCASE("combined without lambda_color is rejected") {
    DiscreteMeasure<double> m = gen_attributed_clusters(
        4, 2, AttributeLaw::uniform(0.0, 360.0),
        AttributeLaw::uniform(0.0, 255.0), 7);
    CostSpec spec;
    spec.kind = CostKind::Combined;
    CHECK_THROWS_AS(cost_matrix(m, m, spec), ValueError);
  }
  SUBCASE("histogram kind goes through the cache and is cache-transparent") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "otg_costs_test";
    fs::create_directories(dir);

    LinesDataset lines = gen_vertical_lines(4, 12, 'A');
    for (std::size_t k = 0; k < lines.images.size(); ++k) {
      write_ppm(lines.images[k],
                dir / (lines.measure.attr(static_cast<Index>(k)).id + ".ppm"));
    }
    CostSpec spec;
    spec.kind = CostKind::HistogramWasserstein;

    HistogramCache cached = HistogramCache::for_ppm_dir(dir, 8, true);
    HistogramCache uncached = HistogramCache::for_ppm_dir(dir, 8, false);
    CostMatrix<double> with = cost_matrix(lines.measure, lines.measure, spec, cached);
    CostMatrix<double> without =
        cost_matrix(lines.measure, lines.measure, spec, uncached);
    CHECK(with.entries() == without.entries());
    CHECK(cached.size() == 4);
    CHECK(uncached.size() == 0);
    for (Index i = 0; i < 4; ++i) CHECK(with(i, i) == 0.0);

    CHECK_THROWS_AS(cost_matrix(lines.measure, lines.measure, spec), ValueError);
    fs::remove_all(dir);
  }
  SUBCASE("thread cap does not change entries") {
    DiscreteMeasure<double> m = gen_attributed_clusters(
        24, 3, AttributeLaw::uniform(0.0, 360.0),
        AttributeLaw::gaussian(90.0, 20.0), 3);
    CostSpec spec;
    spec.kind = CostKind::Combined;
    spec.lambda_color = 2.0;
    CostMatrix<double> parallel = cost_matrix(m, m, spec);
    setenv("OTGUIDE_THREADS", "1", 1);
    CostMatrix<double> serial = cost_matrix(m, m, spec);
    unsetenv("OTGUIDE_THREADS");
    CHECK(parallel.entries() == serial.entries());
  }
}

TEST_CASE("cost spec json round-trip") {
  CostSpec spec;
  spec.kind = CostKind::HistogramWasserstein;
  spec.histogram_bins = 6;
  spec.inner.method = InnerSolverSpec::Method::Sinkhorn;
  spec.inner.epsilon = 0.25;
  CostSpec back = CostSpec::from_json(spec.to_json());
  CHECK(back.kind == spec.kind);
  CHECK(back.histogram_bins == 6);
  CHECK(back.inner.method == InnerSolverSpec::Method::Sinkhorn);
  CHECK(back.inner.epsilon == 0.25);
  CHECK(back.canonical_id() == spec.canonical_id());

  CostSpec combined = CostSpec::from_json(nlohmann::ordered_json{
      {"kind", "combined"}, {"angle_mode", "linear"}, {"lambda_color", 4.0}});
  CHECK(combined.kind == CostKind::Combined);
  CHECK(combined.angle_mode == AngleMode::Linear);
  CHECK(combined.lambda_color == 4.0);

  CHECK_THROWS_AS(CostSpec::from_json({{"kind", "nope"}}), ValueError);
  CHECK_THROWS_AS(
      CostSpec::from_json({{"kind", "combined"}, {"lambda_color", -1.0}}),
      ValueError);
  CHECK_THROWS_AS(CostSpec::from_json({{"kind", "angle"}, {"bins", 1}}),
                  ValueError);
  CHECK_THROWS_AS(CostSpec::from_json(nlohmann::ordered_json::array()),
                  ValueError);
}
