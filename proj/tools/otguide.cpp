// Command line front end: dataset generation, transport solves, mapping
// evaluation, and guided training.  Every command writes a manifest next to
// its outputs and draws all randomness from --seed.

#include <CLI11.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "otg/costs.hpp"
#include "otg/datagen.hpp"
#include "otg/histogram.hpp"
#include "otg/mapping.hpp"
#include "otg/neural.hpp"
#include "otg/rng.hpp"
#include "otg/serialize.hpp"
#include "otg/solvers.hpp"
#include "otg/trainer.hpp"

namespace fs = std::filesystem;
using namespace otg;

namespace {

constexpr const char* kVersion = "otguide 0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitDiverged = 4;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

int thread_budget() {
  if (const char* env = std::getenv("OTGUIDE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Manifest written alongside every command's outputs.  The wall-clock field
// makes manifests the one artifact that is not byte-stable across reruns.
void write_manifest(const fs::path& path, const std::string& command,
                    const json& config, const json& inputs,
                    const std::vector<std::string>& outputs, double seconds) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["duration_seconds"] = seconds;
  m["version"] = kVersion;
  write_text_atomic(path, m.dump(2) + "\n");
}

fs::path manifest_for_file(const fs::path& out) {
  return fs::path(out.string() + ".manifest.json");
}

// --cost accepts inline JSON, a path to a JSON file, or a bare kind name.
CostSpec parse_cost_arg(const std::string& arg) {
  std::string text = arg;
  if (!arg.empty() && arg.front() != '{') {
    if (fs::exists(arg)) {
      text = read_text(arg);
    } else {
      CostSpec spec;
      spec.kind = cost_kind_from_name(arg);
      return spec;
    }
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValueError(std::string("--cost: ") + e.what());
  }
  return CostSpec::from_json(j);
}

CostMatrix<double> build_cost(const DiscreteMeasure<double>& mu,
                              const DiscreteMeasure<double>& nu,
                              const CostSpec& spec,
                              const std::string& images_dir) {
  if (spec.kind == CostKind::HistogramWasserstein) {
    if (images_dir.empty()) {
      throw ValueError(
          "the histogram cost reads images; pass --images <dir of id.ppm "
          "files>");
    }
    HistogramCache cache =
        HistogramCache::for_ppm_dir(images_dir, spec.histogram_bins);
    return cost_matrix(mu, nu, spec, cache);
  }
  return cost_matrix(mu, nu, spec);
}

json input_hashes(const std::vector<std::pair<std::string, fs::path>>& files,
                  const CostSpec* spec = nullptr) {
  json j = json::object();
  for (const auto& [key, path] : files) {
    j[key] = "0x" + hex64(fnv1a64_file(path));
  }
  if (spec != nullptr) j["cost"] = spec->to_json();
  return j;
}

AttributeLaw parse_law(const std::string& arg) {
  // "uniform:lo:hi" or "gaussian:mean:sd"
  const auto c1 = arg.find(':');
  const auto c2 = arg.find(':', c1 == std::string::npos ? 0 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw ValueError("attribute law must look like uniform:lo:hi or "
                     "gaussian:mean:sd, got \"" +
                     arg + "\"");
  }
  const std::string kind = arg.substr(0, c1);
  double a = 0.0, b = 0.0;
  try {
    a = std::stod(arg.substr(c1 + 1, c2 - c1 - 1));
    b = std::stod(arg.substr(c2 + 1));
  } catch (const std::exception&) {
    throw ValueError("attribute law has non-numeric parameters: \"" + arg +
                     "\"");
  }
  if (kind == "uniform") return AttributeLaw::uniform(a, b);
  if (kind == "gaussian") return AttributeLaw::gaussian(a, b);
  throw ValueError("unknown attribute law kind \"" + kind + "\"");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// The scalar shown on scatter plots and in manifests: the angle attribute
// when the dataset carries one on every point, the first feature otherwise.
VectorX<double> attribute_readout(const DiscreteMeasure<double>& m) {
  bool all_angles = m.size() > 0;
  for (Index i = 0; i < m.size(); ++i) {
    all_angles = all_angles && m.attrs()[static_cast<std::size_t>(i)]
                                   .angle.has_value();
  }
  VectorX<double> out(m.size());
  for (Index i = 0; i < m.size(); ++i) {
    out(i) = all_angles ? *m.attrs()[static_cast<std::size_t>(i)].angle
                        : m.points()(i, 0);
  }
  return out;
}

// Pairwise concordance of the mapping, in [-1, 1]; ties count as neither.
double kendall_tau(const VectorX<double>& x, const VectorX<double>& y) {
  const Index n = x.size();
  if (n < 2) return 1.0;
  long long concordant = 0, discordant = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double s = (x(i) - x(j)) * (y(i) - y(j));
      if (s > 0) ++concordant;
      if (s < 0) ++discordant;
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(concordant - discordant) / pairs;
}

void write_scatter_svg(const fs::path& path, const VectorX<double>& src,
                       const VectorX<double>& mapped) {
  const double lo = std::min(src.minCoeff(), mapped.minCoeff());
  const double hi = std::max(src.maxCoeff(), mapped.maxCoeff());
  const double span = hi > lo ? hi - lo : 1.0;
  const int size = 420, margin = 40;
  const double scale = (size - 2.0 * margin) / span;
  auto sx = [&](double v) { return margin + (v - lo) * scale; };
  auto sy = [&](double v) { return size - margin - (v - lo) * scale; };

  std::string svg;
  char buf[256];
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"420\" "
         "height=\"420\" viewBox=\"0 0 420 420\">\n";
  svg += "<rect width=\"420\" height=\"420\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                "stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
                sx(lo), sy(lo), sx(hi), sy(hi));
  svg += buf;
  for (Index i = 0; i < src.size(); ++i) {
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" "
                  "fill=\"#3b6ea5\" fill-opacity=\"0.8\"/>\n",
                  sx(src(i)), sy(mapped(i)));
    svg += buf;
  }
  svg += "<text x=\"210\" y=\"412\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\">source attribute</text>\n";
  svg += "<text x=\"14\" y=\"210\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 14 210)\">mapped attribute</text>\n";
  svg += "</svg>\n";
  write_text_atomic(path, svg);
}

// ---- gen -----------------------------------------------------------------

int cmd_gen_lines(Index n, int size, const std::string& style,
                  const fs::path& out_dir) {
  Timer timer;
  if (style != "A" && style != "B") {
    throw ValueError("--style must be A or B, got \"" + style + "\"");
  }
  LinesDataset ds = gen_vertical_lines(n, size, style[0]);
  fs::create_directories(out_dir / "images");
  std::vector<std::string> outputs;
  for (Index k = 0; k < n; ++k) {
    const std::string& id = ds.measure.attrs()[static_cast<std::size_t>(k)].id;
    const fs::path img = out_dir / "images" / (id + ".ppm");
    write_ppm(ds.images[static_cast<std::size_t>(k)], img);
    outputs.push_back("images/" + id + ".ppm");
  }
  json header = {{"kind", "lines"}, {"n", n}, {"size", size}, {"style", style}};
  write_dataset_jsonl(out_dir / "dataset.jsonl", ds.measure, header);
  outputs.insert(outputs.begin(), "dataset.jsonl");
  write_manifest(out_dir / "manifest.json", "gen lines", header, json::object(),
                 outputs, timer.seconds());
  std::printf("wrote %" PRId64 " images and dataset.jsonl to %s\n", n,
              out_dir.string().c_str());
  return kExitOk;
}

int cmd_gen_interval(double lo, double hi, Index n, const fs::path& out) {
  Timer timer;
  DiscreteMeasure<double> m = gen_interval(lo, hi, n);
  json header = {{"kind", "interval"}, {"lo", lo}, {"hi", hi}, {"n", n}};
  write_dataset_jsonl(out, m, header);
  write_manifest(manifest_for_file(out), "gen interval", header, json::object(),
                 {out.filename().string()}, timer.seconds());
  std::printf("wrote %" PRId64 " points to %s\n", n, out.string().c_str());
  return kExitOk;
}

int cmd_gen_clusters(Index n, Index d, const std::string& angle_law,
                     const std::string& color_law, std::uint64_t seed,
                     double noise_sd, const fs::path& out) {
  Timer timer;
  DiscreteMeasure<double> m = gen_attributed_clusters(
      n, d, parse_law(angle_law), parse_law(color_law), seed, noise_sd);
  json header = {{"kind", "clusters"},    {"n", n},
                 {"d", d},                {"angle_law", angle_law},
                 {"color_law", color_law}, {"seed", seed},
                 {"noise_sd", noise_sd}};
  write_dataset_jsonl(out, m, header);
  write_manifest(manifest_for_file(out), "gen clusters", header, json::object(),
                 {out.filename().string()}, timer.seconds());
  std::printf("wrote %" PRId64 " points to %s\n", n, out.string().c_str());
  return kExitOk;
}

// ---- solve ---------------------------------------------------------------

int cmd_solve(const fs::path& mu_path, const fs::path& nu_path,
              const std::string& cost_arg, const std::string& method,
              double epsilon, const std::string& images_dir,
              const fs::path& out) {
  Timer timer;
  const DiscreteMeasure<double> mu = load_dataset_jsonl(mu_path);
  const DiscreteMeasure<double> nu = load_dataset_jsonl(nu_path);
  const CostSpec spec = parse_cost_arg(cost_arg);
  const CostMatrix<double> cost = build_cost(mu, nu, spec, images_dir);

  const SolveResult<double> result = [&] {
    if (method == "exact") return solve_exact(mu, nu, cost);
    if (method == "sinkhorn") {
      SinkhornConfig<double> sc;
      sc.epsilon = epsilon;
      return solve_sinkhorn(mu, nu, cost, sc);
    }
    throw ValueError("--method must be exact or sinkhorn, got \"" + method +
                     "\"");
  }();

  json extra;
  extra["method"] = method;
  if (method == "sinkhorn") extra["epsilon"] = epsilon;
  extra["cost"] = spec.to_json();
  extra["objective"] = result.objective;
  extra["iterations"] = result.iterations;
  extra["converged"] = result.converged;
  if (result.dual_source) {
    extra["dual_source"] = std::vector<double>(
        result.dual_source->begin(), result.dual_source->end());
    extra["dual_target"] = std::vector<double>(
        result.dual_target->begin(), result.dual_target->end());
  }
  write_plan_json(out, result.plan, extra);
  write_manifest(manifest_for_file(out), "solve",
                 json{{"method", method},
                      {"epsilon", method == "sinkhorn" ? json(epsilon) : json()},
                      {"cost", spec.to_json()}},
                 input_hashes({{"mu", mu_path}, {"nu", nu_path}}),
                 {out.filename().string()}, timer.seconds());
  std::printf("objective %.6f\n", result.objective);
  if (!result.converged) {
    std::fprintf(stderr,
                 "solver stopped before convergence after %" PRId64
                 " iterations; plan written with converged=false\n",
                 result.iterations);
    return kExitSolver;
  }
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalRow {
  std::string method;
  double s = 0.0;
  bool coupling = false;  // participates in the optimality sanity check
};

void warn_on_collapse(const std::string& label, const std::vector<Index>& a,
                      Index targets) {
  std::vector<Index> seen = a;
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  const Index distinct = static_cast<Index>(seen.size());
  if (distinct < std::min<Index>(static_cast<Index>(a.size()), targets)) {
    std::fprintf(stderr,
                 "warning: %s collapses %zu sources onto %" PRId64
                 " distinct target(s)\n",
                 label.c_str(), a.size(), distinct);
  }
}

int cmd_eval(const fs::path& mu_path, const fs::path& nu_path,
             const std::string& cost_arg, const std::string& source,
             std::uint64_t seed, const std::string& images_dir,
             const fs::path& out) {
  Timer timer;
  const DiscreteMeasure<double> mu = load_dataset_jsonl(mu_path);
  const DiscreteMeasure<double> nu = load_dataset_jsonl(nu_path);
  const CostSpec spec = parse_cost_arg(cost_arg);
  const CostMatrix<double> cost = build_cost(mu, nu, spec, images_dir);
  const bool square = mu.size() == nu.size();

  std::vector<EvalRow> rows;
  if (source == "nn") {
    DeterministicMap map = nearest_neighbor_map(cost);
    warn_on_collapse("the nearest-neighbor map", map.assignment, nu.size());
    rows.push_back({"nn", mismatching_degree(map, mu, cost), false});
  } else if (source.rfind("random:", 0) == 0) {
    if (!square) {
      throw ValueError("random bijection needs equally sized datasets");
    }
    const std::uint64_t s =
        std::strtoull(source.c_str() + 7, nullptr, 10);
    rows.push_back({source,
                    mismatching_degree(random_bijection(mu.size(), s), mu,
                                       cost),
                    true});
  } else {
    if (!fs::exists(source)) {
      throw IoError("mapping source \"" + source +
                    "\" is not a file, \"nn\", or \"random:<seed>\"");
    }
    json j;
    try {
      j = json::parse(read_text(source));
    } catch (const json::exception& e) {
      throw IoError("could not parse " + source + ": " + e.what());
    }
    const std::string name = fs::path(source).filename().string();
    if (j.contains("entries")) {
      TransportPlan<double> plan = load_plan_json(source);
      rows.push_back(
          {"plan:" + name, mismatching_degree(plan, cost), true});
    } else if (j.contains("dims")) {
      Mlp<double> net = load_mlp_json(source);
      const MatrixX<double> outputs = forward(net, mu.points()).outputs;
      DeterministicMap snapped;
      snapped.assignment = nearest_points(outputs, nu.points());
      warn_on_collapse("the generator", snapped.assignment, nu.size());
      rows.push_back({"checkpoint:" + name,
                      mismatching_degree_generated(outputs, mu, nu, cost),
                      false});
    } else {
      throw IoError(source + " is neither a plan nor a checkpoint file");
    }
  }

  // Baselines for the table: the exact plan, the nearest-neighbor map, and
  // (square case) a random bijection.
  const double s_ot =
      mismatching_degree(solve_exact(mu, nu, cost).plan, cost);
  rows.push_back({"ot", s_ot, true});
  if (rows.front().method != "nn") {
    rows.push_back({"nn",
                    mismatching_degree(nearest_neighbor_map(cost), mu, cost),
                    false});
  }
  const std::string random_label = "random:" + std::to_string(seed);
  if (square && rows.front().method != random_label) {
    rows.push_back({random_label,
                    mismatching_degree(random_bijection(mu.size(), seed), mu,
                                       cost),
                    true});
  }

  // The exact plan is optimal over couplings; deterministic maps (nn, a
  // generator) do not preserve the target marginal and may score below it.
  for (const EvalRow& row : rows) {
    if (row.coupling && row.s < s_ot - 1e-9) {
      std::fprintf(stderr,
                   "warning: %s scored %.17g, below the exact optimum %.17g; "
                   "this should be impossible\n",
                   row.method.c_str(), row.s, s_ot);
    }
  }

  std::string csv = "method,S\n";
  char buf[128];
  for (const EvalRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g\n", row.method.c_str(), row.s);
    csv += buf;
  }
  write_text_atomic(out, csv);
  write_manifest(manifest_for_file(out), "eval",
                 json{{"source", source}, {"cost", spec.to_json()},
                      {"seed", seed}},
                 input_hashes({{"mu", mu_path}, {"nu", nu_path}}),
                 {out.filename().string()}, timer.seconds());
  std::printf("S %.6f\n", rows.front().s);
  return kExitOk;
}

// ---- train ---------------------------------------------------------------

struct TrainRun {
  TrainConfig config;
  fs::path dir;
};

// Executes one training run and writes its artifacts; returns diverged.
bool run_training(const TrainRun& run, const DiscreteMeasure<double>& mu,
                  const DiscreteMeasure<double>& nu,
                  const ReferenceMap<double>& refs,
                  const CostMatrix<double>& cost, const json& inputs) {
  Timer timer;
  fs::create_directories(run.dir);
  TrainReport report = train(mu, nu, refs, cost, run.config);

  write_train_csv(run.dir / "report.csv", report);
  save_mlp_json(run.dir / "g_uv.json", report.g_uv);
  save_mlp_json(run.dir / "g_vu.json", report.g_vu);
  save_mlp_json(run.dir / "d_u.json", report.critic_u);
  save_mlp_json(run.dir / "d_v.json", report.critic_v);

  // Attribute scatter: where each source lands, by nearest target point.
  const MatrixX<double> outputs = forward(report.g_uv, mu.points()).outputs;
  const std::vector<Index> snapped = nearest_points(outputs, nu.points());
  const VectorX<double> src_attr = attribute_readout(mu);
  const VectorX<double> nu_attr = attribute_readout(nu);
  VectorX<double> mapped_attr(mu.size());
  for (Index i = 0; i < mu.size(); ++i) {
    mapped_attr(i) = nu_attr(snapped[static_cast<std::size_t>(i)]);
  }
  write_scatter_svg(run.dir / "mapping.svg", src_attr, mapped_attr);

  json config_json = run.config.to_json();
  json stats;
  stats["diverged"] = report.diverged;
  stats["completed_epochs"] = report.completed_epochs;
  stats["max_attribute_deviation"] =
      (mapped_attr - src_attr).cwiseAbs().maxCoeff();
  stats["kendall_tau"] = kendall_tau(src_attr, mapped_attr);
  if (!report.epochs.empty()) {
    stats["final_s_uv"] = report.epochs.back().s_uv;
    stats["final_s_vu"] = report.epochs.back().s_vu;
  }
  config_json["result"] = stats;
  write_manifest(run.dir / "manifest.json", "train", config_json, inputs,
                 {"report.csv", "g_uv.json", "g_vu.json", "d_u.json",
                  "d_v.json", "mapping.svg"},
                 timer.seconds());
  return report.diverged;
}

int cmd_train(const fs::path& mu_path, const fs::path& nu_path,
              const std::string& cost_arg, const std::string& config_path,
              bool seed_given, std::uint64_t seed,
              const std::string& lambda_list, const std::string& images_dir,
              const fs::path& out_dir) {
  Timer timer;
  const DiscreteMeasure<double> mu = load_dataset_jsonl(mu_path);
  const DiscreteMeasure<double> nu = load_dataset_jsonl(nu_path);
  const CostSpec spec = parse_cost_arg(cost_arg);
  const CostMatrix<double> cost = build_cost(mu, nu, spec, images_dir);

  TrainConfig base;
  if (!config_path.empty()) {
    json j;
    try {
      j = json::parse(read_text(config_path));
    } catch (const json::exception& e) {
      throw ValueError(std::string("--config: ") + e.what());
    }
    base = TrainConfig::from_json(j);
  }
  if (seed_given) base.seed = seed;

  std::vector<double> grid;
  if (!lambda_list.empty()) {
    std::size_t pos = 0;
    while (pos <= lambda_list.size()) {
      const std::size_t comma = lambda_list.find(',', pos);
      const std::string tok = lambda_list.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        grid.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ValueError("--lambda-ref: \"" + tok + "\" is not a number");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  } else {
    grid.push_back(base.lambda_ref);
  }

  fs::create_directories(out_dir);
  const ReferenceMap<double> refs = [&] {
    if (spec.kind == CostKind::HistogramWasserstein) {
      HistogramCache cache =
          HistogramCache::for_ppm_dir(images_dir, spec.histogram_bins);
      return precompute_references(mu, nu, spec, cache,
                                   out_dir / "refs_cache");
    }
    return precompute_references(mu, nu, spec, out_dir / "refs_cache");
  }();

  const json inputs = input_hashes({{"mu", mu_path}, {"nu", nu_path}}, &spec);
  const bool sweep = grid.size() > 1;
  std::vector<TrainRun> runs;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    TrainRun run;
    run.config = base;
    run.config.lambda_ref = grid[k];
    // Sweep runs draw independent seeds so their streams never collide.
    if (sweep) run.config.seed = derive_seed(base.seed, k);
    run.config.validate();
    run.dir = sweep ? out_dir / ("lref_" + format_double(grid[k])) : out_dir;
    runs.push_back(run);
  }

  std::vector<bool> diverged(runs.size(), false);
  const int workers =
      std::min<int>(thread_budget(), static_cast<int>(runs.size()));
  if (workers > 1) {
    std::vector<std::future<bool>> futures;
    futures.reserve(runs.size());
    for (const TrainRun& run : runs) {
      futures.push_back(std::async(std::launch::async, [&run, &mu, &nu, &refs,
                                                        &cost, &inputs] {
        return run_training(run, mu, nu, refs, cost, inputs);
      }));
    }
    for (std::size_t k = 0; k < futures.size(); ++k) {
      diverged[k] = futures[k].get();
    }
  } else {
    for (std::size_t k = 0; k < runs.size(); ++k) {
      diverged[k] = run_training(runs[k], mu, nu, refs, cost, inputs);
    }
  }

  if (sweep) {
    std::vector<std::string> outputs;
    for (const TrainRun& run : runs) {
      outputs.push_back(run.dir.filename().string() + "/");
    }
    json config_json = base.to_json();
    config_json["lambda_ref_grid"] = grid;
    write_manifest(out_dir / "manifest.json", "train sweep", config_json,
                   inputs, outputs, timer.seconds());
  }

  bool any_diverged = false;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (diverged[k]) {
      any_diverged = true;
      std::fprintf(stderr,
                   "training diverged at lambda_ref=%s; last checkpoint kept "
                   "in %s\n",
                   format_double(runs[k].config.lambda_ref).c_str(),
                   runs[k].dir.string().c_str());
    } else {
      std::printf("lambda_ref=%s done -> %s\n",
                  format_double(runs[k].config.lambda_ref).c_str(),
                  runs[k].dir.string().c_str());
    }
  }
  return any_diverged ? kExitDiverged : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal-transport guided mapping toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // gen
  CLI::App* gen = app.add_subcommand("gen", "Generate synthetic datasets");
  gen->require_subcommand(1);

  CLI::App* gen_lines = gen->add_subcommand("lines", "Vertical-line images");
  Index gl_n = 32;
  int gl_size = 64;
  std::string gl_style = "A", gl_out;
  gen_lines->add_option("--n", gl_n, "Number of images");
  gen_lines->add_option("--size", gl_size, "Image side length");
  gen_lines->add_option("--style", gl_style, "Line style, A or B");
  gen_lines->add_option("--out", gl_out, "Output directory")->required();

  CLI::App* gen_interval = gen->add_subcommand("interval", "1-d grid points");
  double gi_lo = 0.0, gi_hi = 31.0;
  Index gi_n = 32;
  std::string gi_out;
  gen_interval->add_option("--lo", gi_lo, "Lowest point");
  gen_interval->add_option("--hi", gi_hi, "Highest point");
  gen_interval->add_option("--n", gi_n, "Number of points");
  gen_interval->add_option("--out", gi_out, "Output JSONL file")->required();

  CLI::App* gen_clusters =
      gen->add_subcommand("clusters", "Attributed point clouds");
  Index gc_n = 128, gc_d = 4;
  std::string gc_angle = "uniform:0:360", gc_color = "uniform:0:255", gc_out;
  std::uint64_t gc_seed = 0;
  double gc_noise = 0.02;
  gen_clusters->add_option("--n", gc_n, "Number of points");
  gen_clusters->add_option("--d", gc_d, "Feature dimension");
  gen_clusters->add_option("--angle-law", gc_angle,
                           "uniform:lo:hi or gaussian:mean:sd");
  gen_clusters->add_option("--color-law", gc_color,
                           "uniform:lo:hi or gaussian:mean:sd");
  gen_clusters->add_option("--seed", gc_seed, "Generator seed");
  gen_clusters->add_option("--noise-sd", gc_noise,
                           "Noise level of the trailing coordinates");
  gen_clusters->add_option("--out", gc_out, "Output JSONL file")->required();

  // solve
  CLI::App* solve = app.add_subcommand("solve", "Solve a transport problem");
  std::string so_mu, so_nu, so_cost = "sq_euclidean", so_method = "exact";
  std::string so_images, so_out;
  double so_epsilon = 1e-2;
  solve->add_option("--mu", so_mu, "Source dataset JSONL")->required();
  solve->add_option("--nu", so_nu, "Target dataset JSONL")->required();
  solve->add_option("--cost", so_cost, "Cost spec: JSON, file, or kind name");
  solve->add_option("--method", so_method, "exact or sinkhorn");
  solve->add_option("--epsilon", so_epsilon, "Sinkhorn regularization");
  solve->add_option("--images", so_images, "Image directory for histogram costs");
  solve->add_option("--out", so_out, "Output plan JSON")->required();

  // eval
  CLI::App* eval = app.add_subcommand("eval", "Score a mapping");
  std::string ev_mu, ev_nu, ev_cost = "sq_euclidean", ev_source, ev_images,
              ev_out;
  std::uint64_t ev_seed = 0;
  eval->add_option("--mu", ev_mu, "Source dataset JSONL")->required();
  eval->add_option("--nu", ev_nu, "Target dataset JSONL")->required();
  eval->add_option("--cost", ev_cost, "Cost spec: JSON, file, or kind name");
  eval->add_option("--source", ev_source,
                   "Plan file, checkpoint file, nn, or random:<seed>")
      ->required();
  eval->add_option("--seed", ev_seed, "Seed of the random baseline");
  eval->add_option("--images", ev_images, "Image directory for histogram costs");
  eval->add_option("--out", ev_out, "Output CSV")->required();

  // train
  CLI::App* train_cmd = app.add_subcommand("train", "Train guided generators");
  std::string tr_mu, tr_nu, tr_cost = "sq_euclidean", tr_config, tr_lambda,
              tr_images, tr_out;
  std::uint64_t tr_seed = 0;
  train_cmd->add_option("--mu", tr_mu, "Source dataset JSONL")->required();
  train_cmd->add_option("--nu", tr_nu, "Target dataset JSONL")->required();
  train_cmd->add_option("--cost", tr_cost, "Cost spec: JSON, file, or kind name");
  train_cmd->add_option("--config", tr_config, "TrainConfig JSON file");
  CLI::Option* tr_seed_opt =
      train_cmd->add_option("--seed", tr_seed, "Training seed");
  train_cmd->add_option("--lambda-ref", tr_lambda,
                        "Reference weight, or comma list for a sweep");
  train_cmd->add_option("--images", tr_images,
                        "Image directory for histogram costs");
  train_cmd->add_option("--out", tr_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*gen_lines) return cmd_gen_lines(gl_n, gl_size, gl_style, gl_out);
    if (*gen_interval) return cmd_gen_interval(gi_lo, gi_hi, gi_n, gi_out);
    if (*gen_clusters) {
      return cmd_gen_clusters(gc_n, gc_d, gc_angle, gc_color, gc_seed,
                              gc_noise, gc_out);
    }
    if (*solve) {
      return cmd_solve(so_mu, so_nu, so_cost, so_method, so_epsilon, so_images,
                       so_out);
    }
    if (*eval) {
      return cmd_eval(ev_mu, ev_nu, ev_cost, ev_source, ev_seed, ev_images,
                      ev_out);
    }
    if (*train_cmd) {
      return cmd_train(tr_mu, tr_nu, tr_cost, tr_config,
                       tr_seed_opt->count() > 0, tr_seed, tr_lambda, tr_images,
                       tr_out);
    }
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
