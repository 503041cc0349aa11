#include "otg/mapping.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "otg/rng.hpp"
#include "otg/serialize.hpp"

namespace otg {

namespace {

std::string plan_provenance(const TransportPlan<double>& plan,
                            const CostSpec& spec) {
  return "plan:" + hex64(plan_hash(plan)) + " cost:" + spec.canonical_id();
}

CostMatrix<double> eval_matrix(const DiscreteMeasure<double>& mu,
                               const DiscreteMeasure<double>& nu,
                               const CostSpec& spec) {
  if (spec.kind == CostKind::HistogramWasserstein) {
    throw ValueError(
        "histogram costs need an image cache; pass one explicitly");
  }
  return cost_matrix(mu, nu, spec);
}

}  // namespace

ReferenceMap<double> reference_map(const DiscreteMeasure<double>& mu,
                                   const DiscreteMeasure<double>& nu,
                                   const CostSpec& spec) {
  const CostMatrix<double> cost = eval_matrix(mu, nu, spec);
  const SolveResult<double> result = solve_exact(mu, nu, cost);
  return reference_map_from_plan(result.plan, mu, nu,
                                 plan_provenance(result.plan, spec));
}

ReferenceMap<double> reference_map(const DiscreteMeasure<double>& mu,
                                   const DiscreteMeasure<double>& nu,
                                   const CostSpec& spec,
                                   HistogramCache& cache) {
  const CostMatrix<double> cost = cost_matrix(mu, nu, spec, cache);
  const SolveResult<double> result = solve_exact(mu, nu, cost);
  return reference_map_from_plan(result.plan, mu, nu,
                                 plan_provenance(result.plan, spec));
}

double mismatching_degree(const TransportPlan<double>& plan,
                          const DiscreteMeasure<double>& mu,
                          const DiscreteMeasure<double>& nu,
                          const CostSpec& eval_cost) {
  return mismatching_degree(plan, eval_matrix(mu, nu, eval_cost));
}

double mismatching_degree(const DeterministicMap& map,
                          const DiscreteMeasure<double>& mu,
                          const DiscreteMeasure<double>& nu,
                          const CostSpec& eval_cost) {
  return mismatching_degree(map, mu, eval_matrix(mu, nu, eval_cost));
}

DeterministicMap nearest_neighbor_map(const DiscreteMeasure<double>& mu,
                                      const DiscreteMeasure<double>& nu,
                                      const CostSpec& spec) {
  return nearest_neighbor_map(eval_matrix(mu, nu, spec));
}

DeterministicMap random_bijection(Index n, std::uint64_t seed) {
  if (n < 1) throw ValueError("random_bijection: need at least one point");
  DeterministicMap map;
  map.assignment.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) map.assignment[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(map.assignment);
  map.bijective = true;
  return map;
}

std::vector<double> azimuth_readout(const MatrixX<double>& generated,
                                    const DiscreteMeasure<double>& nu) {
  const std::vector<Index> nn = nearest_points(generated, nu.points());
  std::vector<double> angles;
  angles.reserve(nn.size());
  for (Index j : nn) {
    const PointAttrs& a = nu.attr(j);
    if (!a.angle) {
      throw AttributeError("azimuth_readout: target point '" + a.id +
                           "' has no angle attribute");
    }
    angles.push_back(*a.angle);
  }
  return angles;
}

namespace {

void append_rows(std::ostringstream& out, const char* direction,
                 const MatrixX<double>& rows) {
  for (Index i = 0; i < rows.rows(); ++i) {
    json line;
    line["direction"] = direction;
    line["index"] = i;
    json bary = json::array();
    for (Index d = 0; d < rows.cols(); ++d) bary.push_back(rows(i, d));
    line["barycenter"] = std::move(bary);
    out << line.dump() << "\n";
  }
}

}  // namespace

void write_reference_map_jsonl(const std::filesystem::path& path,
                               const ReferenceMap<double>& map) {
  std::ostringstream out;
  json header;
  header["provenance"] = map.provenance;
  out << header.dump() << "\n";
  append_rows(out, "uv", map.source_to_target);
  append_rows(out, "vu", map.target_to_source);
  write_text_atomic(path, out.str());
}

ReferenceMap<double> load_reference_map_jsonl(
    const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<std::vector<double>> uv, vu;
  std::string provenance;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " +
                    e.what());
    }
    if (!row.contains("direction")) {
      if (row.contains("provenance")) provenance = row["provenance"];
      continue;
    }
    std::vector<std::vector<double>>& side =
        row["direction"] == "uv" ? uv : vu;
    const std::size_t index = row["index"];
    if (index != side.size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": barycenter index " + std::to_string(index) +
                    " out of order");
    }
    side.push_back(row["barycenter"].get<std::vector<double>>());
  }
  if (uv.empty() || vu.empty()) {
    throw IoError(path.string() + ": missing uv or vu barycenters");
  }
  ReferenceMap<double> map;
  map.provenance = std::move(provenance);
  auto to_matrix = [&](const std::vector<std::vector<double>>& rows) {
    const Index n = static_cast<Index>(rows.size());
    const Index d = static_cast<Index>(rows.front().size());
    MatrixX<double> m(n, d);
    for (Index i = 0; i < n; ++i) {
      if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != d) {
        throw IoError(path.string() + ": ragged barycenter rows");
      }
      for (Index j = 0; j < d; ++j) {
        m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
    return m;
  };
  map.source_to_target = to_matrix(uv);
  map.target_to_source = to_matrix(vu);
  return map;
}

}  // namespace otg
