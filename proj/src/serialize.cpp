#include "otg/serialize.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace otg {

namespace fs = std::filesystem;

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return buf.str();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const fs::path& path) {
  return fnv1a64(read_text(path));
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

namespace {

json point_to_json(const DiscreteMeasure<double>& m, Index i, bool with_weight) {
  json line = json::object();
  if (m.has_attrs()) {
    line["id"] = m.attr(i).id;
  } else {
    line["id"] = "p" + std::to_string(i);
  }
  json feats = json::array();
  for (Index k = 0; k < m.dim(); ++k) feats.push_back(m.points()(i, k));
  line["features"] = std::move(feats);
  if (m.has_attrs()) {
    const PointAttrs& a = m.attr(i);
    if (a.angle) line["angle"] = *a.angle;
    if (a.color) line["color"] = {(*a.color)[0], (*a.color)[1], (*a.color)[2]};
  }
  if (with_weight) line["weight"] = m.weights()(i);
  return line;
}

json parse_line(const fs::path& path, const std::string& text, std::size_t lineno) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw IoError(path.string() + ":" + std::to_string(lineno) +
                  ": not a JSON object");
  }
  return j;
}

}  // namespace

void write_dataset_jsonl(const fs::path& path,
                         const DiscreteMeasure<double>& measure,
                         const std::optional<json>& header) {
  const Index n = measure.size();
  // Uniform weights are left implicit; anything else is written per line.
  const bool uniform =
      (measure.weights().array() - 1.0 / static_cast<double>(n))
          .cwiseAbs()
          .maxCoeff() <= 1e-15;
  std::string out;
  if (header) out += header->dump() + "\n";
  for (Index i = 0; i < n; ++i) {
    out += point_to_json(measure, i, !uniform).dump() + "\n";
  }
  write_text_atomic(path, out);
}

DiscreteMeasure<double> load_dataset_jsonl(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<json> rows;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(path, line, lineno);
    if (!j.contains("features")) {
      if (lineno == 1) continue;  // header line
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": missing \"features\"");
    }
    rows.push_back(std::move(j));
  }
  if (rows.empty()) throw IoError(path.string() + ": no points");

  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(rows[0]["features"].size());
  if (d < 1) throw IoError(path.string() + ": empty feature vector");

  MatrixX<double> points(n, d);
  VectorX<double> weights(n);
  std::vector<PointAttrs> attrs(static_cast<std::size_t>(n));
  bool any_attr = false;
  int with_weight = 0;

  for (Index i = 0; i < n; ++i) {
    const json& j = rows[static_cast<std::size_t>(i)];
    const json& feats = j["features"];
    if (static_cast<Index>(feats.size()) != d) {
      throw IoError(path.string() + ": point " + std::to_string(i) + " has " +
                    std::to_string(feats.size()) + " features, expected " +
                    std::to_string(d));
    }
    for (Index k = 0; k < d; ++k) {
      points(i, k) = feats[static_cast<std::size_t>(k)].get<double>();
    }
    PointAttrs& a = attrs[static_cast<std::size_t>(i)];
    if (j.contains("id")) {
      a.id = j["id"].get<std::string>();
      any_attr = true;
    }
    if (j.contains("angle")) {
      a.angle = j["angle"].get<double>();
      any_attr = true;
    }
    if (j.contains("color")) {
      const json& c = j["color"];
      if (c.size() != 3) {
        throw IoError(path.string() + ": point " + std::to_string(i) +
                      " has a color with " + std::to_string(c.size()) +
                      " channels, expected 3");
      }
      a.color = std::array<int, 3>{c[0].get<int>(), c[1].get<int>(),
                                   c[2].get<int>()};
      any_attr = true;
    }
    if (j.contains("weight")) {
      weights(i) = j["weight"].get<double>();
      ++with_weight;
    }
  }
  if (with_weight != 0 && with_weight != n) {
    throw IoError(path.string() + ": weight present on " +
                  std::to_string(with_weight) + " of " + std::to_string(n) +
                  " points; must be all or none");
  }
  if (!any_attr) attrs.clear();
  if (with_weight == 0) {
    return attrs.empty()
               ? DiscreteMeasure<double>::uniform(std::move(points))
               : DiscreteMeasure<double>::uniform(std::move(points),
                                                  std::move(attrs));
  }
  return DiscreteMeasure<double>(std::move(points), std::move(weights),
                                 std::move(attrs));
}

std::optional<json> read_dataset_header(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = parse_line(path, line, 1);
    if (j.contains("features")) return std::nullopt;
    return j;
  }
  return std::nullopt;
}

void write_plan_json(const fs::path& path, const TransportPlan<double>& plan,
                     const json& extra) {
  json j = json::object();
  j["rows"] = plan.rows();
  j["cols"] = plan.cols();
  json entries = json::array();
  for (Index i = 0; i < plan.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < plan.cols(); ++k) row.push_back(plan.coupling()(i, k));
    entries.push_back(std::move(row));
  }
  j["entries"] = std::move(entries);
  json mu = json::array(), nu = json::array();
  for (Index i = 0; i < plan.rows(); ++i) mu.push_back(plan.source_marginal()(i));
  for (Index k = 0; k < plan.cols(); ++k) nu.push_back(plan.target_marginal()(k));
  j["source_marginal"] = std::move(mu);
  j["target_marginal"] = std::move(nu);
  j["marginal_tol"] = plan.marginal_tol();
  for (const auto& [key, value] : extra.items()) j[key] = value;
  write_text_atomic(path, j.dump(2) + "\n");
}

TransportPlan<double> load_plan_json(const fs::path& path) {
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw IoError(path.string() + ": not a JSON object");
  }
  for (const char* key : {"rows", "cols", "entries"}) {
    if (!j.contains(key)) {
      throw IoError(path.string() + ": missing \"" + key + "\"");
    }
  }
  const Index rows = j["rows"].get<Index>();
  const Index cols = j["cols"].get<Index>();
  if (rows < 1 || cols < 1 ||
      static_cast<Index>(j["entries"].size()) != rows) {
    throw IoError(path.string() + ": entries do not match rows/cols");
  }
  MatrixX<double> pi(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j["entries"][static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != cols) {
      throw IoError(path.string() + ": entries do not match rows/cols");
    }
    for (Index k = 0; k < cols; ++k) {
      pi(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
  }
  VectorX<double> mu, nu;
  if (j.contains("source_marginal")) {
    mu.resize(rows);
    for (Index i = 0; i < rows; ++i) {
      mu(i) = j["source_marginal"][static_cast<std::size_t>(i)].get<double>();
    }
  } else {
    mu = pi.rowwise().sum();
  }
  if (j.contains("target_marginal")) {
    nu.resize(cols);
    for (Index k = 0; k < cols; ++k) {
      nu(k) = j["target_marginal"][static_cast<std::size_t>(k)].get<double>();
    }
  } else {
    nu = pi.colwise().sum().transpose();
  }
  const double tol = j.value("marginal_tol", 1e-9);
  return TransportPlan<double>(std::move(pi), std::move(mu), std::move(nu), tol);
}

namespace {

void hash_doubles(std::string& buf, const double* data, std::size_t count) {
  buf.append(reinterpret_cast<const char*>(data), count * sizeof(double));
}

}  // namespace

std::uint64_t plan_hash(const TransportPlan<double>& plan) {
  std::string buf;
  const MatrixX<double>& pi = plan.coupling();
  buf.reserve(static_cast<std::size_t>(pi.size() + pi.rows() + pi.cols() + 2) *
              sizeof(double));
  const Index dims[2] = {pi.rows(), pi.cols()};
  buf.append(reinterpret_cast<const char*>(dims), sizeof(dims));
  hash_doubles(buf, pi.data(), static_cast<std::size_t>(pi.size()));
  hash_doubles(buf, plan.source_marginal().data(),
               static_cast<std::size_t>(pi.rows()));
  hash_doubles(buf, plan.target_marginal().data(),
               static_cast<std::size_t>(pi.cols()));
  return fnv1a64(buf);
}

std::uint64_t measure_hash(const DiscreteMeasure<double>& measure) {
  std::string buf;
  const Index dims[2] = {measure.size(), measure.dim()};
  buf.append(reinterpret_cast<const char*>(dims), sizeof(dims));
  hash_doubles(buf, measure.points().data(),
               static_cast<std::size_t>(measure.points().size()));
  hash_doubles(buf, measure.weights().data(),
               static_cast<std::size_t>(measure.size()));
  for (const PointAttrs& a : measure.attrs()) {
    buf += '\x1f';
    buf += a.id;
    if (a.angle) {
      buf += '\x01';
      hash_doubles(buf, &*a.angle, 1);
    }
    if (a.color) {
      buf += '\x02';
      for (int c : *a.color) buf += static_cast<char>(c);
    }
  }
  return fnv1a64(buf);
}

}  // namespace otg
