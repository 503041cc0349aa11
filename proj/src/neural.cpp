#include "otg/neural.hpp"

#include <json.hpp>

#include "otg/serialize.hpp"

namespace otg {

using json = nlohmann::ordered_json;

void save_mlp_json(const std::filesystem::path& path, const Mlp<double>& net) {
  net.validate();
  json doc;
  doc["dims"] = net.dims;
  json layers = json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    json layer;
    json w = json::array();
    for (Index i = 0; i < net.weights[l].rows(); ++i) {
      json row = json::array();
      for (Index j = 0; j < net.weights[l].cols(); ++j) {
        row.push_back(net.weights[l](i, j));
      }
      w.push_back(std::move(row));
    }
    layer["w"] = std::move(w);
    json b = json::array();
    for (Index j = 0; j < net.biases[l].size(); ++j) {
      b.push_back(net.biases[l](j));
    }
    layer["b"] = std::move(b);
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  write_text_atomic(path, doc.dump(2) + "\n");
}

Mlp<double> load_mlp_json(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (!doc.contains("dims") || !doc.contains("layers")) {
    throw IoError(path.string() + ": checkpoint needs dims and layers");
  }
  Mlp<double> net;
  net.dims = doc["dims"].get<std::vector<Index>>();
  for (const json& layer : doc["layers"]) {
    const auto rows = layer["w"].get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw IoError(path.string() + ": empty weight matrix");
    MatrixX<double> w(static_cast<Index>(rows.size()),
                      static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<Index>(rows[i].size()) != w.cols()) {
        throw IoError(path.string() + ": ragged weight matrix");
      }
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        w(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
      }
    }
    const auto b = layer["b"].get<std::vector<double>>();
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::Map<const VectorX<double>>(
        b.data(), static_cast<Index>(b.size())));
  }
  try {
    net.validate();
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return net;
}

}  // namespace otg
