#include "gaitlab/checkpoint.hpp"

#include "gaitlab/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gaitlab {

using nlohmann::json;

std::string checkpoint_to_json(const ModelParams<double>& params) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["input_dim"] = params.input_dim;
  doc["hidden"] = params.hidden;
  json tensors = json::array();
  params.visit([&](const std::string& name, const Eigen::MatrixXd& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    tensors.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}, {"data", data}});
  });
  doc["tensors"] = std::move(tensors);
  return doc.dump();
}

ModelParams<double> checkpoint_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("format_version").get<int>();
    require(version == kCheckpointFormatVersion, ErrorKind::Parse,
            "unsupported checkpoint version " + std::to_string(version));
    auto params = ModelParams<double>::zeros(doc.at("input_dim").get<int>(), doc.at("hidden").get<int>());
    const auto& tensors = doc.at("tensors");
    params.visit([&](const std::string& name, Eigen::MatrixXd& m) {
      const auto it = std::find_if(tensors.begin(), tensors.end(),
                                   [&](const json& t) { return t.at("name").get<std::string>() == name; });
      require(it != tensors.end(), ErrorKind::Parse, "checkpoint is missing tensor '" + name + "'");
      const auto shape = it->at("shape").get<std::vector<Eigen::Index>>();
      const auto data = it->at("data").get<std::vector<double>>();
      require(shape.size() == 2 && shape[0] == m.rows() && shape[1] == m.cols() &&
                  static_cast<Eigen::Index>(data.size()) == m.size(),
              ErrorKind::Parse, "tensor '" + name + "' has the wrong shape");
      std::size_t k = 0;
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = data[k++];
    });
    require(params.all_finite(), ErrorKind::Numerical, "checkpoint holds non-finite values");
    return params;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ModelParams<double>& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << checkpoint_to_json(params) << '\n';
}

ModelParams<double> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open checkpoint '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_json(buffer.str());
}

}  // namespace gaitlab
