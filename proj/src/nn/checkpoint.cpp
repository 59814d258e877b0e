#include <fstream>

#include "json.hpp"

#include "speedhist/errors.hpp"
#include "speedhist/nn.hpp"

namespace speedhist::nn {

using nlohmann::json;

namespace {
constexpr const char* kFormat = "speedhist-checkpoint";
constexpr int kVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors, const std::string& meta_json) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["meta"] = json::parse(meta_json);
  doc["tensors"] = json::array();
  for (const auto& t : tensors) {
    json entry;
    entry["name"] = t.name;
    entry["rows"] = t.value.rows();
    entry["cols"] = t.value.cols();
    entry["data"] = std::vector<double>(t.value.data(), t.value.data() + t.value.size());
    doc["tensors"].push_back(std::move(entry));
  }
  std::ofstream out(path);
  if (!out) throw LoadError(path, "cannot open file for writing");
  out << doc.dump() << '\n';
}

const Matrix& Checkpoint::at(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw ArgumentError("checkpoint has no tensor '" + name + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, "cannot open file");
  Checkpoint ck;
  try {
    const json doc = json::parse(in);
    if (doc.at("format") != kFormat) throw LoadError(path, "not a checkpoint");
    if (doc.at("version") != kVersion) throw LoadError(path, "unsupported checkpoint version");
    ck.meta_json = doc.at("meta").dump();
    for (const auto& entry : doc.at("tensors")) {
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      const auto data = entry.at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw LoadError(path, "tensor '" + entry.at("name").get<std::string>() + "' has the wrong element count");
      }
      Matrix m(rows, cols);
      std::copy(data.begin(), data.end(), m.data());
      ck.tensors.push_back({entry.at("name").get<std::string>(), std::move(m)});
    }
  } catch (const json::exception& e) {
    throw LoadError(path, e.what());
  }
  return ck;
}

}  // namespace speedhist::nn
