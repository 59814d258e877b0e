#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "speedhist/csv.hpp"
#include "speedhist/datagen.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/rng.hpp"

namespace speedhist::datagen {

namespace {
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kRestStream = 2;

std::vector<std::vector<std::string>> read_tab_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, "cannot open file");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(csv::split(line, '\t'));
  }
  return rows;
}

std::string join(const std::string& dir, const char* name) { return (std::filesystem::path(dir) / name).string(); }
}  // namespace

CoraSplit CoraSplit::literal() {
  CoraSplit s;
  s.validation = 30;
  s.test = -1;
  return s;
}

LabeledDataset load_cora(const std::string& dir, const CoraSplit& split) {
  const auto content_path = join(dir, "cora.content");
  const auto cites_path = join(dir, "cora.cites");
  const auto content = read_tab_file(content_path);
  if (content.empty()) throw LoadError(content_path, "no rows");
  const std::size_t width = content.front().size();
  if (width < 3) throw LoadError(content_path, "expected id, features and label per row");

  std::vector<std::int64_t> ids;
  std::vector<std::string> label_names;
  Matrix features(static_cast<Eigen::Index>(content.size()), static_cast<Eigen::Index>(width - 2));
  for (std::size_t r = 0; r < content.size(); ++r) {
    const auto& row = content[r];
    if (row.size() != width) throw LoadError(content_path, "line " + std::to_string(r + 1) + " has a different width");
    ids.push_back(csv::parse_int(row[0], content_path, r + 1));
    for (std::size_t c = 1; c + 1 < width; ++c) {
      const double v = csv::parse_double(row[c], content_path, r + 1);
      if (v != 0.0 && v != 1.0) throw LoadError(content_path, "line " + std::to_string(r + 1) + ": non-binary feature");
      features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = v;
    }
    label_names.push_back(row.back());
  }
  std::map<std::int64_t, int> index;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.emplace(ids[i], static_cast<int>(i)).second) {
      throw LoadError(content_path, "duplicate paper id " + std::to_string(ids[i]));
    }
  }

  std::vector<graph::Edge> edges;
  const auto cites = read_tab_file(cites_path);
  for (std::size_t r = 0; r < cites.size(); ++r) {
    if (cites[r].size() != 2) throw LoadError(cites_path, "line " + std::to_string(r + 1) + ": expected two ids");
    const auto a = index.find(csv::parse_int(cites[r][0], cites_path, r + 1));
    const auto b = index.find(csv::parse_int(cites[r][1], cites_path, r + 1));
    if (a == index.end() || b == index.end()) {
      throw LoadError(cites_path, "line " + std::to_string(r + 1) + ": unknown paper id");
    }
    edges.push_back({a->second, b->second});
    edges.push_back({b->second, a->second});
  }

  LabeledDataset data;
  data.graph = graph::LineGraph::with_encoded_features(ids, std::move(edges), std::move(features));
  std::vector<std::string> names(label_names);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  data.num_classes = static_cast<int>(names.size());
  const auto n = ids.size();
  data.labels = Matrix::Zero(static_cast<Eigen::Index>(n), data.num_classes);
  data.labeled.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(std::lower_bound(names.begin(), names.end(), label_names[i]) - names.begin());
    data.classes.push_back(c);
    data.labels(static_cast<Eigen::Index>(i), c) = 1.0;
  }

  // Seeded split: train_per_class per class, then validation and test from the rest.
  data.train_mask.assign(n, 0);
  data.validation_mask.assign(n, 0);
  data.test_mask.assign(n, 0);
  Rng train_rng(derive_seed(split.seed, kTrainStream));
  for (int c = 0; c < data.num_classes; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (data.classes[i] == c) members.push_back(static_cast<int>(i));
    }
    if (static_cast<int>(members.size()) < split.train_per_class) {
      throw ConfigurationError("class '" + names[static_cast<std::size_t>(c)] + "' has too few nodes for the split");
    }
    std::shuffle(members.begin(), members.end(), train_rng);
    for (int k = 0; k < split.train_per_class; ++k) data.train_mask[static_cast<std::size_t>(members[k])] = 1;
  }
  std::vector<int> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!data.train_mask[i]) rest.push_back(static_cast<int>(i));
  }
  Rng rest_rng(derive_seed(split.seed, kRestStream));
  std::shuffle(rest.begin(), rest.end(), rest_rng);
  const auto validation = static_cast<std::size_t>(std::max(split.validation, 0));
  const std::size_t test = split.test < 0 ? rest.size() - std::min(validation, rest.size())
                                          : static_cast<std::size_t>(split.test);
  if (validation + test > rest.size()) throw ConfigurationError("split asks for more nodes than the dataset has");
  for (std::size_t k = 0; k < validation; ++k) data.validation_mask[static_cast<std::size_t>(rest[k])] = 1;
  for (std::size_t k = validation; k < validation + test; ++k) data.test_mask[static_cast<std::size_t>(rest[k])] = 1;
  return data;
}

CoraStats cora_stats(const std::string& dir) {
  CoraStats s;
  s.citations = read_tab_file(join(dir, "cora.cites")).size();
  for (const auto& row : read_tab_file(join(dir, "cora.content"))) s.class_names.push_back(row.back());
  std::sort(s.class_names.begin(), s.class_names.end());
  s.class_names.erase(std::unique(s.class_names.begin(), s.class_names.end()), s.class_names.end());
  return s;
}

}  // namespace speedhist::datagen
