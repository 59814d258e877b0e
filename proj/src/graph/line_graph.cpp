#include <algorithm>
#include <cmath>
#include <set>

#include "speedhist/errors.hpp"
#include "speedhist/graph.hpp"

namespace speedhist::graph {

void RoadNetwork::validate() const {
  std::set<std::int64_t> known(intersections.begin(), intersections.end());
  if (known.size() != intersections.size()) throw StructuralError("duplicate intersection id");
  std::set<std::int64_t> seen;
  for (const auto& s : segments) {
    if (!seen.insert(s.id).second) throw StructuralError("duplicate segment id " + std::to_string(s.id));
    if (!known.count(s.from) || !known.count(s.to)) {
      throw StructuralError("segment " + std::to_string(s.id) + " references an unknown intersection");
    }
    if (s.features.size() != schema.size()) {
      throw StructuralError("segment " + std::to_string(s.id) + " has " + std::to_string(s.features.size()) +
                            " features, schema has " + std::to_string(schema.size()));
    }
  }
  for (const auto& [a, b] : banned_turns) {
    if (!seen.count(a) || !seen.count(b)) throw StructuralError("banned turn references an unknown segment");
  }
}

Matrix encode_features(const Matrix& raw, std::span<const FeatureColumn> schema) {
  if (static_cast<std::size_t>(raw.cols()) != schema.size()) {
    throw ArgumentError("raw feature matrix does not match schema");
  }
  const Eigen::Index n = raw.rows();
  std::vector<std::vector<double>> categories(schema.size());
  Eigen::Index width = 0;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].kind == FeatureKind::kCategorical) {
      std::set<double> values;
      for (Eigen::Index i = 0; i < n; ++i) values.insert(raw(i, static_cast<Eigen::Index>(c)));
      categories[c].assign(values.begin(), values.end());
      width += static_cast<Eigen::Index>(categories[c].size());
    } else {
      width += 1;
    }
  }
  Matrix x = Matrix::Zero(n, width);
  Eigen::Index offset = 0;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    if (schema[c].kind == FeatureKind::kCategorical) {
      const auto& cats = categories[c];
      for (Eigen::Index i = 0; i < n; ++i) {
        auto it = std::lower_bound(cats.begin(), cats.end(), raw(i, col));
        x(i, offset + (it - cats.begin())) = 1.0;
      }
      offset += static_cast<Eigen::Index>(cats.size());
    } else {
      if (n > 0) {
        const double lo = raw.col(col).minCoeff();
        const double hi = raw.col(col).maxCoeff();
        if (hi > lo) {
          for (Eigen::Index i = 0; i < n; ++i) x(i, offset) = (raw(i, col) - lo) / (hi - lo);
        }
      }
      offset += 1;
    }
  }
  return x;
}

LineGraph::LineGraph(std::vector<std::int64_t> ids, std::vector<Edge> edges, Matrix raw,
                     std::vector<FeatureColumn> schema)
    : ids_(std::move(ids)), raw_(std::move(raw)), schema_(std::move(schema)) {
  if (raw_.size() == 0 && schema_.empty()) raw_.resize(static_cast<Eigen::Index>(ids_.size()), 0);
  if (static_cast<std::size_t>(raw_.rows()) != ids_.size()) {
    throw StructuralError("feature row count does not match node count");
  }
  features_ = encode_features(raw_, schema_);
  build_csr(std::move(edges));
}

LineGraph LineGraph::with_encoded_features(std::vector<std::int64_t> ids, std::vector<Edge> edges,
                                           Matrix features) {
  LineGraph g;
  g.ids_ = std::move(ids);
  if (static_cast<std::size_t>(features.rows()) != g.ids_.size()) {
    throw StructuralError("feature row count does not match node count");
  }
  g.raw_.resize(static_cast<Eigen::Index>(g.ids_.size()), 0);
  g.features_ = std::move(features);
  g.build_csr(std::move(edges));
  return g;
}

void LineGraph::build_csr(std::vector<Edge> edges) {
  const int n = static_cast<int>(ids_.size());
  index_.clear();
  for (int i = 0; i < n; ++i) {
    if (!index_.emplace(ids_[static_cast<std::size_t>(i)], i).second) {
      throw StructuralError("duplicate node id " + std::to_string(ids_[static_cast<std::size_t>(i)]));
    }
  }
  for (const auto& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) throw StructuralError("edge endpoint out of range");
  }
  std::erase_if(edges, [](const Edge& e) { return e.src == e.dst; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  out_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  in_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& e : edges) {
    ++out_offsets_[static_cast<std::size_t>(e.src) + 1];
    ++in_offsets_[static_cast<std::size_t>(e.dst) + 1];
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_targets_.resize(edges.size());
  in_sources_.resize(edges.size());
  auto in_fill = in_offsets_;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    out_targets_[k] = edges[k].dst;  // edges are sorted by (src, dst)
    in_sources_[in_fill[static_cast<std::size_t>(edges[k].dst)]++] = edges[k].src;
  }
}

int LineGraph::index_of(std::int64_t id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw StructuralError("unknown node id " + std::to_string(id));
  return it->second;
}

std::span<const int> LineGraph::out_neighbors(int node) const {
  const auto i = static_cast<std::size_t>(node);
  return {out_targets_.data() + out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]};
}

std::span<const int> LineGraph::in_neighbors(int node) const {
  const auto i = static_cast<std::size_t>(node);
  return {in_sources_.data() + in_offsets_[i], in_offsets_[i + 1] - in_offsets_[i]};
}

bool LineGraph::has_edge(int src, int dst) const {
  auto nb = out_neighbors(src);
  return std::binary_search(nb.begin(), nb.end(), dst);
}

std::vector<Edge> LineGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (int i = 0; i < static_cast<int>(num_nodes()); ++i) {
    for (int j : out_neighbors(i)) out.push_back({i, j});
  }
  return out;
}

SparseMatrix LineGraph::adjacency() const {
  const auto n = static_cast<Eigen::Index>(num_nodes());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(num_edges());
  for (const auto& e : edges()) t.emplace_back(e.src, e.dst, 1.0);
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

int LineGraph::raw_column(const std::string& name) const {
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    if (schema_[c].name == name) return static_cast<int>(c);
  }
  return -1;
}

LineGraph LineGraph::induced_subgraph(std::span<const int> nodes) const {
  std::vector<int> local(num_nodes(), -1);
  std::vector<std::int64_t> ids;
  ids.reserve(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int v = nodes[k];
    if (v < 0 || static_cast<std::size_t>(v) >= num_nodes()) throw StructuralError("subgraph node out of range");
    if (local[static_cast<std::size_t>(v)] != -1) throw StructuralError("subgraph node listed twice");
    local[static_cast<std::size_t>(v)] = static_cast<int>(k);
    ids.push_back(ids_[static_cast<std::size_t>(v)]);
  }
  std::vector<Edge> edges;
  for (int v : nodes) {
    for (int w : out_neighbors(v)) {
      if (local[static_cast<std::size_t>(w)] >= 0) {
        edges.push_back({local[static_cast<std::size_t>(v)], local[static_cast<std::size_t>(w)]});
      }
    }
  }
  LineGraph sub;
  sub.ids_ = std::move(ids);
  sub.schema_ = schema_;
  const auto rows = static_cast<Eigen::Index>(nodes.size());
  sub.raw_.resize(rows, raw_.cols());
  sub.features_.resize(rows, features_.cols());
  for (Eigen::Index k = 0; k < rows; ++k) {
    sub.raw_.row(k) = raw_.row(nodes[static_cast<std::size_t>(k)]);
    sub.features_.row(k) = features_.row(nodes[static_cast<std::size_t>(k)]);
  }
  sub.build_csr(std::move(edges));
  return sub;
}

LineGraph build_line_graph(const RoadNetwork& network) {
  if (network.segments.empty()) throw ArgumentError("road network has no segments");
  network.validate();

  // entries[c] = segments that can be entered at intersection c.
  std::map<std::int64_t, std::vector<int>> entries;
  const auto& segs = network.segments;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    entries[segs[i].from].push_back(static_cast<int>(i));
    if (!segs[i].directed && segs[i].to != segs[i].from) entries[segs[i].to].push_back(static_cast<int>(i));
  }
  std::map<std::int64_t, int> by_id;
  for (std::size_t i = 0; i < segs.size(); ++i) by_id[segs[i].id] = static_cast<int>(i);
  std::set<std::pair<int, int>> banned;
  for (const auto& [a, b] : network.banned_turns) banned.emplace(by_id.at(a), by_id.at(b));

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    std::vector<std::int64_t> exits{segs[i].to};
    if (!segs[i].directed && segs[i].from != segs[i].to) exits.push_back(segs[i].from);
    for (auto c : exits) {
      auto it = entries.find(c);
      if (it == entries.end()) continue;
      for (int j : it->second) {
        if (j == static_cast<int>(i) || banned.count({static_cast<int>(i), j})) continue;
        edges.push_back({static_cast<int>(i), j});
      }
    }
  }

  std::vector<std::int64_t> ids;
  Matrix raw(static_cast<Eigen::Index>(segs.size()), static_cast<Eigen::Index>(network.schema.size()));
  for (std::size_t i = 0; i < segs.size(); ++i) {
    ids.push_back(segs[i].id);
    for (std::size_t c = 0; c < network.schema.size(); ++c) {
      raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = segs[i].features[c];
    }
  }
  return {std::move(ids), std::move(edges), std::move(raw), network.schema};
}

SparseMatrix normalize_adjacency(const LineGraph& g, bool symmetrize) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::set<std::pair<int, int>> entries;
  for (int i = 0; i < static_cast<int>(n); ++i) {
    entries.emplace(i, i);
    for (int j : g.out_neighbors(i)) {
      entries.emplace(i, j);
      if (symmetrize) entries.emplace(j, i);
    }
  }
  // Row sums of A + I give the degrees.
  std::vector<double> degree(static_cast<std::size_t>(n), 0.0);
  for (const auto& [i, j] : entries) degree[static_cast<std::size_t>(i)] += 1.0;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(entries.size());
  for (const auto& [i, j] : entries) {
    t.emplace_back(i, j,
                   1.0 / std::sqrt(degree[static_cast<std::size_t>(i)] * degree[static_cast<std::size_t>(j)]));
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace speedhist::graph
