#include <algorithm>
#include <cmath>

#include "speedhist/csv.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/n2v.hpp"
#include "speedhist/parallel.hpp"
#include "speedhist/rng.hpp"

namespace speedhist::n2v {

namespace {
constexpr std::uint64_t kTopologyWalks = 1;
constexpr std::uint64_t kTopologyVectors = 2;
constexpr std::uint64_t kFeatureWalks = 3;
constexpr std::uint64_t kFeatureVectors = 4;

void check_column(const graph::LineGraph& g, int feature_index) {
  if (feature_index < 0 || static_cast<std::size_t>(feature_index) >= g.schema().size()) {
    throw ArgumentError("feature index " + std::to_string(feature_index) + " out of range");
  }
}
}  // namespace

std::vector<Token> feature_tokens(const graph::LineGraph& g, int feature_index) {
  check_column(g, feature_index);
  const auto& raw = g.raw_features();
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Token> tokens(static_cast<std::size_t>(n));
  if (g.schema()[static_cast<std::size_t>(feature_index)].kind == graph::FeatureKind::kCategorical) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = raw(i, feature_index);
      if (!std::isfinite(v) || std::floor(v) != v) {
        throw ArgumentError("categorical feature '" + g.schema()[static_cast<std::size_t>(feature_index)].name +
                            "' has non-integral value " + csv::format_double(v));
      }
      tokens[static_cast<std::size_t>(i)] = static_cast<Token>(v);
    }
    return tokens;
  }
  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = raw(i, feature_index);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int b = 1; b < kQuantileBins; ++b) {
    edges.push_back(sorted[static_cast<std::size_t>(b) * sorted.size() / kQuantileBins]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = raw(i, feature_index);
    tokens[static_cast<std::size_t>(i)] = std::upper_bound(edges.begin(), edges.end(), v) - edges.begin();
  }
  return tokens;
}

WeightedDigraph build_feature_graph(const graph::LineGraph& g, const std::vector<Token>& tokens) {
  if (tokens.size() != g.num_nodes()) throw ArgumentError("build_feature_graph: one token per node required");
  std::vector<Token> values(tokens);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  auto value_index = [&](Token t) {
    return static_cast<int>(std::lower_bound(values.begin(), values.end(), t) - values.begin());
  };
  std::vector<std::tuple<int, int, double>> edges;
  edges.reserve(g.num_edges());
  for (const auto& e : g.edges()) {
    edges.emplace_back(value_index(tokens[static_cast<std::size_t>(e.src)]),
                       value_index(tokens[static_cast<std::size_t>(e.dst)]), 1.0);
  }
  return WeightedDigraph::from_edges(std::move(values), edges);
}

WeightedDigraph build_feature_graph(const graph::LineGraph& g, int feature_index) {
  check_column(g, feature_index);
  if (g.schema()[static_cast<std::size_t>(feature_index)].kind != graph::FeatureKind::kCategorical) {
    throw ArgumentError("feature graphs need a categorical feature; '" +
                        g.schema()[static_cast<std::size_t>(feature_index)].name + "' is continuous");
  }
  return build_feature_graph(g, feature_tokens(g, feature_index));
}

WalkCorpus sequence_manipulation(const WalkCorpus& walks, const graph::LineGraph& g, const std::vector<Token>& tokens) {
  if (tokens.size() != g.num_nodes()) throw ArgumentError("sequence_manipulation: one token per node required");
  WalkCorpus out;
  out.walk_length = walks.walk_length;
  out.walks_per_node = walks.walks_per_node;
  out.sequences.reserve(walks.sequences.size());
  for (const auto& s : walks.sequences) {
    auto& seq = out.sequences.emplace_back();
    seq.reserve(s.size());
    for (Token id : s) seq.push_back(tokens[static_cast<std::size_t>(g.index_of(id))]);
  }
  return out;
}

WalkCorpus sequence_manipulation(const WalkCorpus& walks, const graph::LineGraph& g, int feature_index) {
  return sequence_manipulation(walks, g, feature_tokens(g, feature_index));
}

EmbedMode parse_embed_mode(const std::string& name) {
  if (name == "base") return EmbedMode::kBase;
  if (name == "feature-graph") return EmbedMode::kFeatureGraph;
  if (name == "sequence") return EmbedMode::kSequenceManipulation;
  throw ArgumentError("unknown embedding mode '" + name + "' (expected base, feature-graph or sequence)");
}

std::string to_string(EmbedMode mode) {
  switch (mode) {
    case EmbedMode::kBase:
      return "base";
    case EmbedMode::kFeatureGraph:
      return "feature-graph";
    case EmbedMode::kSequenceManipulation:
      return "sequence";
  }
  return "base";
}

WalkCorpus topology_walks(const graph::LineGraph& g, const EmbedConfig& config, std::uint64_t seed) {
  return random_walks(topology_graph(g), config.walks, derive_seed(seed, kTopologyWalks));
}

Matrix topology_embedding(const graph::LineGraph& g, const WalkCorpus& walks, const EmbedConfig& config,
                          std::uint64_t seed) {
  const auto emb = skipgram_embed(walks, config.topology, derive_seed(seed, kTopologyVectors));
  return emb.lookup(g.ids());
}

Matrix feature_embedding(const graph::LineGraph& g, EmbedMode mode, const WalkCorpus& walks,
                         const EmbedConfig& config, std::uint64_t seed) {
  if (mode == EmbedMode::kBase) return Matrix(static_cast<Eigen::Index>(g.num_nodes()), 0);
  std::vector<int> columns = config.features;
  if (columns.empty()) {
    for (std::size_t c = 0; c < g.schema().size(); ++c) columns.push_back(static_cast<int>(c));
  }
  std::vector<Matrix> parts(columns.size());
  parallel_for(columns.size(), config.walks.workers, [&](std::size_t k) {
    const int f = columns[k];
    const auto tokens = feature_tokens(g, f);
    const auto fs = static_cast<std::uint64_t>(f);
    WalkCorpus corpus;
    if (mode == EmbedMode::kFeatureGraph) {
      WalkOptions opts = config.walks;
      opts.workers = 1;
      corpus = random_walks(build_feature_graph(g, tokens), opts, derive_seed(seed, {kFeatureWalks, fs}));
    } else {
      corpus = sequence_manipulation(walks, g, tokens);
    }
    parts[k] = skipgram_embed(corpus, config.feature, derive_seed(seed, {kFeatureVectors, fs})).lookup(tokens);
  });
  Eigen::Index width = 0;
  for (const auto& p : parts) width += p.cols();
  Matrix out(static_cast<Eigen::Index>(g.num_nodes()), width);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return out;
}

Matrix embed_with_features(const graph::LineGraph& g, EmbedMode mode, const EmbedConfig& config, std::uint64_t seed) {
  const auto walks = topology_walks(g, config, seed);
  const Matrix topo = topology_embedding(g, walks, config, seed);
  const Matrix feat = feature_embedding(g, mode, walks, config, seed);
  Matrix out(topo.rows(), topo.cols() + feat.cols());
  out.leftCols(topo.cols()) = topo;
  out.rightCols(feat.cols()) = feat;
  return out;
}

void write_embedding_csv(const std::string& path, const graph::LineGraph& g, const Matrix& embedding) {
  if (static_cast<std::size_t>(embedding.rows()) != g.num_nodes()) {
    throw ArgumentError("write_embedding_csv: one row per node required");
  }
  std::vector<std::string> header{"node_id"};
  for (Eigen::Index c = 0; c < embedding.cols(); ++c) header.push_back("v_" + std::to_string(c));
  csv::Writer w(path, header);
  for (Eigen::Index r = 0; r < embedding.rows(); ++r) {
    std::vector<std::string> row{std::to_string(g.id(static_cast<int>(r)))};
    for (Eigen::Index c = 0; c < embedding.cols(); ++c) row.push_back(csv::format_double(embedding(r, c)));
    w.row(row);
  }
}

}  // namespace speedhist::n2v
