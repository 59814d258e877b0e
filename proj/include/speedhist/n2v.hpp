#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "speedhist/graph.hpp"
#include "speedhist/metrics.hpp"
#include "speedhist/nn.hpp"

// node2vec walks, skip-gram embeddings, feature-aware variants and the MLP
// regression head trained on top of them.
namespace speedhist::n2v {

using Token = std::int64_t;

struct WalkCorpus {
  std::vector<std::vector<Token>> sequences;
  int walk_length = 0;
  int walks_per_node = 0;
};

/// Weighted directed graph whose nodes carry tokens. CSR layout.
struct WeightedDigraph {
  std::vector<Token> tokens;
  std::vector<std::size_t> offsets;  // size n + 1
  std::vector<int> targets;          // ascending within a row
  std::vector<double> weights;

  [[nodiscard]] int num_nodes() const { return static_cast<int>(tokens.size()); }
  [[nodiscard]] bool has_edge(int src, int dst) const;
  /// Weight of src -> dst, 0 when absent.
  [[nodiscard]] double weight(int src, int dst) const;

  /// Builds from (src, dst, weight) triples; parallel edges are summed.
  static WeightedDigraph from_edges(std::vector<Token> tokens, const std::vector<std::tuple<int, int, double>>& edges);
};

/// Unit-weight view of a line graph; tokens are the segment ids.
WeightedDigraph topology_graph(const graph::LineGraph& g);

struct WalkOptions {
  int walk_length = 80;
  int walks_per_node = 10;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  int workers = 1;
};

/// Second-order biased walks. From the first node the next step is drawn in
/// proportion to edge weight; afterwards, coming from t to v, neighbour x of v
/// gets weight w(v,x)/p if x == t, w(v,x) if x -> t is an edge, w(v,x)/q
/// otherwise. Walks stop early at nodes without out-edges. The walk of
/// (round r, source v) uses its own derived seed, and each round visits the
/// sources in a seeded random order. Throws ArgumentError on an empty graph
/// or walk_length < 1.
WalkCorpus random_walks(const WeightedDigraph& g, const WalkOptions& options, std::uint64_t seed);

struct SkipGramOptions {
  int dims = 128;
  int window = 10;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  double min_learning_rate = 0.0001;
};

/// Token -> vector table.
struct Embedding {
  std::vector<Token> vocabulary;  // ascending
  Matrix vectors;                 // one row per vocabulary entry

  [[nodiscard]] bool contains(Token t) const;
  [[nodiscard]] int index_of(Token t) const;
  [[nodiscard]] Matrix lookup(const std::vector<Token>& tokens) const;
};

/// Skip-gram with negative sampling. Negatives come from the unigram
/// distribution raised to 0.75; every center uses a window shrunk uniformly
/// at random; the learning rate decays linearly over all epochs. Sequential
/// and deterministic for a given seed. Throws ArgumentError on an empty corpus.
Embedding skipgram_embed(const WalkCorpus& corpus, const SkipGramOptions& options, std::uint64_t seed);

// --- feature inclusion ----------------------------------------------------------

inline constexpr int kQuantileBins = 10;

/// One token per node for raw feature column `feature_index`. Categorical
/// values must be integral and are used as-is; continuous values map to their
/// decile (0..9) over the graph's nodes.
std::vector<Token> feature_tokens(const graph::LineGraph& g, int feature_index);

/// Nodes are the distinct tokens; the weight of a -> b counts the line-graph
/// edges (i, j) with token(i) = a and token(j) = b.
WeightedDigraph build_feature_graph(const graph::LineGraph& g, const std::vector<Token>& tokens);
/// Throws ArgumentError when the column is continuous.
WeightedDigraph build_feature_graph(const graph::LineGraph& g, int feature_index);

/// Replaces every segment id of a topology corpus with that node's token.
/// Throws StructuralError on an id not in `g`.
WalkCorpus sequence_manipulation(const WalkCorpus& walks, const graph::LineGraph& g, const std::vector<Token>& tokens);
WalkCorpus sequence_manipulation(const WalkCorpus& walks, const graph::LineGraph& g, int feature_index);

enum class EmbedMode { kBase, kFeatureGraph, kSequenceManipulation };
EmbedMode parse_embed_mode(const std::string& name);
std::string to_string(EmbedMode mode);

struct EmbedConfig {
  WalkOptions walks;
  SkipGramOptions topology{};
  SkipGramOptions feature{32};
  // Raw columns embedded in feature modes; empty means all of them.
  std::vector<int> features;
};

/// Row i is the embedding of node i: the topology vector followed, in feature
/// modes, by one vector per embedded feature looked up by the node's token.
Matrix embed_with_features(const graph::LineGraph& g, EmbedMode mode, const EmbedConfig& config, std::uint64_t seed);

/// Pieces of embed_with_features, exposed so that several modes can share one
/// topology embedding.
WalkCorpus topology_walks(const graph::LineGraph& g, const EmbedConfig& config, std::uint64_t seed);
Matrix topology_embedding(const graph::LineGraph& g, const WalkCorpus& walks, const EmbedConfig& config,
                          std::uint64_t seed);
Matrix feature_embedding(const graph::LineGraph& g, EmbedMode mode, const WalkCorpus& walks,
                         const EmbedConfig& config, std::uint64_t seed);

/// node_id,v_0,...,v_{d-1}
void write_embedding_csv(const std::string& path, const graph::LineGraph& g, const Matrix& embedding);

// --- regression head --------------------------------------------------------------

struct HeadConfig {
  std::vector<int> hidden{32};
  int epochs = 2000;
  double learning_rate = 1e-3;
};

struct HeadResult {
  nn::Mlp model;
  Matrix predictions;  // every row of the input
  std::vector<double> loss_trace;
  // Mean intersection etc. over the test rows; zero when there are none.
  metrics::HistMetrics test_metrics;
  metrics::HistMetrics train_metrics;
};

/// Full-batch MLP regression (ReLU hidden layers, softmax output whose weights
/// start at zero) trained with the intersection loss and Adam. Throws
/// ConfigurationError when `train_mask` selects no row.
HeadResult regress_head(const Matrix& embeddings, const Matrix& labels, const std::vector<char>& train_mask,
                        const std::vector<char>& test_mask, const HeadConfig& config, std::uint64_t seed);

}  // namespace speedhist::n2v
