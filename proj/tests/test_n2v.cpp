#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "speedhist/errors.hpp"
#include "speedhist/n2v.hpp"

using namespace speedhist;
using n2v::Token;
using n2v::WalkCorpus;

namespace {

graph::LineGraph with_raw(const std::vector<std::int64_t>& ids, const std::vector<std::pair<int, int>>& edges,
                          const Matrix& raw, std::vector<graph::FeatureColumn> schema) {
  std::vector<graph::Edge> e;
  for (auto [a, b] : edges) e.push_back({a, b});
  return {ids, e, raw, std::move(schema)};
}

n2v::WeightedDigraph star(double w1, double w3) {
  return n2v::WeightedDigraph::from_edges({0, 1, 2}, {{0, 1, w1}, {0, 2, w3}});
}

double cosine(const Matrix& m, Eigen::Index a, Eigen::Index b) {
  return m.row(a).dot(m.row(b)) / (m.row(a).norm() * m.row(b).norm());
}

graph::LineGraph barbell() {
  std::vector<std::pair<int, int>> edges;
  for (int base : {0, 10}) {
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        if (i != j) edges.emplace_back(base + i, base + j);
      }
    }
  }
  edges.emplace_back(9, 10);
  edges.emplace_back(10, 9);
  return testing::make_graph(20, edges);
}

}  // namespace

TEST_SUITE("n2v") {
TEST_CASE("walk examples") {
  const auto lonely = n2v::WeightedDigraph::from_edges({5}, {});
  const auto w = n2v::random_walks(lonely, {80, 3, 1, 1, 1}, 1);
  REQUIRE(w.sequences.size() == 3);
  for (const auto& s : w.sequences) CHECK(s == std::vector<Token>{5});

  const auto chain = n2v::WeightedDigraph::from_edges({10, 11, 12}, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto c = n2v::random_walks(chain, {3, 5, 1, 1, 1}, 2);
  int from_a = 0;
  for (const auto& s : c.sequences) {
    if (s.front() != 10) continue;
    ++from_a;
    CHECK(s == std::vector<Token>{10, 11, 12});
  }
  CHECK(from_a == 5);
  CHECK_THROWS_AS(n2v::random_walks(n2v::WeightedDigraph::from_edges({}, {}), {}, 0), ArgumentError);
  CHECK_THROWS_AS(n2v::random_walks(chain, {0, 1, 1, 1, 1}, 0), ArgumentError);
}

TEST_CASE("weighted branch frequencies") {
  const auto w = n2v::random_walks(star(1.0, 3.0), {2, 10000, 1, 1, 1}, 3);
  int to1 = 0;
  int to3 = 0;
  for (const auto& s : w.sequences) {
    if (s.front() != 0) continue;
    REQUIRE(s.size() == 2);
    (s[1] == 1 ? to1 : to3) += 1;
  }
  CHECK(to1 + to3 == 10000);
  CHECK(std::abs(to1 / 10000.0 - 0.25) < 0.02);
  CHECK(std::abs(to3 / 10000.0 - 0.75) < 0.02);
}

TEST_CASE("second-order bias follows p and q") {
  // From b (arrived from a) the walk may return to a, go to c (adjacent to a)
  // or to d (two hops from a). Unnormalized weights: 1/p, 1, 1/q.
  const auto g = n2v::WeightedDigraph::from_edges(
      {0, 1, 2, 3}, {{0, 1, 1}, {1, 0, 1}, {1, 2, 1}, {2, 1, 1}, {0, 2, 1}, {2, 0, 1}, {1, 3, 1}, {3, 1, 1}});
  const double p = 2.0;
  const double q = 0.5;
  const auto w = n2v::random_walks(g, {3, 20000, p, q, 1}, 4);
  std::map<Token, int> third;
  int n = 0;
  for (const auto& s : w.sequences) {
    if (s.size() == 3 && s[0] == 0 && s[1] == 1) {
      ++third[s[2]];
      ++n;
    }
  }
  const double total = 1.0 / p + 1.0 + 1.0 / q;
  CHECK(std::abs(third[0] / double(n) - (1.0 / p) / total) < 0.02);
  CHECK(std::abs(third[2] / double(n) - 1.0 / total) < 0.02);
  CHECK(std::abs(third[3] / double(n) - (1.0 / q) / total) < 0.02);
}

TEST_CASE("topology walks follow edges and start at their source") {
  const auto g = testing::random_graph(80, 3.0, 5);
  const auto topo = n2v::topology_graph(g);
  const auto w = n2v::random_walks(topo, {20, 2, 0.5, 2.0, 3}, 6);
  CHECK(w.sequences.size() == 160);
  std::map<Token, int> starts;
  for (const auto& s : w.sequences) {
    ++starts[s.front()];
    for (std::size_t i = 0; i + 1 < s.size(); ++i) CHECK(g.has_edge(g.index_of(s[i]), g.index_of(s[i + 1])));
  }
  CHECK(starts.size() == 80);
  for (const auto& [node, count] : starts) CHECK(count == 2);
  // Worker count does not change the corpus.
  CHECK(n2v::random_walks(topo, {20, 2, 0.5, 2.0, 1}, 6).sequences == w.sequences);
}

TEST_CASE("skip-gram basics") {
  WalkCorpus one;
  one.sequences = {{7, 7, 7}};
  n2v::SkipGramOptions opt;
  opt.dims = 8;
  const auto e = n2v::skipgram_embed(one, opt, 1);
  REQUIRE(e.vocabulary == std::vector<Token>{7});
  CHECK(e.vectors.allFinite());
  CHECK(e.vectors.cols() == 8);

  WalkCorpus corpus;
  corpus.sequences = {{1, 2, 3, 4}, {4, 3, 2, 1}};
  CHECK(n2v::skipgram_embed(corpus, opt, 3).vectors == n2v::skipgram_embed(corpus, opt, 3).vectors);
  CHECK_THROWS_AS(n2v::skipgram_embed(WalkCorpus{}, opt, 0), ArgumentError);
}

TEST_CASE("barbell embeddings separate the two cliques") {
  const auto g = barbell();
  const auto walks = n2v::random_walks(n2v::topology_graph(g), {20, 20, 1, 1, 1}, 7);
  n2v::SkipGramOptions opt;
  opt.dims = 16;
  opt.window = 5;
  const auto e = n2v::skipgram_embed(walks, opt, 8);
  const Matrix v = e.lookup(g.ids());
  double intra = 0.0;
  double inter = 0.0;
  int ni = 0;
  int nx = 0;
  for (int a = 0; a < 20; ++a) {
    for (int b = a + 1; b < 20; ++b) {
      if ((a < 10) == (b < 10)) {
        intra += cosine(v, a, b);
        ++ni;
      } else {
        inter += cosine(v, a, b);
        ++nx;
      }
    }
  }
  CHECK(intra / ni > inter / nx);
}

TEST_CASE("feature graph counts co-adjacent values") {
  // Speed limits on a small line graph.
  Matrix raw(5, 1);
  raw << 50, 50, 80, 80, 110;
  const std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 2}, {2, 0}};
  const auto g = with_raw({1, 2, 3, 4, 5}, edges, raw, {{"limit", graph::FeatureKind::kCategorical}});
  const auto fg = n2v::build_feature_graph(g, 0);
  std::map<std::pair<Token, Token>, double> brute;
  for (auto [a, b] : edges) brute[{static_cast<Token>(raw(a, 0)), static_cast<Token>(raw(b, 0))}] += 1.0;
  std::map<std::pair<Token, Token>, double> got;
  for (std::size_t i = 0; i < fg.tokens.size(); ++i) {
    for (std::size_t k = fg.offsets[i]; k < fg.offsets[i + 1]; ++k) {
      got[{fg.tokens[i], fg.tokens[static_cast<std::size_t>(fg.targets[k])]}] = fg.weights[k];
    }
  }
  CHECK(got == brute);
  CHECK(fg.tokens == std::vector<Token>{50, 80, 110});

  Matrix same = Matrix::Constant(4, 1, 30.0);
  const auto flat = with_raw({1, 2, 3, 4}, {{0, 1}, {1, 2}, {2, 3}}, same, {{"limit", graph::FeatureKind::kCategorical}});
  const auto one = n2v::build_feature_graph(flat, 0);
  REQUIRE(one.tokens.size() == 1);
  CHECK(one.weight(0, 0) == 3.0);

  const auto none = with_raw({1, 2}, {}, Matrix::Constant(2, 1, 30.0), {{"limit", graph::FeatureKind::kCategorical}});
  const auto empty = n2v::build_feature_graph(none, 0);
  CHECK(empty.tokens.size() == 1);
  CHECK(empty.targets.empty());

  const auto cont = with_raw({1, 2}, {{0, 1}}, Matrix::Constant(2, 1, 0.5), {{"x", graph::FeatureKind::kContinuous}});
  CHECK_THROWS_AS(n2v::build_feature_graph(cont, 0), ArgumentError);
}

TEST_CASE("sequence manipulation worked example") {
  Matrix raw(5, 1);
  raw << 60, 80, 50, 50, 50;
  const auto g = with_raw({1680, 1384, 1567, 2104, 6405}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, raw,
                          {{"speed_limit", graph::FeatureKind::kCategorical}});
  WalkCorpus walks;
  walks.sequences = {{1680, 1384, 1567, 2104, 6405}};
  const auto out = n2v::sequence_manipulation(walks, g, 0);
  REQUIRE(out.sequences.size() == 1);
  CHECK(out.sequences[0] == std::vector<Token>{60, 80, 50, 50, 50});

  walks.sequences.push_back({9999});
  CHECK_THROWS_AS(n2v::sequence_manipulation(walks, g, 0), StructuralError);
}

TEST_CASE("manipulated walks only contain realizable feature bigrams") {
  const auto g0 = testing::random_graph(120, 3.0, 9);
  Rng rng(9);
  Matrix raw(120, 1);
  std::uniform_int_distribution<int> limit(0, 4);
  for (int i = 0; i < 120; ++i) raw(i, 0) = 30 + 20 * limit(rng);
  const auto g = with_raw(g0.ids(), {}, raw, {{"limit", graph::FeatureKind::kCategorical}});
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : g0.edges()) edges.emplace_back(e.src, e.dst);
  const auto gg = with_raw(g0.ids(), edges, raw, {{"limit", graph::FeatureKind::kCategorical}});
  std::set<std::pair<Token, Token>> realizable;
  for (const auto& e : gg.edges()) {
    realizable.emplace(static_cast<Token>(raw(e.src, 0)), static_cast<Token>(raw(e.dst, 0)));
  }
  const auto walks = n2v::random_walks(n2v::topology_graph(gg), {30, 3, 1, 1, 1}, 10);
  const auto seqs = n2v::sequence_manipulation(walks, gg, 0);
  REQUIRE(seqs.sequences.size() == walks.sequences.size());
  for (std::size_t s = 0; s < seqs.sequences.size(); ++s) {
    CHECK(seqs.sequences[s].size() == walks.sequences[s].size());
    for (std::size_t i = 0; i + 1 < seqs.sequences[s].size(); ++i) {
      CHECK(realizable.count({seqs.sequences[s][i], seqs.sequences[s][i + 1]}) == 1);
    }
  }

  // A constant feature gives constant sequences.
  const auto flat = with_raw(g0.ids(), edges, Matrix::Constant(120, 1, 70.0), {{"limit", graph::FeatureKind::kCategorical}});
  for (const auto& s : n2v::sequence_manipulation(walks, flat, 0).sequences) {
    for (Token t : s) CHECK(t == 70);
  }
}

TEST_CASE("continuous features map to deciles") {
  Matrix raw(100, 1);
  for (int i = 0; i < 100; ++i) raw(i, 0) = 99 - i;
  const auto g = with_raw(testing::make_graph(100, {}).ids(), {}, raw, {{"len", graph::FeatureKind::kContinuous}});
  const auto t = n2v::feature_tokens(g, 0);
  for (int i = 0; i < 100; ++i) CHECK(t[static_cast<std::size_t>(i)] == (99 - i) / 10);
}

TEST_CASE("embedding dimensions") {
  Matrix raw(30, 2);
  for (int i = 0; i < 30; ++i) {
    raw(i, 0) = 30 + 20 * (i % 3);
    raw(i, 1) = i * 0.1;
  }
  const auto g0 = testing::random_graph(30, 3.0, 12);
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : g0.edges()) edges.emplace_back(e.src, e.dst);
  const auto g = with_raw(g0.ids(), edges, raw,
                          {{"limit", graph::FeatureKind::kCategorical}, {"x", graph::FeatureKind::kContinuous}});
  n2v::EmbedConfig cfg;
  cfg.walks = {10, 2, 1, 1, 1};
  cfg.topology.dims = 12;
  cfg.topology.epochs = 1;
  cfg.feature.dims = 4;
  cfg.feature.epochs = 1;
  CHECK(n2v::embed_with_features(g, n2v::EmbedMode::kBase, cfg, 1).cols() == 12);
  const Matrix sm = n2v::embed_with_features(g, n2v::EmbedMode::kSequenceManipulation, cfg, 1);
  CHECK(sm.rows() == 30);
  CHECK(sm.cols() == 12 + 2 * 4);
  CHECK(sm == n2v::embed_with_features(g, n2v::EmbedMode::kSequenceManipulation, cfg, 1));
  // Feature graphs are built from categorical columns only.
  cfg.features = {0};
  CHECK(n2v::embed_with_features(g, n2v::EmbedMode::kFeatureGraph, cfg, 1).cols() == 12 + 4);
  CHECK(n2v::parse_embed_mode("sequence") == n2v::EmbedMode::kSequenceManipulation);
  CHECK_THROWS_AS(n2v::parse_embed_mode("other"), ArgumentError);
}

TEST_CASE("regression head") {
  Rng rng(13);
  const int n = 40;
  Matrix emb(n, 4);
  Matrix labels = Matrix::Zero(n, 22);
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (int i = 0; i < n; ++i) {
    const bool left = i < n / 2;
    for (int c = 0; c < 4; ++c) emb(i, c) = (left ? 1.0 : -1.0) * (c % 2 ? 1.0 : 0.5) + jitter(rng);
    labels(i, left ? 5 : 15) = 0.7;
    labels(i, left ? 6 : 16) = 0.3;
  }
  std::vector<char> train(n, 0);
  std::vector<char> test(n, 0);
  for (int i = 0; i < n; ++i) (i % 3 == 0 ? test : train)[static_cast<std::size_t>(i)] = 1;

  n2v::HeadConfig zero;
  zero.epochs = 0;
  const auto z = n2v::regress_head(emb, labels, train, test, zero, 1);
  CHECK((z.predictions.array() - 1.0 / 22.0).abs().maxCoeff() < 1e-15);

  n2v::HeadConfig cfg;
  const auto a = n2v::regress_head(emb, labels, train, test, cfg, 2);
  CHECK(a.train_metrics.intersection >= 0.9);
  const auto b = n2v::regress_head(emb, labels, train, test, cfg, 2);
  CHECK(a.test_metrics.intersection == b.test_metrics.intersection);
  CHECK(a.predictions == b.predictions);

  CHECK_THROWS_AS(n2v::regress_head(emb, labels, std::vector<char>(n, 0), test, cfg, 2), ConfigurationError);
}
}
