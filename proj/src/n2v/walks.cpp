#include <algorithm>
#include <numeric>

#include "speedhist/errors.hpp"
#include "speedhist/n2v.hpp"
#include "speedhist/parallel.hpp"
#include "speedhist/rng.hpp"

namespace speedhist::n2v {

namespace {
constexpr std::uint64_t kOrderStream = 0x04de;
constexpr std::uint64_t kWalkStream = 0x3a1c;
}  // namespace

bool WeightedDigraph::has_edge(int src, int dst) const { return weight(src, dst) > 0.0; }

double WeightedDigraph::weight(int src, int dst) const {
  const auto s = static_cast<std::size_t>(src);
  const auto first = targets.begin() + static_cast<std::ptrdiff_t>(offsets[s]);
  const auto last = targets.begin() + static_cast<std::ptrdiff_t>(offsets[s + 1]);
  const auto it = std::lower_bound(first, last, dst);
  if (it == last || *it != dst) return 0.0;
  return weights[static_cast<std::size_t>(it - targets.begin())];
}

WeightedDigraph WeightedDigraph::from_edges(std::vector<Token> tokens,
                                            const std::vector<std::tuple<int, int, double>>& edges) {
  WeightedDigraph g;
  g.tokens = std::move(tokens);
  const auto n = g.tokens.size();
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  for (const auto& [s, d, w] : edges) {
    if (s < 0 || d < 0 || static_cast<std::size_t>(s) >= n || static_cast<std::size_t>(d) >= n) {
      throw StructuralError("weighted edge refers to a missing node");
    }
    rows[static_cast<std::size_t>(s)].emplace_back(d, w);
  }
  g.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (g.offsets[i] < g.targets.size() && g.targets.back() == r[k].first) {
        g.weights.back() += r[k].second;
      } else {
        g.targets.push_back(r[k].first);
        g.weights.push_back(r[k].second);
      }
    }
    g.offsets[i + 1] = g.targets.size();
  }
  return g;
}

WeightedDigraph topology_graph(const graph::LineGraph& g) {
  std::vector<std::tuple<int, int, double>> edges;
  edges.reserve(g.num_edges());
  for (const auto& e : g.edges()) edges.emplace_back(e.src, e.dst, 1.0);
  return WeightedDigraph::from_edges(g.ids(), edges);
}

namespace {
std::vector<int> walk_from(const WeightedDigraph& g, int start, int length, double p, double q, Rng& rng) {
  std::vector<int> walk{start};
  walk.reserve(static_cast<std::size_t>(length));
  std::vector<double> cumulative;
  while (static_cast<int>(walk.size()) < length) {
    const int v = walk.back();
    const auto vs = static_cast<std::size_t>(v);
    const std::size_t begin = g.offsets[vs];
    const std::size_t end = g.offsets[vs + 1];
    if (begin == end) break;
    cumulative.clear();
    double total = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      double w = g.weights[k];
      if (walk.size() > 1) {
        const int t = walk[walk.size() - 2];
        const int x = g.targets[k];
        if (x == t) {
          w /= p;
        } else if (!g.has_edge(x, t)) {
          w /= q;
        }
      }
      total += w;
      cumulative.push_back(total);
    }
    if (!(total > 0.0)) break;
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    walk.push_back(g.targets[begin + static_cast<std::size_t>(it - cumulative.begin())]);
  }
  return walk;
}
}  // namespace

WalkCorpus random_walks(const WeightedDigraph& g, const WalkOptions& options, std::uint64_t seed) {
  if (g.num_nodes() == 0) throw ArgumentError("random_walks: empty graph");
  if (options.walk_length < 1) throw ArgumentError("random_walks: walk_length must be at least 1");
  if (options.walks_per_node < 0) throw ArgumentError("random_walks: walks_per_node must be non-negative");
  if (!(options.p > 0.0) || !(options.q > 0.0)) throw ArgumentError("random_walks: p and q must be positive");

  const auto n = static_cast<std::size_t>(g.num_nodes());
  WalkCorpus corpus;
  corpus.walk_length = options.walk_length;
  corpus.walks_per_node = options.walks_per_node;
  corpus.sequences.resize(n * static_cast<std::size_t>(options.walks_per_node));
  for (int r = 0; r < options.walks_per_node; ++r) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng order_rng(derive_seed(seed, {kOrderStream, static_cast<std::uint64_t>(r)}));
    std::shuffle(order.begin(), order.end(), order_rng);
    const std::size_t base = static_cast<std::size_t>(r) * n;
    parallel_for(n, options.workers, [&](std::size_t i) {
      const int v = order[i];
      Rng rng(derive_seed(seed, {kWalkStream, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(v)}));
      const auto walk = walk_from(g, v, options.walk_length, options.p, options.q, rng);
      auto& seq = corpus.sequences[base + i];
      seq.reserve(walk.size());
      for (int x : walk) seq.push_back(g.tokens[static_cast<std::size_t>(x)]);
    });
  }
  return corpus;
}

}  // namespace speedhist::n2v
