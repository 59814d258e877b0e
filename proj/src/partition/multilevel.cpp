#include <algorithm>
#include <climits>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include "speedhist/errors.hpp"
#include "speedhist/partition.hpp"
#include "speedhist/rng.hpp"

namespace speedhist::partition {

namespace {

constexpr int kMinCoarsestNodes = 200;
constexpr double kStallRatio = 0.95;

// Dense per-part accumulator that only clears the entries it touched.
class PartConnectivity {
 public:
  explicit PartConnectivity(int s) : weight_(static_cast<std::size_t>(s), 0) {}

  void compute(const WeightedGraph& wg, const std::vector<int>& part, int v) {
    for (int q : touched_) weight_[static_cast<std::size_t>(q)] = 0;
    touched_.clear();
    const auto uv = static_cast<std::size_t>(v);
    for (std::size_t e = wg.offsets[uv]; e < wg.offsets[uv + 1]; ++e) {
      const int q = part[static_cast<std::size_t>(wg.targets[e])];
      if (weight_[static_cast<std::size_t>(q)] == 0) touched_.push_back(q);
      weight_[static_cast<std::size_t>(q)] += wg.edge_weight[e];
    }
  }

  [[nodiscard]] long operator[](int q) const { return weight_[static_cast<std::size_t>(q)]; }
  [[nodiscard]] const std::vector<int>& touched() const { return touched_; }

 private:
  std::vector<long> weight_;
  std::vector<int> touched_;
};

struct Candidate {
  long gain = 0;
  int to = -1;
};

// Best admissible move of v to an adjacent part. Lowest part index wins ties.
std::optional<Candidate> best_move(const WeightedGraph& wg, const std::vector<int>& part,
                                   const std::vector<long>& part_weight, long max_part_weight, int v,
                                   PartConnectivity& conn) {
  const int from = part[static_cast<std::size_t>(v)];
  const long vw = wg.vertex_weight[static_cast<std::size_t>(v)];
  if (part_weight[static_cast<std::size_t>(from)] - vw <= 0) return std::nullopt;
  conn.compute(wg, part, v);
  std::optional<Candidate> best;
  for (int q : conn.touched()) {
    if (q == from || part_weight[static_cast<std::size_t>(q)] + vw > max_part_weight) continue;
    const long gain = conn[q] - conn[from];
    if (!best || gain > best->gain || (gain == best->gain && q < best->to)) best = Candidate{gain, q};
  }
  return best;
}

// Orders by gain descending, then node ascending.
struct ByGain {
  bool operator()(const std::pair<long, int>& a, const std::pair<long, int>& b) const {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  }
};

std::vector<long> part_weights(const WeightedGraph& wg, const std::vector<int>& part, int s) {
  std::vector<long> pw(static_cast<std::size_t>(s), 0);
  for (std::size_t v = 0; v < part.size(); ++v) pw[static_cast<std::size_t>(part[v])] += wg.vertex_weight[v];
  return pw;
}

long fm_pass(const WeightedGraph& wg, std::vector<int>& part, std::vector<long>& pw, long max_part_weight,
             long cut) {
  const int n = wg.num_nodes();
  PartConnectivity conn(static_cast<int>(pw.size()));
  std::set<std::pair<long, int>, ByGain> queue;
  std::vector<std::optional<long>> key(static_cast<std::size_t>(n));
  std::vector<char> moved(static_cast<std::size_t>(n), 0);

  auto update = [&](int v) {
    auto& k = key[static_cast<std::size_t>(v)];
    if (k) queue.erase({*k, v});
    k.reset();
    if (moved[static_cast<std::size_t>(v)]) return;
    if (auto c = best_move(wg, part, pw, max_part_weight, v, conn)) {
      k = c->gain;
      queue.insert({c->gain, v});
    }
  };
  for (int v = 0; v < n; ++v) update(v);

  struct Move {
    int node, from, to;
  };
  std::vector<Move> log;
  long best_cut = cut;
  std::size_t best_len = 0;
  const int patience = std::max(20, n / 10);
  int since_best = 0;

  while (!queue.empty()) {
    auto [gain, v] = *queue.begin();
    queue.erase(queue.begin());
    key[static_cast<std::size_t>(v)].reset();
    auto c = best_move(wg, part, pw, max_part_weight, v, conn);
    if (!c) continue;
    if (c->gain != gain) {
      key[static_cast<std::size_t>(v)] = c->gain;
      queue.insert({c->gain, v});
      continue;
    }
    const int from = part[static_cast<std::size_t>(v)];
    const long vw = wg.vertex_weight[static_cast<std::size_t>(v)];
    part[static_cast<std::size_t>(v)] = c->to;
    pw[static_cast<std::size_t>(from)] -= vw;
    pw[static_cast<std::size_t>(c->to)] += vw;
    cut -= c->gain;
    moved[static_cast<std::size_t>(v)] = 1;
    log.push_back({v, from, c->to});
    if (cut < best_cut) {
      best_cut = cut;
      best_len = log.size();
      since_best = 0;
    } else if (++since_best > patience) {
      break;
    }
    const auto uv = static_cast<std::size_t>(v);
    for (std::size_t e = wg.offsets[uv]; e < wg.offsets[uv + 1]; ++e) update(wg.targets[e]);
  }
  while (log.size() > best_len) {
    const auto m = log.back();
    log.pop_back();
    const long vw = wg.vertex_weight[static_cast<std::size_t>(m.node)];
    part[static_cast<std::size_t>(m.node)] = m.from;
    pw[static_cast<std::size_t>(m.to)] -= vw;
    pw[static_cast<std::size_t>(m.from)] += vw;
  }
  return best_cut;
}

struct Coarsening {
  WeightedGraph graph;
  std::vector<int> map;  // fine node -> coarse node
};

Coarsening coarsen(const WeightedGraph& wg, Rng& rng, long max_vertex_weight) {
  const int n = wg.num_nodes();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<int> match(static_cast<std::size_t>(n), -1);
  for (int u : order) {
    const auto uu = static_cast<std::size_t>(u);
    if (match[uu] != -1) continue;
    int best = -1;
    int best_w = -1;
    for (std::size_t e = wg.offsets[uu]; e < wg.offsets[uu + 1]; ++e) {
      const int v = wg.targets[e];
      const auto uvv = static_cast<std::size_t>(v);
      if (match[uvv] != -1 || v == u) continue;
      if (wg.vertex_weight[uu] + wg.vertex_weight[uvv] > max_vertex_weight) continue;
      const int w = wg.edge_weight[e];
      if (w > best_w || (w == best_w && v < best)) {
        best = v;
        best_w = w;
      }
    }
    if (best == -1) {
      match[uu] = u;
    } else {
      match[uu] = best;
      match[static_cast<std::size_t>(best)] = u;
    }
  }

  Coarsening out;
  out.map.assign(static_cast<std::size_t>(n), -1);
  std::vector<std::pair<int, int>> members;
  for (int u : order) {
    if (out.map[static_cast<std::size_t>(u)] != -1) continue;
    const int v = match[static_cast<std::size_t>(u)];
    const int c = static_cast<int>(members.size());
    out.map[static_cast<std::size_t>(u)] = c;
    out.map[static_cast<std::size_t>(v)] = c;
    members.emplace_back(std::min(u, v), std::max(u, v));
  }
  const int nc = static_cast<int>(members.size());
  auto& cg = out.graph;
  cg.vertex_weight.assign(static_cast<std::size_t>(nc), 0);
  cg.offsets.assign(1, 0);
  std::vector<int> slot(static_cast<std::size_t>(nc), -1);
  for (int c = 0; c < nc; ++c) {
    const auto [a, b] = members[static_cast<std::size_t>(c)];
    const std::size_t row_start = cg.targets.size();
    auto absorb = [&](int fine) {
      const auto uf = static_cast<std::size_t>(fine);
      cg.vertex_weight[static_cast<std::size_t>(c)] += wg.vertex_weight[uf];
      for (std::size_t e = wg.offsets[uf]; e < wg.offsets[uf + 1]; ++e) {
        const int t = out.map[static_cast<std::size_t>(wg.targets[e])];
        if (t == c) continue;
        auto& s = slot[static_cast<std::size_t>(t)];
        if (s == -1) {
          s = static_cast<int>(cg.targets.size());
          cg.targets.push_back(t);
          cg.edge_weight.push_back(0);
        }
        cg.edge_weight[static_cast<std::size_t>(s)] += wg.edge_weight[e];
      }
    };
    absorb(a);
    if (b != a) absorb(b);
    for (std::size_t k = row_start; k < cg.targets.size(); ++k) slot[static_cast<std::size_t>(cg.targets[k])] = -1;
    cg.offsets.push_back(cg.targets.size());
  }
  return out;
}

// Seeded greedy region growing. Components are visited largest first so that
// disconnected pieces are packed by size before regions spill across them.
std::vector<int> grow_regions(const WeightedGraph& wg, int s, long max_part_weight, Rng& rng) {
  const int n = wg.num_nodes();
  const double target = static_cast<double>(wg.total_vertex_weight()) / s;

  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> comp_nodes;
  std::vector<long> comp_weight;
  for (int r = 0; r < n; ++r) {
    if (comp[static_cast<std::size_t>(r)] != -1) continue;
    const int id = static_cast<int>(comp_nodes.size());
    comp_nodes.emplace_back();
    comp_weight.push_back(0);
    std::vector<int> stack{r};
    comp[static_cast<std::size_t>(r)] = id;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      comp_nodes.back().push_back(v);
      comp_weight.back() += wg.vertex_weight[static_cast<std::size_t>(v)];
      for (std::size_t e = wg.offsets[static_cast<std::size_t>(v)]; e < wg.offsets[static_cast<std::size_t>(v) + 1];
           ++e) {
        const int t = wg.targets[e];
        if (comp[static_cast<std::size_t>(t)] == -1) {
          comp[static_cast<std::size_t>(t)] = id;
          stack.push_back(t);
        }
      }
    }
  }
  std::vector<int> comp_order(comp_nodes.size());
  std::iota(comp_order.begin(), comp_order.end(), 0);
  std::stable_sort(comp_order.begin(), comp_order.end(),
                   [&](int a, int b) { return comp_weight[static_cast<std::size_t>(a)] > comp_weight[static_cast<std::size_t>(b)]; });

  std::vector<int> part(static_cast<std::size_t>(n), -1);
  std::vector<char> rejected(static_cast<std::size_t>(n), 0);
  auto next_seed = [&]() -> int {
    for (int c : comp_order) {
      std::vector<int> free;
      for (int v : comp_nodes[static_cast<std::size_t>(c)]) {
        if (part[static_cast<std::size_t>(v)] == -1 && !rejected[static_cast<std::size_t>(v)]) free.push_back(v);
      }
      if (!free.empty()) {
        std::sort(free.begin(), free.end());
        std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
        return free[pick(rng)];
      }
    }
    return -1;
  };

  for (int p = 0; p < s - 1; ++p) {
    long weight = 0;
    std::fill(rejected.begin(), rejected.end(), 0);
    std::vector<long> conn(static_cast<std::size_t>(n), 0);
    std::set<std::pair<long, int>, ByGain> frontier;
    while (weight < target) {
      if (frontier.empty()) {
        const int seed = next_seed();
        if (seed == -1) break;
        frontier.insert({0, seed});
      }
      auto [c, v] = *frontier.begin();
      frontier.erase(frontier.begin());
      const long vw = wg.vertex_weight[static_cast<std::size_t>(v)];
      if (weight > 0 && weight + vw > max_part_weight) {
        rejected[static_cast<std::size_t>(v)] = 1;
        continue;
      }
      part[static_cast<std::size_t>(v)] = p;
      weight += vw;
      const auto uv = static_cast<std::size_t>(v);
      for (std::size_t e = wg.offsets[uv]; e < wg.offsets[uv + 1]; ++e) {
        const int t = wg.targets[e];
        const auto ut = static_cast<std::size_t>(t);
        if (part[ut] != -1) continue;
        frontier.erase({conn[ut], t});
        conn[ut] += wg.edge_weight[e];
        frontier.insert({conn[ut], t});
      }
    }
  }
  for (auto& p : part) {
    if (p == -1) p = s - 1;
  }
  return part;
}

// Moves nodes out of overweight parts, then seeds empty parts. Each step takes
// the move with the largest cut gain; lowest node, then lowest part, wins ties.
void rebalance(const WeightedGraph& wg, std::vector<int>& part, int s, long max_part_weight) {
  auto pw = part_weights(wg, part, s);
  PartConnectivity conn(s);
  const int n = wg.num_nodes();
  for (int guard = 0; guard < 4 * n + 4; ++guard) {
    int over = -1;
    for (int p = 0; p < s; ++p) {
      if (pw[static_cast<std::size_t>(p)] > max_part_weight) {
        over = p;
        break;
      }
    }
    if (over == -1) break;
    int lightest = static_cast<int>(std::min_element(pw.begin(), pw.end()) - pw.begin());
    long best_gain = LONG_MIN;
    int best_v = -1;
    int best_q = -1;
    for (int v = 0; v < n; ++v) {
      if (part[static_cast<std::size_t>(v)] != over) continue;
      const long vw = wg.vertex_weight[static_cast<std::size_t>(v)];
      conn.compute(wg, part, v);
      auto consider = [&](int q) {
        if (q == over || pw[static_cast<std::size_t>(q)] + vw > max_part_weight) return;
        const long gain = conn[q] - conn[over];
        if (gain > best_gain || (gain == best_gain && (v < best_v || (v == best_v && q < best_q)))) {
          best_gain = gain;
          best_v = v;
          best_q = q;
        }
      };
      for (int q : conn.touched()) consider(q);
      consider(lightest);
    }
    if (best_v == -1) break;
    const long vw = wg.vertex_weight[static_cast<std::size_t>(best_v)];
    part[static_cast<std::size_t>(best_v)] = best_q;
    pw[static_cast<std::size_t>(over)] -= vw;
    pw[static_cast<std::size_t>(best_q)] += vw;
  }
  for (int q = 0; q < s; ++q) {
    if (pw[static_cast<std::size_t>(q)] != 0) continue;
    const int donor = static_cast<int>(std::max_element(pw.begin(), pw.end()) - pw.begin());
    long best_gain = LONG_MIN;
    int best_v = -1;
    for (int v = 0; v < n; ++v) {
      if (part[static_cast<std::size_t>(v)] != donor) continue;
      if (pw[static_cast<std::size_t>(donor)] - wg.vertex_weight[static_cast<std::size_t>(v)] <= 0) continue;
      conn.compute(wg, part, v);
      const long gain = conn[q] - conn[donor];
      if (gain > best_gain) {
        best_gain = gain;
        best_v = v;
      }
    }
    if (best_v == -1) continue;
    const long vw = wg.vertex_weight[static_cast<std::size_t>(best_v)];
    part[static_cast<std::size_t>(best_v)] = q;
    pw[static_cast<std::size_t>(donor)] -= vw;
    pw[static_cast<std::size_t>(q)] += vw;
  }
}

}  // namespace

long WeightedGraph::total_vertex_weight() const {
  return std::accumulate(vertex_weight.begin(), vertex_weight.end(), 0L);
}

WeightedGraph to_weighted(const graph::LineGraph& g) {
  const int n = static_cast<int>(g.num_nodes());
  WeightedGraph wg;
  wg.vertex_weight.assign(static_cast<std::size_t>(n), 1);
  wg.offsets.assign(1, 0);
  std::vector<int> weight(static_cast<std::size_t>(n), 0);
  std::vector<int> touched;
  for (int v = 0; v < n; ++v) {
    for (int t : g.out_neighbors(v)) {
      if (weight[static_cast<std::size_t>(t)]++ == 0) touched.push_back(t);
    }
    for (int t : g.in_neighbors(v)) {
      if (weight[static_cast<std::size_t>(t)]++ == 0) touched.push_back(t);
    }
    std::sort(touched.begin(), touched.end());
    for (int t : touched) {
      wg.targets.push_back(t);
      wg.edge_weight.push_back(weight[static_cast<std::size_t>(t)]);
      weight[static_cast<std::size_t>(t)] = 0;
    }
    touched.clear();
    wg.offsets.push_back(wg.targets.size());
  }
  return wg;
}

long weighted_cut(const WeightedGraph& wg, const std::vector<int>& part) {
  long cut = 0;
  for (int v = 0; v < wg.num_nodes(); ++v) {
    const auto uv = static_cast<std::size_t>(v);
    for (std::size_t e = wg.offsets[uv]; e < wg.offsets[uv + 1]; ++e) {
      const int t = wg.targets[e];
      if (t > v && part[uv] != part[static_cast<std::size_t>(t)]) cut += wg.edge_weight[e];
    }
  }
  return cut;
}

int max_cluster_size(int n, int s, double imbalance) {
  const double ideal = static_cast<double>(n) / s;
  const int ceil_ideal = (n + s - 1) / s;
  return std::max(ceil_ideal, static_cast<int>(std::floor((1.0 + imbalance) * ideal + 1e-9)));
}

long refine(const WeightedGraph& wg, std::vector<int>& part, int s, long max_part_weight, int passes) {
  if (part.size() != static_cast<std::size_t>(wg.num_nodes())) throw ArgumentError("assignment size mismatch");
  auto pw = part_weights(wg, part, s);
  long cut = weighted_cut(wg, part);
  for (int pass = 0; pass < passes; ++pass) {
    const long next = fm_pass(wg, part, pw, max_part_weight, cut);
    if (next >= cut) break;
    cut = next;
  }
  return cut;
}

PartitionSet PartitionSet::from_assignment(std::vector<int> assignment, int s) {
  if (s < 1) throw ArgumentError("cluster count must be positive");
  PartitionSet p;
  p.num_clusters = s;
  p.clusters.assign(static_cast<std::size_t>(s), {});
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    const int c = assignment[v];
    if (c < 0 || c >= s) throw ArgumentError("cluster index out of range");
    p.clusters[static_cast<std::size_t>(c)].push_back(static_cast<int>(v));
  }
  p.assignment = std::move(assignment);
  return p;
}

PartitionSet partition(const graph::LineGraph& g, int s, const PartitionOptions& options) {
  const int n = static_cast<int>(g.num_nodes());
  if (s < 1 || s > n) {
    throw ArgumentError("cluster count " + std::to_string(s) + " outside [1, " + std::to_string(n) + "]");
  }
  if (s == 1) return PartitionSet::from_assignment(std::vector<int>(static_cast<std::size_t>(n), 0), 1);
  if (s == n) {
    std::vector<int> a(static_cast<std::size_t>(n));
    std::iota(a.begin(), a.end(), 0);
    return PartitionSet::from_assignment(std::move(a), s);
  }

  Rng rng(derive_seed(options.seed, 0x9a27));
  const long max_w = max_cluster_size(n, s, options.imbalance);
  const int coarsest_target = std::max(4 * s, kMinCoarsestNodes);
  const long max_vertex_weight =
      std::max(1L, std::min(max_w, static_cast<long>(1.5 * n / coarsest_target)));

  std::vector<WeightedGraph> levels{to_weighted(g)};
  std::vector<std::vector<int>> maps;
  while (levels.back().num_nodes() > coarsest_target) {
    auto c = coarsen(levels.back(), rng, max_vertex_weight);
    if (c.graph.num_nodes() > kStallRatio * levels.back().num_nodes()) break;
    maps.push_back(std::move(c.map));
    levels.push_back(std::move(c.graph));
  }

  std::vector<RefinementRecord> trace;
  std::vector<int> part;
  {
    const auto& coarse = levels.back();
    long best_cut = LONG_MAX;
    bool best_feasible = false;
    RefinementRecord best_record;
    for (int trial = 0; trial < std::max(1, options.initial_trials); ++trial) {
      auto candidate = grow_regions(coarse, s, max_w, rng);
      RefinementRecord rec{coarse.num_nodes(), weighted_cut(coarse, candidate), 0};
      rec.cut_after = refine(coarse, candidate, s, max_w, options.refinement_passes);
      auto pw = part_weights(coarse, candidate, s);
      const bool feasible = *std::max_element(pw.begin(), pw.end()) <= max_w &&
                            std::find(pw.begin(), pw.end(), 0L) == pw.end();
      if (part.empty() || (feasible && !best_feasible) || (feasible == best_feasible && rec.cut_after < best_cut)) {
        part = std::move(candidate);
        best_cut = rec.cut_after;
        best_feasible = feasible;
        best_record = rec;
      }
    }
    trace.push_back(best_record);
  }

  for (std::size_t level = levels.size() - 1; level > 0; --level) {
    const auto& map = maps[level - 1];
    std::vector<int> fine(map.size());
    for (std::size_t v = 0; v < map.size(); ++v) fine[v] = part[static_cast<std::size_t>(map[v])];
    part = std::move(fine);
    const auto& wg = levels[level - 1];
    RefinementRecord rec{wg.num_nodes(), weighted_cut(wg, part), 0};
    rec.cut_after = refine(wg, part, s, max_w, options.refinement_passes);
    trace.push_back(rec);
  }

  // Coarse vertex weights can leave the finest level out of balance.
  const auto& finest = levels.front();
  rebalance(finest, part, s, max_w);
  RefinementRecord rec{finest.num_nodes(), weighted_cut(finest, part), 0};
  rec.cut_after = refine(finest, part, s, max_w, options.refinement_passes);
  trace.push_back(rec);

  auto out = PartitionSet::from_assignment(std::move(part), s);
  out.refinement_trace = std::move(trace);
  return out;
}

long edge_cut(const graph::LineGraph& g, const PartitionSet& p) {
  if (p.assignment.size() != g.num_nodes()) throw ArgumentError("assignment does not match graph");
  long cut = 0;
  for (const auto& e : g.edges()) {
    if (p.assignment[static_cast<std::size_t>(e.src)] != p.assignment[static_cast<std::size_t>(e.dst)]) ++cut;
  }
  return cut;
}

}  // namespace speedhist::partition
