#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "speedhist/graph.hpp"

namespace speedhist::partition {

/// Undirected graph with vertex and edge weights, stored as CSR. Used at every
/// level of the multilevel scheme.
struct WeightedGraph {
  std::vector<int> vertex_weight;
  std::vector<std::size_t> offsets;  // size n + 1
  std::vector<int> targets;
  std::vector<int> edge_weight;

  [[nodiscard]] int num_nodes() const { return static_cast<int>(vertex_weight.size()); }
  [[nodiscard]] long total_vertex_weight() const;
};

/// Symmetrized line graph. The weight of {i, j} is the number of directed
/// edges between i and j, so weighted cut equals directed edge cut.
WeightedGraph to_weighted(const graph::LineGraph& g);

/// Weighted cut of `part` on `wg`.
long weighted_cut(const WeightedGraph& wg, const std::vector<int>& part);

struct RefinementRecord {
  int level_nodes = 0;
  long cut_before = 0;
  long cut_after = 0;
};

struct PartitionSet {
  std::vector<int> assignment;  // node -> cluster in [0, num_clusters)
  int num_clusters = 0;
  std::vector<std::vector<int>> clusters;  // ascending node lists
  // One record per refined level, coarsest first.
  std::vector<RefinementRecord> refinement_trace;

  /// Builds cluster lists from an assignment; throws ArgumentError when an
  /// entry is outside [0, s).
  static PartitionSet from_assignment(std::vector<int> assignment, int s);
};

struct PartitionOptions {
  // Allowed relative overshoot of a cluster over N/s (0.03 = factor 1.03).
  double imbalance = 0.03;
  std::uint64_t seed = 0;
  int refinement_passes = 8;
  int initial_trials = 4;
};

/// Largest admissible cluster size: max(ceil(N/s), floor((1+imbalance) N/s)).
int max_cluster_size(int n, int s, double imbalance);

/// Boundary Kernighan-Lin/Fiduccia-Mattheyses k-way refinement. Moves respect
/// `max_part_weight` and never empty a part. Each pass rolls back to its best
/// prefix, so the returned cut never exceeds the starting cut.
long refine(const WeightedGraph& wg, std::vector<int>& part, int s, long max_part_weight, int passes);

/// Multilevel edge-cut partitioning: heavy-edge matching coarsening down to
/// max(4s, 200) nodes, seeded region growing, then refinement while projecting
/// back. Throws ArgumentError unless 1 <= s <= N.
PartitionSet partition(const graph::LineGraph& g, int s, const PartitionOptions& options = {});

/// Number of directed edges whose endpoints lie in different clusters.
long edge_cut(const graph::LineGraph& g, const PartitionSet& p);

struct Batch {
  std::vector<int> clusters;
  std::vector<int> nodes;     // ascending indices into the full graph
  graph::LineGraph graph;     // full graph induced on `nodes`
};

/// Shuffles clusters with `seed` and groups q = s / num_batches of them per
/// batch. Each batch keeps every original edge between its nodes.
std::vector<Batch> form_batches(const graph::LineGraph& g, const PartitionSet& p, int num_batches,
                                std::uint64_t seed);

void write_assignment_csv(const std::string& path, const graph::LineGraph& g, const PartitionSet& p);
PartitionSet read_assignment_csv(const std::string& path, const graph::LineGraph& g);

}  // namespace speedhist::partition
