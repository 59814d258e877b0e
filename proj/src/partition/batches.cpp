#include <algorithm>
#include <numeric>

#include "speedhist/csv.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/partition.hpp"
#include "speedhist/rng.hpp"

namespace speedhist::partition {

std::vector<Batch> form_batches(const graph::LineGraph& g, const PartitionSet& p, int num_batches,
                                std::uint64_t seed) {
  if (p.assignment.size() != g.num_nodes()) throw ArgumentError("partition does not match graph");
  if (num_batches < 1) throw ArgumentError("batch count must be positive");
  if (num_batches > p.num_clusters) {
    throw ArgumentError("batch count " + std::to_string(num_batches) + " exceeds cluster count " +
                        std::to_string(p.num_clusters));
  }
  if (p.num_clusters % num_batches != 0) {
    throw ArgumentError("cluster count " + std::to_string(p.num_clusters) + " is not a multiple of batch count " +
                        std::to_string(num_batches));
  }
  const int q = p.num_clusters / num_batches;
  std::vector<int> order(static_cast<std::size_t>(p.num_clusters));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0xba7c));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Batch> batches(static_cast<std::size_t>(num_batches));
  for (int b = 0; b < num_batches; ++b) {
    auto& batch = batches[static_cast<std::size_t>(b)];
    for (int k = 0; k < q; ++k) {
      const int c = order[static_cast<std::size_t>(b * q + k)];
      batch.clusters.push_back(c);
      const auto& members = p.clusters[static_cast<std::size_t>(c)];
      batch.nodes.insert(batch.nodes.end(), members.begin(), members.end());
    }
    std::sort(batch.nodes.begin(), batch.nodes.end());
    batch.graph = g.induced_subgraph(batch.nodes);
  }
  return batches;
}

void write_assignment_csv(const std::string& path, const graph::LineGraph& g, const PartitionSet& p) {
  if (p.assignment.size() != g.num_nodes()) throw ArgumentError("partition does not match graph");
  csv::Writer w(path, {"segment_id", "cluster"});
  for (std::size_t v = 0; v < p.assignment.size(); ++v) {
    w.row({std::to_string(g.ids()[v]), std::to_string(p.assignment[v])});
  }
}

PartitionSet read_assignment_csv(const std::string& path, const graph::LineGraph& g) {
  auto table = csv::read(path);
  const auto id_col = table.column("segment_id");
  const auto cl_col = table.column("cluster");
  std::vector<int> assignment(g.num_nodes(), -1);
  int s = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto id = csv::parse_int(table.rows[r][id_col], path, r + 2);
    const auto c = csv::parse_int(table.rows[r][cl_col], path, r + 2);
    if (!g.contains(id)) throw LoadError(path, "unknown segment " + std::to_string(id));
    if (c < 0) throw LoadError(path, "negative cluster index");
    assignment[static_cast<std::size_t>(g.index_of(id))] = static_cast<int>(c);
    s = std::max(s, static_cast<int>(c) + 1);
  }
  if (std::find(assignment.begin(), assignment.end(), -1) != assignment.end()) {
    throw LoadError(path, "not every segment is assigned");
  }
  return PartitionSet::from_assignment(std::move(assignment), s);
}

}  // namespace speedhist::partition
