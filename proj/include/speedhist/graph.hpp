#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "speedhist/matrix.hpp"

namespace speedhist::graph {

enum class FeatureKind { kCategorical, kContinuous };

struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
};

struct Segment {
  std::int64_t id = 0;
  std::int64_t from = 0;
  std::int64_t to = 0;
  // Undirected segments may be traversed in both directions.
  bool directed = true;
  std::vector<double> features;  // raw values, one per schema column
};

/// Intersection graph: intersections plus the road segments between them.
struct RoadNetwork {
  std::vector<std::int64_t> intersections;
  std::vector<FeatureColumn> schema;
  std::vector<Segment> segments;
  // Turns (from segment id, to segment id) that are not allowed.
  std::vector<std::pair<std::int64_t, std::int64_t>> banned_turns;

  /// Throws StructuralError on dangling intersections, duplicate ids or
  /// feature rows that do not match the schema.
  void validate() const;
};

struct Edge {
  int src = 0;
  int dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Encodes raw feature columns: one-hot for categorical columns (categories in
/// ascending order), min-max scaling to [0,1] for continuous ones. A constant
/// continuous column encodes to 0.
Matrix encode_features(const Matrix& raw, std::span<const FeatureColumn> schema);

/// Directed graph over road segments. Node i is the i-th segment; the edge
/// (i, j) means a vehicle can continue from segment i onto segment j.
class LineGraph {
 public:
  LineGraph() = default;

  /// Builds from an explicit edge list. Encoded features are derived from
  /// `raw` via encode_features. Duplicate edges and self-loops are dropped.
  LineGraph(std::vector<std::int64_t> ids, std::vector<Edge> edges, Matrix raw,
            std::vector<FeatureColumn> schema);

  /// Builds with an already-encoded feature matrix and no raw columns.
  static LineGraph with_encoded_features(std::vector<std::int64_t> ids, std::vector<Edge> edges,
                                         Matrix features);

  [[nodiscard]] std::size_t num_nodes() const { return ids_.size(); }
  [[nodiscard]] std::size_t num_edges() const { return out_targets_.size(); }
  [[nodiscard]] const std::vector<std::int64_t>& ids() const { return ids_; }
  [[nodiscard]] std::int64_t id(int node) const { return ids_[static_cast<std::size_t>(node)]; }
  /// Node index of segment `id`; throws StructuralError when absent.
  [[nodiscard]] int index_of(std::int64_t id) const;
  [[nodiscard]] bool contains(std::int64_t id) const { return index_.count(id) != 0; }

  [[nodiscard]] std::span<const int> out_neighbors(int node) const;
  [[nodiscard]] std::span<const int> in_neighbors(int node) const;
  [[nodiscard]] bool has_edge(int src, int dst) const;
  [[nodiscard]] std::vector<Edge> edges() const;

  /// Directed 0/1 adjacency.
  [[nodiscard]] SparseMatrix adjacency() const;

  [[nodiscard]] const Matrix& features() const { return features_; }
  [[nodiscard]] const Matrix& raw_features() const { return raw_; }
  [[nodiscard]] const std::vector<FeatureColumn>& schema() const { return schema_; }
  /// Index of the raw column called `name`, or -1.
  [[nodiscard]] int raw_column(const std::string& name) const;

  /// Subgraph induced on `nodes` (in the given order). Feature rows are copied
  /// from this graph, not re-encoded.
  [[nodiscard]] LineGraph induced_subgraph(std::span<const int> nodes) const;

 private:
  void build_csr(std::vector<Edge> edges);

  std::vector<std::int64_t> ids_;
  std::map<std::int64_t, int> index_;
  std::vector<std::size_t> out_offsets_;
  std::vector<int> out_targets_;
  std::vector<std::size_t> in_offsets_;
  std::vector<int> in_sources_;
  Matrix raw_;
  Matrix features_;
  std::vector<FeatureColumn> schema_;
};

/// One node per segment; edge (i, j) iff segment i can exit through an
/// intersection that segment j enters from, i != j, and the turn is not banned.
LineGraph build_line_graph(const RoadNetwork& network);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I. When
/// `symmetrize` is set A is replaced by max(A, A^T) first.
SparseMatrix normalize_adjacency(const LineGraph& g, bool symmetrize = true);

inline constexpr int kDefaultBuckets = 22;
inline constexpr double kDefaultBucketWidth = 2.0;  // m/s
inline constexpr int kDefaultMinObservations = 50;

struct SpeedHistogram {
  std::vector<double> buckets;
  double bucket_width = kDefaultBucketWidth;
  // Observations that fell inside the histogram support.
  std::size_t retained = 0;
};

/// Normalized k-bucket histogram; bucket i covers [i*width, (i+1)*width).
/// Speeds outside [0, k*width) and non-finite values are discarded. Throws
/// InsufficientDataError when nothing is left.
SpeedHistogram bucketize(std::span<const double> speeds_mps, int k = kDefaultBuckets,
                         double width = kDefaultBucketWidth);

// ---------------------------------------------------------------------------
// CSV interchange.
//
// segments.csv    segment_id,from,to,directed,<name>:cat|<name>:num,...
// observations.csv segment_id,speed_mps
// labels.csv      segment_id,b_0,...,b_{k-1}
// turns.csv       from_segment,to_segment   (banned turns)
// ---------------------------------------------------------------------------

RoadNetwork read_segments_csv(const std::string& path);
void write_segments_csv(const std::string& path, const RoadNetwork& network);

using BannedTurns = std::vector<std::pair<std::int64_t, std::int64_t>>;
BannedTurns read_banned_turns_csv(const std::string& path);
void write_banned_turns_csv(const std::string& path, const BannedTurns& turns);

using Observations = std::map<std::int64_t, std::vector<double>>;
Observations read_observations_csv(const std::string& path);
void write_observations_csv(const std::string& path, const Observations& observations);

using LabelTable = std::map<std::int64_t, std::vector<double>>;
LabelTable read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path, const LabelTable& labels);

}  // namespace speedhist::graph
