#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "speedhist/graph.hpp"

namespace speedhist::datagen {

enum class RoadCategory { kResidential = 0, kCollector = 1, kArterial = 2, kHighway = 3 };

struct SynthConfig {
  int grid_rows = 23;  // intersections per column
  int grid_cols = 23;  // intersections per row
  // Fraction of grid lines upgraded to arterials; one line in each direction
  // in `highway_every` becomes a highway.
  double arterial_fraction = 0.25;
  int highway_every = 8;
  std::vector<double> speed_limits_kmh{30, 50, 60, 80, 90, 110, 130};
  int min_observations = graph::kDefaultMinObservations;
  int max_observations = 150;
  // Length scale of the congestion field in grid cells.
  double congestion_length = 3.0;
  // Congestion factor range: mean speed = limit * factor.
  double congestion_min = 0.35;
  double congestion_max = 1.0;
  // Relative standard deviation of a segment's speeds plus a 1 m/s floor.
  double speed_spread = 0.12;
  // Standard deviation of the noise on the congestion proxy feature.
  double proxy_noise = 0.15;
  double labeled_fraction = 0.8;
  int buckets = graph::kDefaultBuckets;
  double bucket_width = graph::kDefaultBucketWidth;
  std::uint64_t seed = 0;

  /// Throws ArgumentError on a degenerate grid or out-of-range fractions.
  void validate() const;
};

/// Labels plus the graph they refer to.
struct LabeledDataset {
  graph::RoadNetwork network;  // empty for non-road data
  graph::LineGraph graph;
  Matrix labels;                // N x k histograms or N x C one-hot rows
  std::vector<char> labeled;    // rows carrying a label
  // Fixed split, used by datasets that ship one. Road data is split per batch.
  std::vector<char> train_mask;
  std::vector<char> validation_mask;
  std::vector<char> test_mask;
  std::vector<int> classes;     // class index per node (classification only)
  int num_classes = 0;
  graph::Observations observations;
  // Mean of the generating (truncated) speed distribution per node, m/s.
  std::vector<double> true_mean_mps;

  [[nodiscard]] bool is_classification() const { return num_classes > 0; }
  [[nodiscard]] std::size_t labeled_count() const;
};

/// Grid road network with arterial/highway overlays, a smooth congestion
/// field, and truncated-normal speed observations for a random subset of
/// segments (arterials are more likely to be observed). Raw feature columns:
/// speed_limit (cat, km/h), category (cat), length (num, m),
/// congestion_proxy (num).
LabeledDataset generate_synthetic(const SynthConfig& config);

/// Histograms for segments with at least `min_observations` retained speeds.
graph::LabelTable labels_from_observations(const graph::Observations& obs, int min_observations, int k,
                                           double width);

/// Writes segments.csv, observations.csv and labels.csv into `dir`.
void write_road_dataset(const std::string& dir, const LabeledDataset& data);
/// Reads segments.csv and labels.csv (observations.csv when present) from `dir`.
LabeledDataset load_road_dataset(const std::string& dir);

// --- Cora ---------------------------------------------------------------------------

struct CoraSplit {
  int train_per_class = 20;
  int validation = 500;
  // Test nodes; a negative value takes every node left after validation.
  int test = 1000;
  std::uint64_t seed = 0;

  /// 20 per class, 30 validation, remaining nodes as test.
  static CoraSplit literal();
};

/// Reads `<dir>/cora.content` and `<dir>/cora.cites`. Features are the binary
/// word indicators, the adjacency is symmetrized, and classes are numbered in
/// ascending label-name order. Throws LoadError naming the file on problems.
LabeledDataset load_cora(const std::string& dir, const CoraSplit& split = {});

struct CoraStats {
  std::size_t citations = 0;  // non-empty lines of cora.cites
  std::vector<std::string> class_names;
};
CoraStats cora_stats(const std::string& dir);

// --- naive baselines ---------------------------------------------------------------------

/// Bucket-wise mean of the training histograms, renormalized. Throws
/// ConfigurationError when `train_mask` selects no labeled row.
std::vector<double> naive_baseline_1(const Matrix& labels, const std::vector<char>& train_mask);

struct LimitBaseline {
  std::map<double, std::vector<double>> by_limit;
  std::vector<double> fallback;  // baseline 1

  [[nodiscard]] const std::vector<double>& predict(double limit) const;
};

/// Per-limit bucket-wise mean of the training histograms. Limits unseen in
/// training fall back to baseline 1.
LimitBaseline naive_baseline_2(const Matrix& labels, const std::vector<char>& train_mask,
                               const std::vector<double>& limits);

/// Speed-limit raw column of a road graph; throws ArgumentError when absent.
std::vector<double> speed_limits(const graph::LineGraph& g);

/// Random 2/3 : 1/3 split of the rows selected by `labeled`. Returns the
/// train mask; the test rows are the remaining labeled rows.
std::vector<char> train_split(const std::vector<char>& labeled, std::uint64_t seed);

}  // namespace speedhist::datagen
