#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "speedhist/argcn.hpp"
#include "speedhist/datagen.hpp"
#include "speedhist/metrics.hpp"
#include "speedhist/n2v.hpp"

namespace speedhist::harness {

enum class ModelKind {
  kFullGcn,         // ARGCN with adversarial phases
  kGcnNoAdv,        // the same encoder/decoder, phase 1 only
  kN2vBase,         // topology node2vec + MLP head
  kN2vFeatureGraph, // + per-feature feature-graph embeddings
  kN2vSequence,     // + per-feature sequence-manipulation embeddings
  kNaive1,          // global mean histogram
  kNaive2,          // mean histogram per speed limit
};
ModelKind parse_model(const std::string& name);
std::string to_string(ModelKind kind);

struct ExperimentConfig {
  ModelKind model = ModelKind::kFullGcn;
  int clusters = 1;
  int batches = 1;
  int repetitions = 10;
  int epochs = 2000;
  std::uint64_t seed = 0;
  int parallel = 1;
  double imbalance = 0.03;

  // Overrides applied on top of the task preset (road or classification).
  std::optional<double> gcn_learning_rate;
  std::optional<double> discriminator_learning_rate;
  std::optional<int> encoder_hidden;
  std::optional<int> embedding_dim;
  std::optional<std::vector<int>> decoder_hidden;
  std::optional<double> dropout;

  n2v::EmbedConfig embed;
  n2v::HeadConfig head;

  // When set, checkpoints, loss traces and per-node predictions are written here.
  std::string artifact_dir;

  /// Throws ArgumentError unless 1 <= batches <= clusters and the rest is sane.
  void validate() const;
};

/// Reads `key = value` lines; `#` starts a comment. Unknown keys are an error.
/// Keys: model, clusters, batches, repetitions, epochs, seed, parallel,
/// imbalance, gcn_lr, discriminator_lr, encoder_hidden, embedding_dim,
/// decoder_hidden (comma list), dropout, walk_length, walks_per_node, p, q,
/// topology_dims, feature_dims, window, negatives, w2v_epochs, head_epochs,
/// head_lr, artifact_dir.
ExperimentConfig read_config_file(const std::string& path);
/// Applies one key/value pair; throws ArgumentError on unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

struct BatchRecord {
  int repetition = 0;
  int batch = 0;
  std::size_t nodes = 0;
  std::size_t train_nodes = 0;
  std::size_t test_nodes = 0;
  double train_seconds = 0.0;
  std::size_t estimated_bytes = 0;
  bool skipped = false;
};

/// Metrics of one evaluated node.
struct NodeRecord {
  int repetition = 0;
  int batch = 0;
  std::int64_t node_id = 0;
  metrics::MetricRecord values;
};

struct RunReport {
  std::string model;
  ExperimentConfig config;
  // Mean and median over every evaluated node of every repetition; sem over
  // the per-repetition means. Classification reports accuracy-style metrics
  // per repetition instead.
  metrics::SummaryTable summary;
  std::vector<metrics::MetricRecord> repetition_means;
  std::vector<NodeRecord> nodes;
  std::vector<BatchRecord> batches;
  std::vector<std::string> warnings;
  double partition_seconds = 0.0;
  double training_seconds = 0.0;  // wall clock of all batch training
  double total_seconds = 0.0;
  std::size_t peak_estimated_bytes = 0;
  long peak_rss_kb = 0;
};

/// Runs `repetitions` times: partition into `clusters`, group into `batches`,
/// train one model per batch (up to `parallel` at once), evaluate each
/// batch's test nodes and pool per-node metrics. Road data is split 2/3 : 1/3
/// inside each batch; datasets with a fixed split keep it.
RunReport run_experiment(const datagen::LabeledDataset& data, const ExperimentConfig& config);

/// Seed of repetition r and of batch b within a repetition.
std::uint64_t repetition_seed(std::uint64_t master, int repetition);
std::uint64_t batch_seed(std::uint64_t repetition_seed, int batch);

/// Rough bytes of the dense and sparse matrices one batch keeps alive.
std::size_t estimate_batch_bytes(const argcn::ArgcnConfig& model, std::size_t nodes, std::size_t edges);

/// Writes summary.csv, summary.json, nodes.csv and batches.csv into `dir`.
void write_report(const std::string& dir, const RunReport& report);
std::string report_json(const RunReport& report);

/// Reads one or more nodes.csv files and aggregates every metric column.
metrics::SummaryTable summarize_node_files(const std::vector<std::string>& paths);

long peak_rss_kb();

}  // namespace speedhist::harness
