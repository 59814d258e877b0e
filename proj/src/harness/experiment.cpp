#include <sys/resource.h>

#include <chrono>
#include <filesystem>

#include "speedhist/csv.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/harness.hpp"
#include "speedhist/parallel.hpp"
#include "speedhist/partition.hpp"

namespace speedhist::harness {

namespace {
constexpr std::uint64_t kPartitionStream = 1;
constexpr std::uint64_t kBatchingStream = 2;
constexpr std::uint64_t kBatchStream = 3;
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kModelStream = 2;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_gcn(ModelKind k) { return k == ModelKind::kFullGcn || k == ModelKind::kGcnNoAdv; }

argcn::ArgcnConfig model_config(const ExperimentConfig& c, const datagen::LabeledDataset& data, int input_dim) {
  auto m = data.is_classification() ? argcn::ArgcnConfig::classification(input_dim, data.num_classes)
                                    : argcn::ArgcnConfig::road(input_dim, static_cast<int>(data.labels.cols()));
  m.adversarial = c.model == ModelKind::kFullGcn;
  if (c.gcn_learning_rate) m.gcn_learning_rate = m.generator_learning_rate = *c.gcn_learning_rate;
  if (c.discriminator_learning_rate) m.discriminator_learning_rate = *c.discriminator_learning_rate;
  if (c.encoder_hidden) m.encoder_hidden = *c.encoder_hidden;
  if (c.embedding_dim) m.embedding_dim = *c.embedding_dim;
  if (c.decoder_hidden) m.decoder_hidden = *c.decoder_hidden;
  if (c.dropout) m.decoder_dropout = *c.dropout;
  return m;
}

struct BatchOutcome {
  BatchRecord record;
  std::vector<NodeRecord> nodes;
  Matrix test_probs;          // classification only
  std::vector<int> test_classes;
  std::vector<std::string> warnings;
};

std::string artifact_path(const ExperimentConfig& c, int rep, int batch, const std::string& suffix) {
  return (std::filesystem::path(c.artifact_dir) /
          ("rep" + std::to_string(rep) + "_batch" + std::to_string(batch) + suffix))
      .string();
}

BatchOutcome run_batch(const datagen::LabeledDataset& data, const partition::Batch& batch,
                       const ExperimentConfig& config, std::uint64_t seed, int rep, int b) {
  BatchOutcome out;
  out.record.repetition = rep;
  out.record.batch = b;
  const auto& g = batch.graph;
  const std::size_t n = batch.nodes.size();
  out.record.nodes = n;

  Matrix labels(static_cast<Eigen::Index>(n), data.labels.cols());
  std::vector<char> labeled(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels.row(static_cast<Eigen::Index>(i)) = data.labels.row(batch.nodes[i]);
    labeled[i] = data.labeled[static_cast<std::size_t>(batch.nodes[i])];
  }
  std::vector<char> train(n, 0);
  std::vector<char> test(n, 0);
  if (!data.train_mask.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      train[i] = data.train_mask[static_cast<std::size_t>(batch.nodes[i])];
      test[i] = data.test_mask[static_cast<std::size_t>(batch.nodes[i])];
    }
  } else {
    train = datagen::train_split(labeled, derive_seed(seed, kSplitStream));
    for (std::size_t i = 0; i < n; ++i) test[i] = labeled[i] && !train[i] ? 1 : 0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.record.train_nodes += train[i] ? 1 : 0;
    out.record.test_nodes += test[i] ? 1 : 0;
  }
  if (out.record.train_nodes == 0) {
    out.record.skipped = true;
    out.warnings.push_back("repetition " + std::to_string(rep) + " batch " + std::to_string(b) +
                           ": no labeled training node, batch skipped");
    return out;
  }

  const std::uint64_t model_seed = derive_seed(seed, kModelStream);
  const auto start = Clock::now();
  Matrix predictions;
  if (is_gcn(config.model)) {
    const auto mc = model_config(config, data, static_cast<int>(g.features().cols()));
    out.record.estimated_bytes = estimate_batch_bytes(mc, n, g.num_edges());
    auto td = argcn::TrainingData::from_graph(g, labels, train);
    auto result = argcn::train(td, {mc, config.epochs, model_seed});
    predictions = argcn::predict(result.model, td.features, td.adjacency);
    if (!config.artifact_dir.empty()) {
      result.model.save(artifact_path(config, rep, b, "_model.json"));
      argcn::write_loss_trace_csv(artifact_path(config, rep, b, "_loss.csv"), result.trace);
    }
  } else if (data.is_classification()) {
    throw ConfigurationError("model " + to_string(config.model) + " only supports histogram regression");
  } else if (config.model == ModelKind::kNaive1 || config.model == ModelKind::kNaive2) {
    predictions.resize(static_cast<Eigen::Index>(n), labels.cols());
    std::vector<double> limits(n, 0.0);
    datagen::LimitBaseline baseline;
    if (config.model == ModelKind::kNaive2) {
      limits = datagen::speed_limits(g);
      baseline = datagen::naive_baseline_2(labels, train, limits);
    } else {
      baseline.fallback = datagen::naive_baseline_1(labels, train);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& h = baseline.predict(limits[i]);
      for (Eigen::Index k = 0; k < labels.cols(); ++k) predictions(static_cast<Eigen::Index>(i), k) = h[static_cast<std::size_t>(k)];
    }
  } else {
    const auto mode = config.model == ModelKind::kN2vBase           ? n2v::EmbedMode::kBase
                      : config.model == ModelKind::kN2vFeatureGraph ? n2v::EmbedMode::kFeatureGraph
                                                                    : n2v::EmbedMode::kSequenceManipulation;
    auto embed = config.embed;
    embed.walks.workers = 1;
    const Matrix emb = n2v::embed_with_features(g, mode, embed, derive_seed(model_seed, 1));
    predictions = n2v::regress_head(emb, labels, train, test, config.head, derive_seed(model_seed, 2)).predictions;
  }
  out.record.train_seconds = seconds_since(start);

  std::vector<int> test_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (test[i]) test_rows.push_back(static_cast<int>(i));
  }
  if (data.is_classification()) {
    out.test_probs.resize(static_cast<Eigen::Index>(test_rows.size()), predictions.cols());
    for (std::size_t k = 0; k < test_rows.size(); ++k) {
      const int r = test_rows[k];
      out.test_probs.row(static_cast<Eigen::Index>(k)) = predictions.row(r);
      const int truth = data.classes[static_cast<std::size_t>(batch.nodes[static_cast<std::size_t>(r)])];
      out.test_classes.push_back(truth);
      Eigen::Index best = 0;
      predictions.row(r).maxCoeff(&best);
      out.nodes.push_back({rep, b, g.id(r), {{"correct", best == truth ? 1.0 : 0.0}}});
    }
  } else {
    const auto per_node = metrics::hist_metrics_rows(labels, predictions, test_rows);
    for (std::size_t k = 0; k < test_rows.size(); ++k) {
      out.nodes.push_back({rep, b, g.id(test_rows[k]), metrics::to_record(per_node[k])});
    }
  }
  if (!config.artifact_dir.empty()) {
    csv::Writer w(artifact_path(config, rep, b, "_predictions.csv"), [&] {
      std::vector<std::string> h{"segment_id"};
      for (Eigen::Index k = 0; k < predictions.cols(); ++k) h.push_back("b_" + std::to_string(k));
      return h;
    }());
    for (int r : test_rows) {
      std::vector<std::string> row{std::to_string(g.id(r))};
      for (Eigen::Index k = 0; k < predictions.cols(); ++k) row.push_back(csv::format_double(predictions(r, k)));
      w.row(row);
    }
  }
  return out;
}
}  // namespace

std::uint64_t repetition_seed(std::uint64_t master, int repetition) {
  return derive_seed(master, static_cast<std::uint64_t>(repetition));
}

std::uint64_t batch_seed(std::uint64_t rep_seed, int batch) {
  return derive_seed(rep_seed, {kBatchStream, static_cast<std::uint64_t>(batch)});
}

std::size_t estimate_batch_bytes(const argcn::ArgcnConfig& m, std::size_t nodes, std::size_t edges) {
  const std::size_t n = nodes;
  std::size_t doubles = 0;
  // Encoder trace: projected0, pre0, hidden, noisy (hidden wide) and projected1, pre1, z.
  doubles += n * (4 * static_cast<std::size_t>(m.encoder_hidden) + 3 * static_cast<std::size_t>(m.embedding_dim));
  // Decoder and discriminator traces keep input, pre, activation and dropout mask per layer.
  auto mlp = [&](const std::vector<int>& hidden, int in, int out, std::size_t rows) {
    std::size_t per_row = static_cast<std::size_t>(in);
    std::size_t params = 0;
    int prev = in;
    for (int h : hidden) {
      per_row += 4 * static_cast<std::size_t>(h);
      params += static_cast<std::size_t>(prev * h + h);
      prev = h;
    }
    per_row += 3 * static_cast<std::size_t>(out);
    params += static_cast<std::size_t>(prev * out + out);
    return rows * per_row + 4 * params;
  };
  doubles += mlp(m.decoder_hidden, m.embedding_dim, m.output_dim, n);
  doubles += mlp(m.discriminator_hidden, m.embedding_dim, 1, 2 * n);
  doubles += 4 * static_cast<std::size_t>(m.input_dim * m.encoder_hidden + m.encoder_hidden * m.embedding_dim);
  doubles += n * static_cast<std::size_t>(m.output_dim);  // targets
  // Sparse adjacency with self-loops in both directions, plus features at most dense.
  const std::size_t sparse = 2 * edges + n;
  return doubles * sizeof(double) + sparse * (sizeof(double) + sizeof(int)) +
         n * static_cast<std::size_t>(m.input_dim) * (sizeof(double) + sizeof(int));
}

long peak_rss_kb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

RunReport run_experiment(const datagen::LabeledDataset& data, const ExperimentConfig& config) {
  config.validate();
  const auto& g = data.graph;
  if (static_cast<int>(g.num_nodes()) < config.clusters) {
    throw ArgumentError("more clusters than nodes");
  }
  if (!config.artifact_dir.empty()) std::filesystem::create_directories(config.artifact_dir);
  RunReport report;
  report.model = to_string(config.model);
  report.config = config;
  const auto total_start = Clock::now();

  std::vector<Matrix> cls_probs;
  std::vector<std::vector<int>> cls_truth;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const auto rs = repetition_seed(config.seed, rep);
    auto start = Clock::now();
    partition::PartitionOptions popts;
    popts.imbalance = config.imbalance;
    popts.seed = derive_seed(rs, kPartitionStream);
    const auto parts = partition::partition(g, config.clusters, popts);
    const auto batches = partition::form_batches(g, parts, config.batches, derive_seed(rs, kBatchingStream));
    report.partition_seconds += seconds_since(start);

    std::vector<BatchOutcome> outcomes(batches.size());
    start = Clock::now();
    parallel_for(batches.size(), config.parallel, [&](std::size_t b) {
      outcomes[b] = run_batch(data, batches[b], config, batch_seed(rs, static_cast<int>(b)), rep, static_cast<int>(b));
    });
    report.training_seconds += seconds_since(start);

    std::vector<metrics::MetricRecord> rep_nodes;
    Matrix probs;
    std::vector<int> truth;
    for (auto& o : outcomes) {
      report.batches.push_back(o.record);
      report.peak_estimated_bytes = std::max(report.peak_estimated_bytes, o.record.estimated_bytes);
      report.warnings.insert(report.warnings.end(), o.warnings.begin(), o.warnings.end());
      for (auto& nr : o.nodes) {
        rep_nodes.push_back(nr.values);
        report.nodes.push_back(std::move(nr));
      }
      if (o.test_probs.rows() > 0) {
        Matrix merged(probs.rows() + o.test_probs.rows(), o.test_probs.cols());
        if (probs.rows() > 0) merged.topRows(probs.rows()) = probs;
        merged.bottomRows(o.test_probs.rows()) = o.test_probs;
        probs = std::move(merged);
        truth.insert(truth.end(), o.test_classes.begin(), o.test_classes.end());
      }
    }
    if (data.is_classification()) {
      if (truth.empty()) throw ConfigurationError("no test node was evaluated");
      report.repetition_means.push_back(metrics::to_record(metrics::cls_metrics(probs, truth)));
    } else {
      if (rep_nodes.empty()) throw ConfigurationError("no test node was evaluated");
      metrics::MetricRecord mean;
      for (const auto& [name, s] : metrics::aggregate(rep_nodes)) mean[name] = s.mean;
      report.repetition_means.push_back(std::move(mean));
    }
  }

  const auto by_rep = metrics::aggregate(report.repetition_means);
  if (data.is_classification()) {
    report.summary = by_rep;
  } else {
    std::vector<metrics::MetricRecord> pooled;
    pooled.reserve(report.nodes.size());
    for (const auto& nr : report.nodes) pooled.push_back(nr.values);
    report.summary = metrics::aggregate(pooled);
    for (auto& [name, s] : report.summary) s.sem = by_rep.at(name).sem;
  }
  report.total_seconds = seconds_since(total_start);
  report.peak_rss_kb = peak_rss_kb();
  return report;
}

}  // namespace speedhist::harness
