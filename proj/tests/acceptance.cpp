// Acceptance run: one PASS/FAIL line per criterion; exits 1 if any fails.
// Cora checks read the dataset from SPEEDHIST_CORA_DIR.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "gradcheck.hpp"
#include "metric_oracle.hpp"
#include "support.hpp"

#include "speedhist/argcn.hpp"
#include "speedhist/datagen.hpp"
#include "speedhist/harness.hpp"
#include "speedhist/metrics.hpp"
#include "speedhist/partition.hpp"
#include "speedhist/platform.hpp"

using namespace speedhist;
using harness::ModelKind;

namespace {

// Tolerances.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 10.0;
constexpr double kCoraAccuracy = 0.65;
constexpr double kCoraRunSeconds = 15.0 * 60.0;
constexpr double kCoraGap = 0.05;
constexpr double kNaiveMargin = 0.2;
constexpr double kMetricTolerance = 1e-12;

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  const auto start = Clock::now();
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  failures += o.pass ? 0 : 1;
  std::printf("criterion %d %s: %s | %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str(),
              seconds_since(start));
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// --- 1 ------------------------------------------------------------------------

Outcome gradients() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  int checked = 0;
  for (auto mode : {argcn::TaskMode::kRegression, argcn::TaskMode::kClassification}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      for (const auto& c : testing::argcn_gradient_check(mode, seed)) {
        ++checked;
        if (c.relative_error > worst) {
          worst = c.relative_error;
          worst_name = c.name;
        }
      }
    }
  }
  const double t = seconds_since(start);
  return {worst < kGradTolerance && t < kGradSeconds,
          std::to_string(checked) + " tensors, worst " + fmt(worst) + " (" + worst_name + "), " + fmt(t) + " s"};
}

// --- 2, 3 ---------------------------------------------------------------------

const char* cora_dir() { return std::getenv("SPEEDHIST_CORA_DIR"); }

harness::RunReport cora_run(const datagen::LabeledDataset& data, int batches) {
  harness::ExperimentConfig c;
  c.model = ModelKind::kGcnNoAdv;
  c.clusters = batches;
  c.batches = batches;
  c.repetitions = 10;
  c.epochs = 2000;
  c.seed = 1;
  return harness::run_experiment(data, c);
}

std::optional<harness::RunReport> cora_full;

Outcome cora_accuracy() {
  if (!cora_dir()) return {false, "SPEEDHIST_CORA_DIR not set; Cora is not available"};
  const auto data = datagen::load_cora(cora_dir());
  cora_full = cora_run(data, 1);
  const double acc = cora_full->summary.at("accuracy").mean;
  const double per_run = cora_full->total_seconds / 10.0;
  return {acc >= kCoraAccuracy && per_run < kCoraRunSeconds,
          "mean accuracy " + fmt(acc) + " over 10 seeds, " + fmt(per_run) + " s per run"};
}

Outcome cora_partitions() {
  if (!cora_dir()) return {false, "SPEEDHIST_CORA_DIR not set; Cora is not available"};
  const auto data = datagen::load_cora(cora_dir());
  const double a1 = cora_full ? cora_full->summary.at("accuracy").mean : cora_run(data, 1).summary.at("accuracy").mean;
  const double a5 = cora_run(data, 5).summary.at("accuracy").mean;
  const double a20 = cora_run(data, 20).summary.at("accuracy").mean;
  return {a1 - a5 > kCoraGap && a5 - a20 > kCoraGap,
          "accuracy 1 batch " + fmt(a1) + ", 5 batches " + fmt(a5) + ", 20 batches " + fmt(a20)};
}

// --- 4 ------------------------------------------------------------------------

struct SyntheticResults {
  datagen::LabeledDataset data;
  std::map<std::string, harness::RunReport> runs;

  const harness::RunReport& get(ModelKind model, int batches) {
    const std::string key = harness::to_string(model) + "/" + std::to_string(batches);
    auto it = runs.find(key);
    if (it != runs.end()) return it->second;
    harness::ExperimentConfig c;
    c.model = model;
    c.clusters = batches;
    c.batches = batches;
    c.repetitions = 1;
    c.epochs = 2000;
    c.seed = 1;
    return runs.emplace(key, harness::run_experiment(data, c)).first->second;
  }
  double intersection(ModelKind model, int batches) { return get(model, batches).summary.at("intersection").mean; }
  double seconds_per_batch(ModelKind model, int batches) {
    const auto& r = get(model, batches);
    double sum = 0.0;
    int n = 0;
    for (const auto& b : r.batches) {
      if (b.skipped) continue;
      sum += b.train_seconds;
      ++n;
    }
    return sum / n;
  }
};

SyntheticResults& synthetic() {
  static SyntheticResults r = [] {
    datagen::SynthConfig cfg;
    cfg.seed = 1;
    return SyntheticResults{datagen::generate_synthetic(cfg), {}};
  }();
  return r;
}

Outcome synthetic_ordering() {
  auto& s = synthetic();
  const double gcn = s.intersection(ModelKind::kFullGcn, 1);
  const double naive = s.intersection(ModelKind::kNaive1, 1);
  const double base = s.intersection(ModelKind::kN2vBase, 1);
  const double fg = s.intersection(ModelKind::kN2vFeatureGraph, 1);
  const double seq = s.intersection(ModelKind::kN2vSequence, 1);
  const bool a = gcn - naive >= kNaiveMargin && gcn > base;
  const bool b = seq > fg && fg > base;
  std::string detail = std::to_string(s.data.graph.num_nodes()) + " segments; (a) " + (a ? "ok" : "violated") +
                       ": full-gcn " + fmt(gcn) + ", naive-1 " + fmt(naive) + ", n2v-base " + fmt(base) + "; (b) " +
                       (b ? "ok" : "violated") + ": sequence " + fmt(seq) + ", feature-graph " + fmt(fg) +
                       ", base " + fmt(base);
  return {a && b, detail};
}

Outcome batch_trend() {
  auto& s = synthetic();
  const double i10 = s.intersection(ModelKind::kFullGcn, 10);
  const double i100 = s.intersection(ModelKind::kFullGcn, 100);
  const double t1 = s.seconds_per_batch(ModelKind::kFullGcn, 1);
  const double t10 = s.seconds_per_batch(ModelKind::kFullGcn, 10);
  const double t100 = s.seconds_per_batch(ModelKind::kFullGcn, 100);
  const bool quality = i100 >= i10;
  const bool time = t1 > t10 && t10 > t100;
  return {quality && time, std::string("(c) intersection ") + (quality ? "ok" : "violated") + ": 10 batches " +
                               fmt(i10) + ", 100 batches " + fmt(i100) + "; time per batch " +
                               (time ? "ok" : "violated") + ": " + fmt(t1) + " s > " + fmt(t10) + " s > " + fmt(t100) +
                               " s"};
}

// --- 5 ------------------------------------------------------------------------

Outcome metric_oracle() {
  Rng rng(2024);
  const Matrix s = testing::random_histograms(1000, 22, rng, 0.3);
  const Matrix t = testing::random_histograms(1000, 22, rng, 0.3);
  double worst = 0.0;
  int bound_violations = 0;
  for (Eigen::Index r = 0; r < 1000; ++r) {
    const std::vector<double> a(s.row(r).data(), s.row(r).data() + 22);
    const std::vector<double> b(t.row(r).data(), t.row(r).data() + 22);
    const auto got = metrics::hist_metrics(a, b);
    const auto want = testing::oracle_metrics(a, b);
    worst = std::max({worst, std::abs(got.intersection - static_cast<double>(want.intersection)),
                      std::abs(got.correlation - static_cast<double>(want.correlation)),
                      std::abs(got.bhattacharyya - static_cast<double>(want.bhattacharyya)),
                      std::abs(got.kl_divergence - static_cast<double>(want.kl))});
    const auto self = metrics::hist_metrics(a, a);
    bound_violations += got.intersection < 0.0 || got.intersection > 1.0 + 1e-12;
    bound_violations += got.correlation < -1.0 || got.correlation > 1.0;
    bound_violations += got.bhattacharyya < 0.0 || got.bhattacharyya > 1.0;
    bound_violations += got.kl_divergence < 0.0;
    bound_violations += std::abs(self.intersection - 1.0) > 1e-12 || self.bhattacharyya != 0.0 ||
                        self.kl_divergence != 0.0 || std::abs(self.correlation - 1.0) > 1e-12;
  }
  return {worst < kMetricTolerance && bound_violations == 0,
          "1000 pairs, worst deviation " + fmt(worst) + ", bound violations " + std::to_string(bound_violations)};
}

// --- 6 ------------------------------------------------------------------------

Outcome partitioner() {
  std::vector<std::pair<int, int>> edges;
  for (int base : {0, 10}) {
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) {
        if (i != j) edges.emplace_back(base + i, base + j);
      }
    }
  }
  edges.emplace_back(9, 10);
  const auto cliques = testing::make_graph(20, edges);
  const long clique_cut = partition::edge_cut(cliques, partition::partition(cliques, 2, {}));

  int monotone_violations = 0;
  int balance_violations = 0;
  int reconstruct_failures = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed + 100);
    const int n = std::uniform_int_distribution<int>(30, 500)(rng);
    const int s = std::uniform_int_distribution<int>(2, 12)(rng);
    const auto g = testing::random_graph(n, 4.0, seed);
    const auto p = partition::partition(g, s, {0.03, seed});
    for (const auto& rec : p.refinement_trace) monotone_violations += rec.cut_after > rec.cut_before;
    const int cap = partition::max_cluster_size(n, s, 0.03);
    for (const auto& c : p.clusters) balance_violations += c.empty() || static_cast<int>(c.size()) > cap;
    const auto one = partition::form_batches(g, p, 1, seed);
    const SparseMatrix diff = one.front().graph.adjacency() - g.adjacency();
    reconstruct_failures += one.size() != 1 || diff.norm() != 0.0;
  }
  return {clique_cut == 1 && monotone_violations == 0 && balance_violations == 0 && reconstruct_failures == 0,
          "two-clique cut " + std::to_string(clique_cut) + "; over 20 random graphs: cut increases " +
              std::to_string(monotone_violations) + ", balance violations " + std::to_string(balance_violations) +
              ", batches=1 mismatches " + std::to_string(reconstruct_failures)};
}

// --- 7 ------------------------------------------------------------------------

bool same_report(const harness::RunReport& a, const harness::RunReport& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    if (a.nodes[i].node_id != b.nodes[i].node_id || a.nodes[i].values != b.nodes[i].values) return false;
  }
  return a.repetition_means == b.repetition_means && metrics::summary_json(a.summary) == metrics::summary_json(b.summary);
}

Outcome determinism() {
  datagen::SynthConfig sc;
  sc.grid_rows = 10;
  sc.grid_cols = 10;
  sc.seed = 3;
  const auto data = datagen::generate_synthetic(sc);
  int mismatches = 0;
  int runs = 0;
  for (auto model : {ModelKind::kFullGcn, ModelKind::kN2vSequence, ModelKind::kNaive2}) {
    harness::ExperimentConfig c;
    c.model = model;
    c.clusters = 4;
    c.batches = 2;
    c.repetitions = 2;
    c.epochs = 200;
    c.seed = 11;
    c.embed.walks.walks_per_node = 4;
    c.embed.walks.walk_length = 20;
    c.head.epochs = 200;
    const auto first = harness::run_experiment(data, c);
    const auto again = harness::run_experiment(data, c);
    c.parallel = 2;
    const auto parallel = harness::run_experiment(data, c);
    mismatches += !same_report(first, again);
    mismatches += !same_report(first, parallel);
    runs += 2;
  }
  return {mismatches == 0, std::to_string(runs) + " report comparisons (rerun and 2-way parallel), " +
                               std::to_string(mismatches) + " differ"};
}

// --- 8 ------------------------------------------------------------------------

std::vector<Matrix> snapshot(const std::vector<nn::Parameter*>& ps) {
  std::vector<Matrix> out;
  for (const auto* p : ps) out.push_back(p->value);
  return out;
}

Outcome phase_isolation() {
  datagen::SynthConfig sc;
  sc.grid_rows = 4;
  sc.grid_cols = 4;
  sc.seed = 2;
  const auto data = datagen::generate_synthetic(sc);
  const auto td = argcn::TrainingData::from_graph(data.graph, data.labels, data.labeled);
  const auto cfg = argcn::ArgcnConfig::road(static_cast<int>(td.features.cols()));

  // Weight traces of the adversarial model.
  argcn::ArgcnModel m(cfg, 5);
  auto enc = snapshot(m.encoder_parameters());
  auto dec = snapshot(m.decoder_parameters());
  auto dis = snapshot(m.discriminator_parameters());
  int violations = 0;
  int phases = 0;
  auto observer = [&](int phase, const argcn::ArgcnModel& model) {
    auto& mm = const_cast<argcn::ArgcnModel&>(model);
    const auto e = snapshot(mm.encoder_parameters());
    const auto d = snapshot(mm.decoder_parameters());
    const auto s = snapshot(mm.discriminator_parameters());
    if (phase == 2) violations += e != enc || d != dec || s == dis;
    if (phase == 3) violations += e == enc || d != dec || s != dis;
    if (phase == 1) violations += s != dis;
    enc = e;
    dec = d;
    dis = s;
    ++phases;
  };
  for (std::uint64_t step = 0; step < 50; ++step) argcn::optimization_step(m, td, step, observer);

  // Without adversarial phases, train() against a plain phase-1 loop.
  auto plain = cfg;
  plain.adversarial = false;
  const int epochs = 300;
  const std::uint64_t seed = 17;
  const auto trained = argcn::train(td, {plain, epochs, seed});
  argcn::ArgcnModel ref(plain, derive_seed(seed, argcn::kInitStream));
  nn::AdamState adam;
  adam.learning_rate = plain.gcn_learning_rate;
  for (int e = 0; e < epochs; ++e) {
    argcn::supervised_pass(ref, td, derive_seed(seed, {argcn::kStepStream, static_cast<std::uint64_t>(e)}));
    auto params = ref.encoder_parameters();
    const auto d = ref.decoder_parameters();
    params.insert(params.end(), d.begin(), d.end());
    nn::adam_step(adam, params);
  }
  const auto a = trained.model.tensors();
  const auto b = ref.tensors();
  bool identical = a.size() == b.size();
  for (std::size_t i = 0; identical && i < a.size(); ++i) identical = a[i].value == b[i].value;
  return {violations == 0 && phases == 150 && identical,
          std::to_string(phases) + " phase observations, " + std::to_string(violations) +
              " touched a foreign group; phase-1-only run " + (identical ? "bit-identical" : "differs")};
}

}  // namespace

int main() {
  tune_allocator();
  report(1, "gradients match finite differences", gradients);
  report(2, "Cora accuracy without adversarial phases", cora_accuracy);
  report(3, "Cora accuracy drops with more batches", cora_partitions);
  report(4, "synthetic road data: model orderings and batch trend", [] {
    const auto ordering = synthetic_ordering();
    const auto trend = batch_trend();
    return Outcome{ordering.pass && trend.pass, ordering.detail + "; " + trend.detail};
  });
  report(5, "histogram metrics match the oracle", metric_oracle);
  report(6, "partitioner", partitioner);
  report(7, "determinism", determinism);
  report(8, "adversarial phase isolation", phase_isolation);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
