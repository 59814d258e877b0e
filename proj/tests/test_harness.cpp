#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "support.hpp"

#include "speedhist/csv.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/harness.hpp"

using namespace speedhist;
namespace fs = std::filesystem;

namespace {

const datagen::LabeledDataset& small_dataset() {
  static const auto data = [] {
    datagen::SynthConfig cfg;
    cfg.grid_rows = 8;
    cfg.grid_cols = 8;
    cfg.seed = 21;
    return datagen::generate_synthetic(cfg);
  }();
  return data;
}

harness::ExperimentConfig small_config(harness::ModelKind model) {
  harness::ExperimentConfig c;
  c.model = model;
  c.clusters = 4;
  c.batches = 2;
  c.repetitions = 2;
  c.epochs = 60;
  c.seed = 5;
  return c;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SPEEDHIST_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("harness") {
TEST_CASE("config file parsing") {
  const auto dir = testing::temp_dir("config");
  const auto path = (dir / "run.conf").string();
  std::ofstream(path) << "# experiment\nmodel = gcn-no-adv\nclusters = 20\nbatches = 5  # grouped\n"
                      << "epochs=100\nseed = 9\ndecoder_hidden = 64, 32\ngcn_lr = 0.01\n";
  const auto c = harness::read_config_file(path);
  CHECK(c.model == harness::ModelKind::kGcnNoAdv);
  CHECK(c.clusters == 20);
  CHECK(c.batches == 5);
  CHECK(c.epochs == 100);
  CHECK(c.seed == 9);
  CHECK(c.decoder_hidden == std::vector<int>{64, 32});
  CHECK(*c.gcn_learning_rate == 0.01);
  CHECK(c.repetitions == 10);

  std::ofstream(path) << "colour = blue\n";
  CHECK_THROWS_AS(harness::read_config_file(path), LoadError);
  std::ofstream(path) << "clusters = 4\nbatches = 8\n";
  CHECK_THROWS_AS(harness::read_config_file(path), ArgumentError);
  std::ofstream(path) << "clusters = many\n";
  CHECK_THROWS_AS(harness::read_config_file(path), LoadError);
  CHECK_THROWS_AS(harness::parse_model("gcn"), ArgumentError);
  CHECK(harness::parse_model("n2v-sequence") == harness::ModelKind::kN2vSequence);
}

TEST_CASE("pooled evaluation covers each test node once per repetition") {
  const auto& data = small_dataset();
  const auto r = harness::run_experiment(data, small_config(harness::ModelKind::kNaive1));
  CHECK(r.batches.size() == 4);
  for (int rep = 0; rep < 2; ++rep) {
    std::set<std::int64_t> seen;
    std::size_t expected = 0;
    for (const auto& b : r.batches) {
      if (b.repetition == rep) expected += b.test_nodes;
    }
    for (const auto& n : r.nodes) {
      if (n.repetition != rep) continue;
      CHECK(seen.insert(n.node_id).second);
      CHECK(data.labeled[static_cast<std::size_t>(data.graph.index_of(n.node_id))]);
    }
    CHECK(seen.size() == expected);
  }
  // Each batch trains on two thirds of its labeled nodes.
  for (const auto& b : r.batches) {
    const double labeled = static_cast<double>(b.train_nodes + b.test_nodes);
    CHECK(std::abs(static_cast<double>(b.train_nodes) - 2.0 * labeled / 3.0) <= 1.0);
  }
}

TEST_CASE("summary equals an independent recomputation") {
  const auto r = harness::run_experiment(small_dataset(), small_config(harness::ModelKind::kNaive2));
  for (const std::string name : {"intersection", "kl_divergence"}) {
    std::vector<double> v;
    for (const auto& n : r.nodes) v.push_back(n.values.at(name));
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    const double median = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    CHECK(r.summary.at(name).mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(r.summary.at(name).median == doctest::Approx(median).epsilon(1e-12));
    CHECK(r.summary.at(name).count == v.size());
  }
}

TEST_CASE("reruns and parallel runs are identical") {
  auto c = small_config(harness::ModelKind::kFullGcn);
  c.repetitions = 1;
  c.epochs = 30;
  const auto a = harness::run_experiment(small_dataset(), c);
  const auto b = harness::run_experiment(small_dataset(), c);
  c.parallel = 2;
  const auto p = harness::run_experiment(small_dataset(), c);
  REQUIRE(a.nodes.size() == b.nodes.size());
  REQUIRE(a.nodes.size() == p.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].node_id == b.nodes[i].node_id);
    CHECK(a.nodes[i].values == b.nodes[i].values);
    CHECK(a.nodes[i].values == p.nodes[i].values);
  }
  CHECK(metrics::summary_json(a.summary) == metrics::summary_json(p.summary));
}

TEST_CASE("batch seeds do not depend on the batch count") {
  const auto rs = harness::repetition_seed(3, 0);
  CHECK(harness::batch_seed(rs, 1) == harness::batch_seed(rs, 1));
  CHECK(harness::batch_seed(rs, 1) != harness::batch_seed(rs, 2));
  CHECK(harness::repetition_seed(3, 0) != harness::repetition_seed(3, 1));
}

TEST_CASE("sequential batch times add up to the training time") {
  auto c = small_config(harness::ModelKind::kGcnNoAdv);
  c.repetitions = 1;
  c.clusters = 4;
  c.batches = 4;
  c.epochs = 150;
  const auto r = harness::run_experiment(small_dataset(), c);
  double sum = 0.0;
  for (const auto& b : r.batches) sum += b.train_seconds;
  CHECK(std::abs(sum - r.training_seconds) <= 0.05 * r.training_seconds);
  CHECK(r.partition_seconds >= 0.0);
  CHECK(r.peak_estimated_bytes > 0);
  CHECK(r.peak_rss_kb > 0);
}

TEST_CASE("the global mean loses to the graph model") {
  auto c = small_config(harness::ModelKind::kNaive1);
  c.clusters = 1;
  c.batches = 1;
  c.repetitions = 1;
  c.epochs = 600;
  const auto naive = harness::run_experiment(small_dataset(), c);
  c.model = harness::ModelKind::kFullGcn;
  const auto gcn = harness::run_experiment(small_dataset(), c);
  CHECK(naive.summary.at("intersection").mean < gcn.summary.at("intersection").mean);
}

TEST_CASE("batches without training labels are skipped with a warning") {
  auto data = small_dataset();
  // Keep labels on the first dozen segments only.
  for (std::size_t i = 12; i < data.labeled.size(); ++i) data.labeled[i] = 0;
  harness::ExperimentConfig c = small_config(harness::ModelKind::kNaive1);
  c.clusters = 16;
  c.batches = 16;
  c.repetitions = 1;
  const auto r = harness::run_experiment(data, c);
  std::size_t skipped = 0;
  for (const auto& b : r.batches) skipped += b.skipped;
  CHECK(skipped > 0);
  CHECK(r.warnings.size() == skipped);
}

TEST_CASE("report files") {
  const auto dir = testing::temp_dir("report");
  auto c = small_config(harness::ModelKind::kNaive1);
  const auto r = harness::run_experiment(small_dataset(), c);
  harness::write_report(dir.string(), r);
  for (const char* f : {"summary.csv", "summary.json", "nodes.csv", "batches.csv"}) CHECK(fs::exists(dir / f));
  const auto merged = harness::summarize_node_files({(dir / "nodes.csv").string()});
  for (const auto& [name, s] : r.summary) {
    CHECK(merged.at(name).mean == doctest::Approx(s.mean).epsilon(1e-12));
    CHECK(merged.at(name).median == doctest::Approx(s.median).epsilon(1e-12));
  }
  CHECK(csv::read((dir / "batches.csv").string()).rows.size() == r.batches.size());
}

TEST_CASE("command line") {
  const auto dir = testing::temp_dir("cli");
  const auto data = (dir / "data").string();
  REQUIRE(cli("gen-data --grid 30x30 --seed 7 --out " + data) == 0);
  const auto assign = (dir / "assignment.csv").string();
  REQUIRE(cli("partition --data " + data + " --clusters 10 --out " + assign) == 0);
  std::set<std::string> clusters;
  const auto table = csv::read(assign);
  for (const auto& row : table.rows) clusters.insert(row[table.column("cluster")]);
  CHECK(clusters.size() == 10);

  const auto run = (dir / "run").string();
  REQUIRE(cli("train --data " + data + " --model full-gcn --clusters 100 --batches 100 --epochs 2 --out " + run) ==
          0);
  int checkpoints = 0;
  int traces = 0;
  for (const auto& e : fs::directory_iterator(fs::path(run) / "artifacts")) {
    const auto name = e.path().filename().string();
    checkpoints += name.ends_with("_model.json");
    traces += name.ends_with("_loss.csv");
  }
  CHECK(checkpoints == 100);
  CHECK(traces == 100);

  const auto merged = (dir / "merged").string();
  CHECK(cli("report " + run + "/nodes.csv --out " + merged) == 0);
  const auto summary = csv::read(merged + "/summary.csv");
  const auto expected = harness::summarize_node_files({run + "/nodes.csv"});
  CHECK(summary.rows.size() == expected.size());
  for (const auto& row : summary.rows) {
    CHECK(std::stod(row[1]) == doctest::Approx(expected.at(row[0]).mean).epsilon(1e-12));
  }

  CHECK(cli("train --data " + data + " --bogus") == 1);
  CHECK(cli("train --data " + data + " --clusters 4 --batches 3") == 1);
  CHECK(cli("train --data " + (dir / "absent").string()) == 2);
  CHECK(cli("") == 1);
}
}
