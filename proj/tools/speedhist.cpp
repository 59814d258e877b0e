#include <filesystem>
#include <iostream>
#include <regex>

#include "CLI11.hpp"

#include "speedhist/csv.hpp"
#include "speedhist/datagen.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/harness.hpp"
#include "speedhist/metrics.hpp"
#include "speedhist/n2v.hpp"
#include "speedhist/partition.hpp"
#include "speedhist/platform.hpp"

namespace fs = std::filesystem;
using namespace speedhist;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kTrainingFailure = 3 };

void print_summary(const metrics::SummaryTable& table) {
  std::cout << "metric,mean,median,sem,count\n";
  for (const auto& [name, s] : table) {
    std::cout << name << ',' << csv::format_double(s.mean) << ',' << csv::format_double(s.median) << ','
              << csv::format_double(s.sem) << ',' << s.count << '\n';
  }
}

datagen::LabeledDataset load_dataset(const std::string& data_dir, const std::string& cora_dir, std::uint64_t seed) {
  if (!cora_dir.empty()) {
    datagen::CoraSplit split;
    split.seed = seed;
    return datagen::load_cora(cora_dir, split);
  }
  if (data_dir.empty()) throw ArgumentError("either --data or --cora is required");
  return datagen::load_road_dataset(data_dir);
}

int run(int argc, char** argv) {
  CLI::App app{"Travel-speed histogram estimation on road line graphs"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic road dataset");
  std::string grid = "23x23";
  std::string gen_out;
  datagen::SynthConfig synth;
  gen->add_option("--grid", grid, "Intersections as ROWSxCOLS")->capture_default_str();
  gen->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  gen->add_option("--labeled-fraction", synth.labeled_fraction)->capture_default_str();
  gen->add_option("--min-obs", synth.min_observations)->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();

  // partition
  auto* part = app.add_subcommand("partition", "Partition the line graph into clusters");
  std::string part_data;
  std::string part_out = "assignment.csv";
  int part_clusters = 10;
  partition::PartitionOptions part_opts;
  part->add_option("--data", part_data, "Dataset directory")->required();
  part->add_option("--clusters", part_clusters)->capture_default_str();
  part->add_option("--seed", part_opts.seed)->capture_default_str();
  part->add_option("--imbalance", part_opts.imbalance)->capture_default_str();
  part->add_option("--out", part_out)->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Run partitioned training and write reports");
  std::string train_data;
  std::string train_cora;
  std::string train_out = "run";
  std::string config_file;
  std::string model_name = "full-gcn";
  harness::ExperimentConfig cfg;
  cfg.repetitions = 1;
  train->add_option("--data", train_data, "Road dataset directory");
  train->add_option("--cora", train_cora, "Directory with cora.content and cora.cites");
  train->add_option("--config", config_file, "key = value settings; flags given on the command line win");
  train->add_option("--model", model_name)->capture_default_str();
  train->add_option("--clusters", cfg.clusters)->capture_default_str();
  train->add_option("--batches", cfg.batches)->capture_default_str();
  train->add_option("--epochs", cfg.epochs)->capture_default_str();
  train->add_option("--seed", cfg.seed)->capture_default_str();
  train->add_option("--parallel", cfg.parallel)->capture_default_str();
  train->add_option("--repetitions", cfg.repetitions)->capture_default_str();
  train->add_option("--out", train_out, "Report and artifact directory")->capture_default_str();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score a predictions CSV against labels.csv");
  std::string eval_data;
  std::string eval_pred;
  std::string eval_out;
  eval->add_option("--data", eval_data, "Dataset directory")->required();
  eval->add_option("--predictions", eval_pred, "segment_id,b_0,... file")->required();
  eval->add_option("--out", eval_out, "Per-node metrics CSV");

  // embed
  auto* emb = app.add_subcommand("embed", "Export node2vec embeddings");
  std::string emb_data;
  std::string emb_out = "embedding.csv";
  std::string emb_mode = "base";
  std::uint64_t emb_seed = 0;
  n2v::EmbedConfig emb_cfg;
  emb->add_option("--data", emb_data, "Dataset directory")->required();
  emb->add_option("--mode", emb_mode, "base, feature-graph or sequence")->capture_default_str();
  emb->add_option("--seed", emb_seed)->capture_default_str();
  emb->add_option("--walk-length", emb_cfg.walks.walk_length)->capture_default_str();
  emb->add_option("--walks-per-node", emb_cfg.walks.walks_per_node)->capture_default_str();
  emb->add_option("--p", emb_cfg.walks.p)->capture_default_str();
  emb->add_option("--q", emb_cfg.walks.q)->capture_default_str();
  emb->add_option("--workers", emb_cfg.walks.workers)->capture_default_str();
  emb->add_option("--out", emb_out)->capture_default_str();

  // report
  auto* rep = app.add_subcommand("report", "Aggregate one or more nodes.csv files");
  std::vector<std::string> rep_inputs;
  std::string rep_out;
  rep->add_option("inputs", rep_inputs, "nodes.csv files")->required();
  rep->add_option("--out", rep_out, "Directory for summary.csv and summary.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (gen->parsed()) {
    std::smatch m;
    const std::regex shape(R"((\d+)x(\d+))");
    if (!std::regex_match(grid, m, shape)) throw ArgumentError("--grid must look like 30x30");
    synth.grid_rows = std::stoi(m[1]);
    synth.grid_cols = std::stoi(m[2]);
    const auto data = datagen::generate_synthetic(synth);
    datagen::write_road_dataset(gen_out, data);
    std::cout << "segments " << data.graph.num_nodes() << ", transitions " << data.graph.num_edges()
              << ", labeled " << data.labeled_count() << '\n';
  } else if (part->parsed()) {
    const auto data = datagen::load_road_dataset(part_data);
    const auto p = partition::partition(data.graph, part_clusters, part_opts);
    partition::write_assignment_csv(part_out, data.graph, p);
    std::cout << "clusters " << p.num_clusters << ", edge cut " << partition::edge_cut(data.graph, p) << '\n';
  } else if (train->parsed()) {
    harness::ExperimentConfig merged;
    if (!config_file.empty()) merged = harness::read_config_file(config_file);
    // Command-line flags override the file only when given explicitly.
    auto given = [&](const char* flag) { return train->count(flag) > 0; };
    if (given("--model") || config_file.empty()) merged.model = harness::parse_model(model_name);
    if (given("--clusters") || config_file.empty()) merged.clusters = cfg.clusters;
    if (given("--batches") || config_file.empty()) merged.batches = cfg.batches;
    if (given("--epochs") || config_file.empty()) merged.epochs = cfg.epochs;
    if (given("--seed") || config_file.empty()) merged.seed = cfg.seed;
    if (given("--parallel") || config_file.empty()) merged.parallel = cfg.parallel;
    if (given("--repetitions") || config_file.empty()) merged.repetitions = cfg.repetitions;
    if (merged.artifact_dir.empty()) merged.artifact_dir = (fs::path(train_out) / "artifacts").string();
    merged.validate();
    const auto data = load_dataset(train_data, train_cora, merged.seed);
    const auto report = harness::run_experiment(data, merged);
    harness::write_report(train_out, report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    print_summary(report.summary);
  } else if (eval->parsed()) {
    const auto data = datagen::load_road_dataset(eval_data);
    const auto preds = graph::read_labels_csv(eval_pred);
    std::vector<metrics::MetricRecord> records;
    harness::RunReport r;
    for (const auto& [id, hist] : preds) {
      const int i = data.graph.index_of(id);
      if (!data.labeled[static_cast<std::size_t>(i)]) continue;
      const auto row = data.labels.row(i);
      const auto m = metrics::hist_metrics({row.data(), static_cast<std::size_t>(row.size())}, hist);
      records.push_back(metrics::to_record(m));
      r.nodes.push_back({0, 0, id, records.back()});
    }
    if (records.empty()) throw ConfigurationError("no prediction refers to a labeled segment");
    r.summary = metrics::aggregate(records);
    if (!eval_out.empty()) {
      csv::Writer w(eval_out, {"repetition", "batch", "node_id", "bhattacharyya", "correlation", "intersection",
                               "kl_divergence"});
      for (const auto& nr : r.nodes) {
        w.row({"0", "0", std::to_string(nr.node_id), csv::format_double(nr.values.at("bhattacharyya")),
               csv::format_double(nr.values.at("correlation")), csv::format_double(nr.values.at("intersection")),
               csv::format_double(nr.values.at("kl_divergence"))});
      }
    }
    print_summary(r.summary);
  } else if (emb->parsed()) {
    const auto data = datagen::load_road_dataset(emb_data);
    const auto mode = n2v::parse_embed_mode(emb_mode);
    const Matrix e = n2v::embed_with_features(data.graph, mode, emb_cfg, emb_seed);
    n2v::write_embedding_csv(emb_out, data.graph, e);
    std::cout << "nodes " << e.rows() << ", dimensions " << e.cols() << '\n';
  } else if (rep->parsed()) {
    const auto table = harness::summarize_node_files(rep_inputs);
    if (!rep_out.empty()) {
      fs::create_directories(rep_out);
      metrics::write_summary_csv((fs::path(rep_out) / "summary.csv").string(), table);
      std::ofstream((fs::path(rep_out) / "summary.json").string()) << metrics::summary_json(table) << '\n';
    }
    print_summary(table);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  try {
    return run(argc, argv);
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const LoadError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const StructuralError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const InsufficientDataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "training failure: " << e.what() << '\n';
    return kTrainingFailure;
  }
}
