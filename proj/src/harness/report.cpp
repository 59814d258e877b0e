#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "speedhist/csv.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/harness.hpp"

namespace speedhist::harness {

namespace {
constexpr std::size_t kNodeKeyColumns = 3;  // repetition,batch,node_id
}

std::string report_json(const RunReport& r) {
  using nlohmann::json;
  json j;
  j["model"] = r.model;
  j["config"] = {{"clusters", r.config.clusters},   {"batches", r.config.batches},
                 {"repetitions", r.config.repetitions}, {"epochs", r.config.epochs},
                 {"seed", r.config.seed},           {"parallel", r.config.parallel}};
  j["summary"] = json::parse(metrics::summary_json(r.summary));
  j["repetitions"] = json::array();
  for (const auto& rec : r.repetition_means) j["repetitions"].push_back(rec);
  j["timing"] = {{"partition_seconds", r.partition_seconds},
                 {"training_seconds", r.training_seconds},
                 {"total_seconds", r.total_seconds}};
  double batch_sum = 0.0;
  std::size_t trained = 0;
  for (const auto& b : r.batches) {
    if (b.skipped) continue;
    batch_sum += b.train_seconds;
    ++trained;
  }
  j["timing"]["mean_batch_seconds"] = trained > 0 ? batch_sum / static_cast<double>(trained) : 0.0;
  j["memory"] = {{"peak_estimated_batch_bytes", r.peak_estimated_bytes}, {"peak_rss_kb", r.peak_rss_kb}};
  j["warnings"] = r.warnings;
  return j.dump(2);
}

void write_report(const std::string& dir, const RunReport& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  metrics::write_summary_csv(path("summary.csv"), r.summary);
  {
    std::ofstream out(path("summary.json"));
    if (!out) throw LoadError(path("summary.json"), "cannot open file for writing");
    out << report_json(r) << '\n';
  }
  {
    std::vector<std::string> header{"repetition", "batch", "node_id"};
    if (!r.nodes.empty()) {
      for (const auto& [name, unused] : r.nodes.front().values) header.push_back(name);
    }
    csv::Writer w(path("nodes.csv"), header);
    for (const auto& nr : r.nodes) {
      std::vector<std::string> row{std::to_string(nr.repetition), std::to_string(nr.batch), std::to_string(nr.node_id)};
      for (const auto& [name, v] : nr.values) row.push_back(csv::format_double(v));
      w.row(row);
    }
  }
  csv::Writer w(path("batches.csv"),
                {"repetition", "batch", "nodes", "train_nodes", "test_nodes", "train_seconds", "estimated_bytes",
                 "skipped"});
  for (const auto& b : r.batches) {
    w.row({std::to_string(b.repetition), std::to_string(b.batch), std::to_string(b.nodes),
           std::to_string(b.train_nodes), std::to_string(b.test_nodes), csv::format_double(b.train_seconds),
           std::to_string(b.estimated_bytes), b.skipped ? "1" : "0"});
  }
}

metrics::SummaryTable summarize_node_files(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ArgumentError("no node metric files given");
  std::vector<metrics::MetricRecord> records;
  std::vector<std::string> names;
  for (const auto& p : paths) {
    const auto table = csv::read(p);
    if (table.header.size() <= kNodeKeyColumns) throw LoadError(p, "no metric columns");
    std::vector<std::string> these(table.header.begin() + kNodeKeyColumns, table.header.end());
    if (names.empty()) {
      names = these;
    } else if (names != these) {
      throw LoadError(p, "metric columns differ from the first file");
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      metrics::MetricRecord rec;
      for (std::size_t c = 0; c < names.size(); ++c) {
        rec[names[c]] = csv::parse_double(table.rows[r][kNodeKeyColumns + c], p, r + 2);
      }
      records.push_back(std::move(rec));
    }
  }
  if (records.empty()) throw ArgumentError("node metric files contain no rows");
  return metrics::aggregate(records);
}

}  // namespace speedhist::harness
