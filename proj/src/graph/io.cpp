#include <set>
#include <string>

#include "speedhist/csv.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/graph.hpp"

namespace speedhist::graph {

namespace {
constexpr std::size_t kFixedSegmentColumns = 4;  // segment_id,from,to,directed

FeatureColumn parse_feature_header(const std::string& field, const std::string& path) {
  auto colon = field.rfind(':');
  if (colon == std::string::npos) throw LoadError(path, "feature column '" + field + "' lacks a :cat or :num suffix");
  auto kind = field.substr(colon + 1);
  FeatureColumn col{field.substr(0, colon), FeatureKind::kContinuous};
  if (kind == "cat") {
    col.kind = FeatureKind::kCategorical;
  } else if (kind != "num") {
    throw LoadError(path, "feature column '" + field + "' has unknown kind '" + kind + "'");
  }
  return col;
}
}  // namespace

RoadNetwork read_segments_csv(const std::string& path) {
  auto table = csv::read(path);
  const std::vector<std::string> fixed{"segment_id", "from", "to", "directed"};
  if (table.header.size() < kFixedSegmentColumns) throw LoadError(path, "too few columns");
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (table.header[i] != fixed[i]) throw LoadError(path, "column " + std::to_string(i) + " must be " + fixed[i]);
  }
  RoadNetwork net;
  for (std::size_t c = kFixedSegmentColumns; c < table.header.size(); ++c) {
    net.schema.push_back(parse_feature_header(table.header[c], path));
  }
  std::set<std::int64_t> intersections;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 2;
    Segment s;
    s.id = csv::parse_int(row[0], path, line);
    s.from = csv::parse_int(row[1], path, line);
    s.to = csv::parse_int(row[2], path, line);
    s.directed = csv::parse_int(row[3], path, line) != 0;
    for (std::size_t c = kFixedSegmentColumns; c < row.size(); ++c) {
      s.features.push_back(csv::parse_double(row[c], path, line));
    }
    intersections.insert(s.from);
    intersections.insert(s.to);
    net.segments.push_back(std::move(s));
  }
  net.intersections.assign(intersections.begin(), intersections.end());
  try {
    net.validate();
  } catch (const StructuralError& e) {
    throw LoadError(path, e.what());
  }
  return net;
}

void write_segments_csv(const std::string& path, const RoadNetwork& network) {
  std::vector<std::string> header{"segment_id", "from", "to", "directed"};
  for (const auto& c : network.schema) {
    header.push_back(c.name + (c.kind == FeatureKind::kCategorical ? ":cat" : ":num"));
  }
  csv::Writer w(path, header);
  for (const auto& s : network.segments) {
    std::vector<std::string> row{std::to_string(s.id), std::to_string(s.from), std::to_string(s.to),
                                 s.directed ? "1" : "0"};
    for (double v : s.features) row.push_back(csv::format_double(v));
    w.row(row);
  }
}

BannedTurns read_banned_turns_csv(const std::string& path) {
  auto table = csv::read(path);
  const auto from_col = table.column("from_segment");
  const auto to_col = table.column("to_segment");
  BannedTurns turns;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    turns.emplace_back(csv::parse_int(table.rows[r][from_col], path, r + 2),
                       csv::parse_int(table.rows[r][to_col], path, r + 2));
  }
  return turns;
}

void write_banned_turns_csv(const std::string& path, const BannedTurns& turns) {
  csv::Writer w(path, {"from_segment", "to_segment"});
  for (const auto& [a, b] : turns) w.row({std::to_string(a), std::to_string(b)});
}

Observations read_observations_csv(const std::string& path) {
  auto table = csv::read(path);
  const auto id_col = table.column("segment_id");
  const auto speed_col = table.column("speed_mps");
  Observations obs;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    obs[csv::parse_int(row[id_col], path, r + 2)].push_back(csv::parse_double(row[speed_col], path, r + 2));
  }
  return obs;
}

void write_observations_csv(const std::string& path, const Observations& observations) {
  csv::Writer w(path, {"segment_id", "speed_mps"});
  for (const auto& [id, speeds] : observations) {
    for (double s : speeds) w.row({std::to_string(id), csv::format_double(s)});
  }
}

LabelTable read_labels_csv(const std::string& path) {
  auto table = csv::read(path);
  if (table.header.empty() || table.header[0] != "segment_id") throw LoadError(path, "first column must be segment_id");
  LabelTable labels;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::vector<double> h;
    for (std::size_t c = 1; c < row.size(); ++c) h.push_back(csv::parse_double(row[c], path, r + 2));
    labels[csv::parse_int(row[0], path, r + 2)] = std::move(h);
  }
  return labels;
}

void write_labels_csv(const std::string& path, const LabelTable& labels) {
  std::size_t k = labels.empty() ? static_cast<std::size_t>(kDefaultBuckets) : labels.begin()->second.size();
  std::vector<std::string> header{"segment_id"};
  for (std::size_t i = 0; i < k; ++i) header.push_back("b_" + std::to_string(i));
  csv::Writer w(path, header);
  for (const auto& [id, h] : labels) {
    std::vector<std::string> row{std::to_string(id)};
    for (double v : h) row.push_back(csv::format_double(v));
    w.row(row);
  }
}

}  // namespace speedhist::graph
