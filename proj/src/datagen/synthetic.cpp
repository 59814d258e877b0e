#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "speedhist/datagen.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/rng.hpp"

namespace speedhist::datagen {

namespace {
constexpr std::uint64_t kLayoutStream = 1;
constexpr std::uint64_t kFieldStream = 2;
constexpr std::uint64_t kSegmentStream = 3;

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Mean of N(mu, sigma^2) truncated to [lo, hi).
double truncated_mean(double mu, double sigma, double lo, double hi) {
  const double a = (lo - mu) / sigma;
  const double b = (hi - mu) / sigma;
  const double z = normal_cdf(b) - normal_cdf(a);
  if (z <= 0.0) return std::clamp(mu, lo, hi);
  return mu + sigma * (normal_pdf(a) - normal_pdf(b)) / z;
}

// Palette index range [lo, hi] of speed limits allowed for a category.
std::pair<int, int> limit_range(RoadCategory c, int m) {
  const int top = m - 1;
  switch (c) {
    case RoadCategory::kResidential:
      return {0, std::min(1, top)};
    case RoadCategory::kCollector:
      return {std::min(1, top), std::min(2, top)};
    case RoadCategory::kArterial:
      return {std::min(2, top), std::max(std::min(2, top), m - 3)};
    case RoadCategory::kHighway:
      return {std::max(0, m - 2), top};
  }
  return {0, top};
}

// Observation propensity per category, relative to the labeled fraction.
double label_weight(RoadCategory c) {
  switch (c) {
    case RoadCategory::kResidential:
      return 0.85;
    case RoadCategory::kCollector:
      return 1.0;
    case RoadCategory::kArterial:
      return 1.15;
    case RoadCategory::kHighway:
      return 1.25;
  }
  return 1.0;
}

// Min-max scaled Gaussian-smoothed white noise on the intersection grid.
std::vector<double> congestion_field(int rows, int cols, double length, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> noise(static_cast<std::size_t>(rows * cols));
  for (auto& v : noise) v = normal(rng);
  std::vector<double> field(noise.size(), 0.0);
  const int reach = static_cast<int>(std::ceil(3.0 * length));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (int dr = -reach; dr <= reach; ++dr) {
        for (int dc = -reach; dc <= reach; ++dc) {
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          const double d2 = static_cast<double>(dr * dr + dc * dc);
          acc += std::exp(-d2 / (2.0 * length * length)) * noise[static_cast<std::size_t>(rr * cols + cc)];
        }
      }
      field[static_cast<std::size_t>(r * cols + c)] = acc;
    }
  }
  const auto [lo, hi] = std::minmax_element(field.begin(), field.end());
  const double span = *hi - *lo;
  const double base = *lo;
  for (auto& v : field) v = span > 0.0 ? (v - base) / span : 0.5;
  return field;
}
}  // namespace

void SynthConfig::validate() const {
  if (grid_rows < 2 || grid_cols < 2) throw ArgumentError("grid must have at least 2x2 intersections");
  if (speed_limits_kmh.empty()) throw ArgumentError("speed-limit palette is empty");
  for (double v : speed_limits_kmh) {
    if (!(v > 0.0) || std::floor(v) != v) throw ArgumentError("speed limits must be positive integers");
  }
  auto fraction = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!fraction(arterial_fraction) || !fraction(labeled_fraction)) throw ArgumentError("fractions must lie in [0,1]");
  if (min_observations < 1 || max_observations < min_observations) {
    throw ArgumentError("need 1 <= min_observations <= max_observations");
  }
  if (!(congestion_length > 0.0)) throw ArgumentError("congestion length must be positive");
  if (!(congestion_min > 0.0) || congestion_max < congestion_min) throw ArgumentError("bad congestion range");
  if (buckets < 1 || !(bucket_width > 0.0)) throw ArgumentError("bad histogram shape");
  if (highway_every < 1) throw ArgumentError("highway_every must be positive");
}

std::size_t LabeledDataset::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(labeled.begin(), labeled.end(), [](char c) { return c != 0; }));
}

LabeledDataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  const int rows = config.grid_rows;
  const int cols = config.grid_cols;
  std::vector<double> palette = config.speed_limits_kmh;
  std::sort(palette.begin(), palette.end());
  palette.erase(std::unique(palette.begin(), palette.end()), palette.end());
  const int m = static_cast<int>(palette.size());

  // Line categories and per-line base limits: horizontal lines first, then vertical.
  Rng layout(derive_seed(config.seed, kLayoutStream));
  std::uniform_real_distribution<double> unit;
  struct Line {
    RoadCategory category;
    int limit_index;
  };
  std::vector<Line> lines;
  for (int count : {rows, cols}) {
    for (int l = 0; l < count; ++l) {
      RoadCategory cat = RoadCategory::kResidential;
      if (l % config.highway_every == config.highway_every / 2) {
        cat = RoadCategory::kHighway;
      } else {
        const double u = unit(layout);
        if (u < config.arterial_fraction) {
          cat = RoadCategory::kArterial;
        } else if (u < 2.0 * config.arterial_fraction) {
          cat = RoadCategory::kCollector;
        }
      }
      const auto [lo, hi] = limit_range(cat, m);
      lines.push_back({cat, std::uniform_int_distribution<int>(lo, hi)(layout)});
    }
  }

  Rng field_rng(derive_seed(config.seed, kFieldStream));
  const auto field = congestion_field(rows, cols, config.congestion_length, field_rng);
  auto node_id = [&](int r, int c) { return static_cast<std::int64_t>(r * cols + c + 1); };

  LabeledDataset data;
  auto& net = data.network;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) net.intersections.push_back(node_id(r, c));
  }
  net.schema = {{"speed_limit", graph::FeatureKind::kCategorical},
                {"category", graph::FeatureKind::kCategorical},
                {"length", graph::FeatureKind::kContinuous},
                {"congestion_proxy", graph::FeatureKind::kContinuous}};

  Rng seg_rng(derive_seed(config.seed, kSegmentStream));
  std::normal_distribution<double> normal;
  const double support = config.buckets * config.bucket_width;
  double mean_weight = 0.0;
  for (const auto& l : lines) mean_weight += label_weight(l.category);
  mean_weight /= static_cast<double>(lines.size());

  std::int64_t next_id = 1;
  auto add_pair = [&](int r0, int c0, int r1, int c1, const Line& line) {
    const double factor_u = 0.5 * (field[static_cast<std::size_t>(r0 * cols + c0)] +
                                   field[static_cast<std::size_t>(r1 * cols + c1)]);
    const std::int64_t a = node_id(r0, c0);
    const std::int64_t b = node_id(r1, c1);
    const std::int64_t forward = next_id;
    for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
      graph::Segment s;
      s.id = next_id++;
      s.from = from;
      s.to = to;
      s.directed = true;
      const auto [lo, hi] = limit_range(line.category, m);
      int li = line.limit_index;
      if (unit(seg_rng) < 0.1) li = std::uniform_int_distribution<int>(lo, hi)(seg_rng);
      const double limit = palette[static_cast<std::size_t>(li)];
      const double length = 100.0 + 400.0 * unit(seg_rng);
      const double factor = config.congestion_min + (config.congestion_max - config.congestion_min) * factor_u;
      const double proxy = factor + config.proxy_noise * normal(seg_rng);
      s.features = {limit, static_cast<double>(line.category), length, proxy};

      const double mu = limit / 3.6 * factor * (0.9 + 0.1 * (length - 100.0) / 400.0);
      const double sigma = config.speed_spread * mu + 1.0;
      data.true_mean_mps.push_back(truncated_mean(mu, sigma, 0.0, support));

      const double p = std::min(1.0, config.labeled_fraction * label_weight(line.category) / mean_weight);
      const bool observed = config.labeled_fraction > 0.0 && unit(seg_rng) < p;
      const int count = observed ? std::uniform_int_distribution<int>(config.min_observations,
                                                                      config.max_observations)(seg_rng)
                                 : std::uniform_int_distribution<int>(0, config.min_observations - 1)(seg_rng);
      std::vector<double> speeds;
      speeds.reserve(static_cast<std::size_t>(count));
      while (static_cast<int>(speeds.size()) < count) {
        const double v = mu + sigma * normal(seg_rng);
        if (v >= 0.0 && v < support) speeds.push_back(v);
      }
      if (!speeds.empty()) data.observations[s.id] = std::move(speeds);
      net.segments.push_back(std::move(s));
    }
    // No U-turns onto the opposite carriageway.
    net.banned_turns.emplace_back(forward, forward + 1);
    net.banned_turns.emplace_back(forward + 1, forward);
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c + 1 < cols; ++c) add_pair(r, c, r, c + 1, lines[static_cast<std::size_t>(r)]);
  }
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r + 1 < rows; ++r) add_pair(r, c, r + 1, c, lines[static_cast<std::size_t>(rows + c)]);
  }

  data.graph = graph::build_line_graph(net);
  const auto n = static_cast<Eigen::Index>(data.graph.num_nodes());
  data.labels = Matrix::Zero(n, config.buckets);
  data.labeled.assign(static_cast<std::size_t>(n), 0);
  const auto table =
      labels_from_observations(data.observations, config.min_observations, config.buckets, config.bucket_width);
  for (const auto& [id, hist] : table) {
    const int i = data.graph.index_of(id);
    data.labeled[static_cast<std::size_t>(i)] = 1;
    for (int k = 0; k < config.buckets; ++k) data.labels(i, k) = hist[static_cast<std::size_t>(k)];
  }
  return data;
}

graph::LabelTable labels_from_observations(const graph::Observations& obs, int min_observations, int k,
                                           double width) {
  graph::LabelTable table;
  for (const auto& [id, speeds] : obs) {
    if (static_cast<int>(speeds.size()) < min_observations) continue;
    try {
      auto h = graph::bucketize(speeds, k, width);
      if (static_cast<int>(h.retained) >= min_observations) table[id] = std::move(h.buckets);
    } catch (const InsufficientDataError&) {
    }
  }
  return table;
}

void write_road_dataset(const std::string& dir, const LabeledDataset& data) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  graph::write_segments_csv((fs::path(dir) / "segments.csv").string(), data.network);
  graph::write_banned_turns_csv((fs::path(dir) / "turns.csv").string(), data.network.banned_turns);
  graph::write_observations_csv((fs::path(dir) / "observations.csv").string(), data.observations);
  graph::LabelTable labels;
  for (std::size_t i = 0; i < data.graph.num_nodes(); ++i) {
    if (!data.labeled[i]) continue;
    const auto row = data.labels.row(static_cast<Eigen::Index>(i));
    labels[data.graph.id(static_cast<int>(i))] = std::vector<double>(row.data(), row.data() + row.size());
  }
  graph::write_labels_csv((fs::path(dir) / "labels.csv").string(), labels);
}

LabeledDataset load_road_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  LabeledDataset data;
  data.network = graph::read_segments_csv(path("segments.csv"));
  if (fs::exists(path("turns.csv"))) data.network.banned_turns = graph::read_banned_turns_csv(path("turns.csv"));
  try {
    data.network.validate();
  } catch (const StructuralError& e) {
    throw LoadError(path("turns.csv"), e.what());
  }
  data.graph = graph::build_line_graph(data.network);
  if (fs::exists(path("observations.csv"))) data.observations = graph::read_observations_csv(path("observations.csv"));
  const auto labels = graph::read_labels_csv(path("labels.csv"));
  const auto n = static_cast<Eigen::Index>(data.graph.num_nodes());
  const Eigen::Index k =
      labels.empty() ? graph::kDefaultBuckets : static_cast<Eigen::Index>(labels.begin()->second.size());
  data.labels = Matrix::Zero(n, k);
  data.labeled.assign(static_cast<std::size_t>(n), 0);
  for (const auto& [id, hist] : labels) {
    if (!data.graph.contains(id)) throw LoadError(path("labels.csv"), "unknown segment " + std::to_string(id));
    if (static_cast<Eigen::Index>(hist.size()) != k) throw LoadError(path("labels.csv"), "ragged histogram rows");
    const int i = data.graph.index_of(id);
    data.labeled[static_cast<std::size_t>(i)] = 1;
    for (Eigen::Index b = 0; b < k; ++b) data.labels(i, b) = hist[static_cast<std::size_t>(b)];
  }
  return data;
}

}  // namespace speedhist::datagen
