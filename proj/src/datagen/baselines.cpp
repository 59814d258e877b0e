#include <algorithm>
#include <numeric>

#include "speedhist/datagen.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/rng.hpp"

namespace speedhist::datagen {

namespace {
std::vector<double> normalized_mean(const Matrix& labels, const std::vector<int>& rows) {
  std::vector<double> h(static_cast<std::size_t>(labels.cols()), 0.0);
  for (int r : rows) {
    for (Eigen::Index k = 0; k < labels.cols(); ++k) h[static_cast<std::size_t>(k)] += labels(r, k);
  }
  const double total = std::accumulate(h.begin(), h.end(), 0.0);
  if (total > 0.0) {
    for (auto& v : h) v /= total;
  }
  return h;
}

std::vector<int> training_rows(const Matrix& labels, const std::vector<char>& train_mask) {
  if (train_mask.size() != static_cast<std::size_t>(labels.rows())) {
    throw ArgumentError("train mask does not match the label rows");
  }
  std::vector<int> rows;
  for (std::size_t i = 0; i < train_mask.size(); ++i) {
    if (train_mask[i]) rows.push_back(static_cast<int>(i));
  }
  if (rows.empty()) throw ConfigurationError("naive baseline: no training histogram");
  return rows;
}
}  // namespace

std::vector<double> naive_baseline_1(const Matrix& labels, const std::vector<char>& train_mask) {
  return normalized_mean(labels, training_rows(labels, train_mask));
}

const std::vector<double>& LimitBaseline::predict(double limit) const {
  auto it = by_limit.find(limit);
  return it == by_limit.end() ? fallback : it->second;
}

LimitBaseline naive_baseline_2(const Matrix& labels, const std::vector<char>& train_mask,
                               const std::vector<double>& limits) {
  const auto rows = training_rows(labels, train_mask);
  if (limits.size() != train_mask.size()) throw ArgumentError("one speed limit per row required");
  LimitBaseline b;
  b.fallback = normalized_mean(labels, rows);
  std::map<double, std::vector<int>> groups;
  for (int r : rows) groups[limits[static_cast<std::size_t>(r)]].push_back(r);
  for (const auto& [limit, members] : groups) b.by_limit[limit] = normalized_mean(labels, members);
  return b;
}

std::vector<double> speed_limits(const graph::LineGraph& g) {
  const int col = g.raw_column("speed_limit");
  if (col < 0) throw ArgumentError("graph has no speed_limit column");
  std::vector<double> out(g.num_nodes());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g.raw_features()(static_cast<Eigen::Index>(i), col);
  return out;
}

std::vector<char> train_split(const std::vector<char>& labeled, std::uint64_t seed) {
  std::vector<int> rows;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (labeled[i]) rows.push_back(static_cast<int>(i));
  }
  Rng rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  const std::size_t n_train = (2 * rows.size() + 1) / 3;
  std::vector<char> train(labeled.size(), 0);
  for (std::size_t k = 0; k < n_train; ++k) train[static_cast<std::size_t>(rows[k])] = 1;
  return train;
}

}  // namespace speedhist::datagen
