#include "speedhist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "speedhist/csv.hpp"
#include "speedhist/errors.hpp"

namespace speedhist::metrics {

namespace {
void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ArgumentError("histogram lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}
}  // namespace

double intersection(std::span<const double> truth, std::span<const double> predicted) {
  check_lengths(truth, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += std::min(truth[i], predicted[i]);
  return s;
}

double correlation(std::span<const double> truth, std::span<const double> predicted) {
  check_lengths(truth, predicted);
  const double n = static_cast<double>(truth.size());
  if (truth.empty()) return 1.0;
  const double ms = std::accumulate(truth.begin(), truth.end(), 0.0) / n;
  const double mt = std::accumulate(predicted.begin(), predicted.end(), 0.0) / n;
  double sst = 0.0;
  double ss = 0.0;
  double tt = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double ds = truth[i] - ms;
    const double dt = predicted[i] - mt;
    sst += ds * dt;
    ss += ds * ds;
    tt += dt * dt;
  }
  if (ss == 0.0 || tt == 0.0) {
    return std::equal(truth.begin(), truth.end(), predicted.begin()) ? 1.0 : 0.0;
  }
  return std::clamp(sst / std::sqrt(ss * tt), -1.0, 1.0);
}

double bhattacharyya(std::span<const double> truth, std::span<const double> predicted) {
  check_lengths(truth, predicted);
  // 1 - sum sqrt(S T) equals half the squared Hellinger sum for normalized
  // inputs; the latter is exactly 0 at S == T.
  double h = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = std::sqrt(truth[i]) - std::sqrt(predicted[i]);
    h += d * d;
  }
  return std::sqrt(std::max(0.0, 0.5 * h));
}

double kl_divergence(std::span<const double> truth, std::span<const double> predicted) {
  check_lengths(truth, predicted);
  double kl = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] > 0.0) kl += truth[i] * std::log(truth[i] / (predicted[i] + kKlEpsilon));
  }
  // The epsilon makes S == T come out around -1e-9.
  return std::max(0.0, kl);
}

HistMetrics hist_metrics(std::span<const double> truth, std::span<const double> predicted) {
  return {intersection(truth, predicted), correlation(truth, predicted), bhattacharyya(truth, predicted),
          kl_divergence(truth, predicted)};
}

std::vector<HistMetrics> hist_metrics_rows(const Matrix& truth, const Matrix& predicted, std::span<const int> rows) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols()) {
    throw ArgumentError("hist_metrics_rows: shape mismatch");
  }
  std::vector<HistMetrics> out;
  out.reserve(rows.size());
  const auto k = static_cast<std::size_t>(truth.cols());
  for (int r : rows) {
    out.push_back(hist_metrics({truth.row(r).data(), k}, {predicted.row(r).data(), k}));
  }
  return out;
}

HistMetrics mean(std::span<const HistMetrics> values) {
  HistMetrics m;
  if (values.empty()) return m;
  for (const auto& v : values) {
    m.intersection += v.intersection;
    m.correlation += v.correlation;
    m.bhattacharyya += v.bhattacharyya;
    m.kl_divergence += v.kl_divergence;
  }
  const double n = static_cast<double>(values.size());
  return {m.intersection / n, m.correlation / n, m.bhattacharyya / n, m.kl_divergence / n};
}

double roc_auc_binary(std::span<const double> scores, std::span<const char> positive) {
  if (scores.size() != positive.size()) throw ArgumentError("roc_auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double pos = 0.0;
  double neg = 0.0;
  for (char p : positive) (p ? pos : neg) += 1.0;
  if (pos == 0.0 || neg == 0.0) throw ArgumentError("roc_auc: need both classes");
  double area = 0.0;
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double prev_tp = tp;
    const double prev_fp = fp;
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) (positive[order[j]] ? tp : fp) += 1.0;
    area += (fp - prev_fp) * (tp + prev_tp) / 2.0;
    i = j;
  }
  return area / (pos * neg);
}

ClsMetrics cls_metrics(const Matrix& probs, std::span<const int> labels) {
  const auto n = static_cast<std::size_t>(probs.rows());
  if (n == 0 || labels.size() != n) throw ArgumentError("cls_metrics: empty input or length mismatch");
  const auto classes = static_cast<int>(probs.cols());
  std::vector<int> predicted(n);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= classes) throw ArgumentError("cls_metrics: label out of range");
    Eigen::Index best = 0;
    probs.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
    predicted[i] = static_cast<int>(best);
    correct += predicted[i] == labels[i] ? 1 : 0;
  }
  ClsMetrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(n);

  double f1_sum = 0.0;
  double auc_sum = 0.0;
  int auc_classes = 0;
  std::vector<double> scores(n);
  std::vector<char> positive(n);
  for (int c = 0; c < classes; ++c) {
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool t = labels[i] == c;
      const bool p = predicted[i] == c;
      tp += t && p ? 1 : 0;
      fp += !t && p ? 1 : 0;
      fn += t && !p ? 1 : 0;
      scores[i] = probs(static_cast<Eigen::Index>(i), c);
      positive[i] = t ? 1 : 0;
    }
    const double denom = 2 * tp + fp + fn;
    f1_sum += denom > 0 ? 2 * tp / denom : 0.0;
    const auto pos = static_cast<std::size_t>(tp + fn);
    if (pos > 0 && pos < n) {
      auc_sum += roc_auc_binary(scores, positive);
      ++auc_classes;
    }
  }
  m.macro_f1 = f1_sum / classes;
  m.roc_auc = auc_classes > 0 ? auc_sum / auc_classes : 0.5;
  return m;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("summarize: no values");
  Summary s;
  s.count = values.size();
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  s.median = sorted.size() % 2 == 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2.0;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sem = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

SummaryTable aggregate(const std::vector<MetricRecord>& runs) {
  if (runs.empty()) throw ArgumentError("aggregate: no runs");
  SummaryTable table;
  for (const auto& [name, unused] : runs.front()) {
    std::vector<double> values;
    values.reserve(runs.size());
    for (const auto& r : runs) {
      auto it = r.find(name);
      if (it == r.end()) throw ArgumentError("aggregate: run is missing metric '" + name + "'");
      values.push_back(it->second);
    }
    table[name] = summarize(values);
  }
  return table;
}

MetricRecord to_record(const HistMetrics& m) {
  return {{"intersection", m.intersection},
          {"correlation", m.correlation},
          {"bhattacharyya", m.bhattacharyya},
          {"kl_divergence", m.kl_divergence}};
}

MetricRecord to_record(const ClsMetrics& m) {
  return {{"accuracy", m.accuracy}, {"macro_f1", m.macro_f1}, {"roc_auc", m.roc_auc}};
}

void write_summary_csv(const std::string& path, const SummaryTable& table) {
  csv::Writer w(path, {"metric", "mean", "median", "sem", "count"});
  for (const auto& [name, s] : table) {
    w.row({name, csv::format_double(s.mean), csv::format_double(s.median), csv::format_double(s.sem),
           std::to_string(s.count)});
  }
}

std::string summary_json(const SummaryTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, s] : table) {
    j[name] = {{"mean", s.mean}, {"median", s.median}, {"sem", s.sem}, {"count", s.count}};
  }
  return j.dump(2);
}

}  // namespace speedhist::metrics
