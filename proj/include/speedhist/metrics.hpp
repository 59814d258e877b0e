#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "speedhist/matrix.hpp"

namespace speedhist::metrics {

inline constexpr double kKlEpsilon = 1e-10;

struct HistMetrics {
  double intersection = 0.0;
  double correlation = 0.0;
  double bhattacharyya = 0.0;
  double kl_divergence = 0.0;
};

// `truth` is the label histogram S, `predicted` the estimate T. All functions
// throw ArgumentError when the lengths differ.

/// sum_i min(S_i, T_i)
double intersection(std::span<const double> truth, std::span<const double> predicted);
/// Pearson correlation over bucket values. When either side has zero
/// variance the result is 1 if S == T and 0 otherwise.
double correlation(std::span<const double> truth, std::span<const double> predicted);
/// sqrt(max(0, 1 - sum_i sqrt(S_i T_i))), evaluated in the equivalent form
/// sqrt(0.5 sum_i (sqrt S_i - sqrt T_i)^2) for normalized inputs.
double bhattacharyya(std::span<const double> truth, std::span<const double> predicted);
/// sum over S_i > 0 of S_i ln(S_i / (T_i + 1e-10)), floored at 0.
double kl_divergence(std::span<const double> truth, std::span<const double> predicted);

HistMetrics hist_metrics(std::span<const double> truth, std::span<const double> predicted);

/// Row-wise hist_metrics of two equally shaped matrices, restricted to `rows`.
std::vector<HistMetrics> hist_metrics_rows(const Matrix& truth, const Matrix& predicted, std::span<const int> rows);
/// Field-wise mean; all zero for an empty input.
HistMetrics mean(std::span<const HistMetrics> values);

struct ClsMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double roc_auc = 0.0;
};

/// `probs` is n x C. Accuracy uses the row argmax (lowest index on ties).
/// Macro-F1 averages over all C classes; a class with no true and no
/// predicted sample scores 0. ROC AUC is the macro one-vs-rest trapezoidal
/// AUC over classes that have both positives and negatives (0.5 when none do).
ClsMetrics cls_metrics(const Matrix& probs, std::span<const int> labels);

/// Trapezoidal ROC AUC of `scores` against binary `positive` flags. Tied
/// scores form a single ROC point.
double roc_auc_binary(std::span<const double> scores, std::span<const char> positive);

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  // Sample standard deviation / sqrt(n); 0 for a single value.
  double sem = 0.0;
  std::size_t count = 0;
};

/// Throws ArgumentError on an empty input.
Summary summarize(std::span<const double> values);

using MetricRecord = std::map<std::string, double>;
using SummaryTable = std::map<std::string, Summary>;

/// Per-metric summary over runs. Every record must carry the same metric names.
SummaryTable aggregate(const std::vector<MetricRecord>& runs);

MetricRecord to_record(const HistMetrics& m);
MetricRecord to_record(const ClsMetrics& m);

/// metric,mean,median,sem,count
void write_summary_csv(const std::string& path, const SummaryTable& table);
std::string summary_json(const SummaryTable& table);

}  // namespace speedhist::metrics
