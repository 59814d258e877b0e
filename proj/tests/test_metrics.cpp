#include <cmath>

#include "doctest.h"
#include "metric_oracle.hpp"
#include "support.hpp"

#include "speedhist/errors.hpp"
#include "speedhist/metrics.hpp"

using namespace speedhist;

namespace {

std::vector<double> row(const Matrix& m, Eigen::Index r) {
  return {m.row(r).data(), m.row(r).data() + m.cols()};
}

// Probability that a random positive outscores a random negative, ties half.
double pairwise_auc(const std::vector<double>& scores, const std::vector<char>& positive) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_SUITE("metrics") {
TEST_CASE("identical and disjoint histograms") {
  const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
  const auto m = metrics::hist_metrics(s, s);
  CHECK(m.intersection == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.correlation == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.bhattacharyya == 0.0);
  CHECK(m.kl_divergence == 0.0);

  const std::vector<double> a{0.5, 0.5, 0.0, 0.0};
  const std::vector<double> b{0.0, 0.0, 0.5, 0.5};
  const auto d = metrics::hist_metrics(a, b);
  CHECK(d.intersection == 0.0);
  CHECK(d.bhattacharyya == doctest::Approx(1.0).epsilon(1e-15));

  const std::vector<double> shorter{1.0};
  CHECK_THROWS_AS(metrics::hist_metrics(s, shorter), ArgumentError);
}

TEST_CASE("worked example") {
  const std::vector<double> s{0.5, 0.5, 0.0};
  const std::vector<double> t{0.25, 0.25, 0.5};
  const auto m = metrics::hist_metrics(s, t);
  CHECK(m.intersection == doctest::Approx(0.5).epsilon(1e-15));
  const double expected = std::sqrt(1.0 - 2.0 * std::sqrt(0.125));
  CHECK(m.bhattacharyya == doctest::Approx(expected).epsilon(1e-14));
  CHECK(m.bhattacharyya == doctest::Approx(0.5412).epsilon(1e-4));
  CHECK(m.kl_divergence == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("zero-variance correlation convention") {
  const std::vector<double> flat{0.25, 0.25, 0.25, 0.25};
  const std::vector<double> peaked{0.7, 0.1, 0.1, 0.1};
  CHECK(metrics::correlation(flat, flat) == 1.0);
  CHECK(metrics::correlation(flat, peaked) == 0.0);
  CHECK(metrics::correlation(peaked, flat) == 0.0);
}

TEST_CASE("all four metrics agree with the brute-force oracle") {
  Rng rng(2024);
  const Matrix s = testing::random_histograms(1000, 22, rng, 0.3);
  const Matrix t = testing::random_histograms(1000, 22, rng, 0.3);
  double worst = 0.0;
  for (Eigen::Index r = 0; r < 1000; ++r) {
    const auto a = row(s, r);
    const auto b = row(t, r);
    const auto got = metrics::hist_metrics(a, b);
    const auto want = testing::oracle_metrics(a, b);
    worst = std::max({worst, std::abs(got.intersection - static_cast<double>(want.intersection)),
                      std::abs(got.correlation - static_cast<double>(want.correlation)),
                      std::abs(got.bhattacharyya - static_cast<double>(want.bhattacharyya)),
                      std::abs(got.kl_divergence - static_cast<double>(want.kl))});
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("bounds and symmetry on random pairs") {
  Rng rng(7);
  const Matrix s = testing::random_histograms(500, 22, rng, 0.5);
  const Matrix t = testing::random_histograms(500, 22, rng, 0.5);
  int asymmetric_kl = 0;
  for (Eigen::Index r = 0; r < 500; ++r) {
    const auto a = row(s, r);
    const auto b = row(t, r);
    const auto m = metrics::hist_metrics(a, b);
    const auto back = metrics::hist_metrics(b, a);
    CHECK(m.intersection >= 0.0);
    CHECK(m.intersection <= 1.0 + 1e-12);
    CHECK(m.correlation >= -1.0);
    CHECK(m.correlation <= 1.0);
    CHECK(m.bhattacharyya >= 0.0);
    CHECK(m.bhattacharyya <= 1.0);
    CHECK(m.kl_divergence >= 0.0);
    CHECK(m.intersection == doctest::Approx(back.intersection).epsilon(1e-14));
    CHECK(m.correlation == doctest::Approx(back.correlation).epsilon(1e-12));
    CHECK(m.bhattacharyya == doctest::Approx(back.bhattacharyya).epsilon(1e-12));
    asymmetric_kl += std::abs(m.kl_divergence - back.kl_divergence) > 1e-9;
  }
  CHECK(asymmetric_kl > 450);
}

TEST_CASE("classification metrics") {
  Matrix perfect = Matrix::Zero(4, 3);
  const std::vector<int> labels{0, 1, 2, 1};
  for (int i = 0; i < 4; ++i) perfect(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  const auto p = metrics::cls_metrics(perfect, labels);
  CHECK(p.accuracy == 1.0);
  CHECK(p.macro_f1 == 1.0);
  CHECK(p.roc_auc == 1.0);

  // Predictions 0, 1, 1 for labels 0, 1, 2. F1 per class: 1, 2/3, 0.
  Matrix probs(3, 3);
  probs << 0.8, 0.1, 0.1, 0.2, 0.7, 0.1, 0.1, 0.6, 0.3;
  const std::vector<int> three{0, 1, 2};
  const auto m = metrics::cls_metrics(probs, three);
  CHECK(m.accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(m.macro_f1 == doctest::Approx(5.0 / 9.0));

  CHECK_THROWS_AS(metrics::cls_metrics(Matrix(0, 3), std::vector<int>{}), ArgumentError);
}

TEST_CASE("random two-class predictions score about one half") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 20000;
  Matrix probs(n, 2);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    probs(i, 0) = u(rng);
    probs(i, 1) = 1.0 - probs(i, 0);
    labels[static_cast<std::size_t>(i)] = u(rng) < 0.5 ? 0 : 1;
  }
  const auto m = metrics::cls_metrics(probs, labels);
  CHECK(std::abs(m.accuracy - 0.5) < 0.05);
  CHECK(std::abs(m.roc_auc - 0.5) < 0.05);
}

TEST_CASE("binary AUC equals the pairwise oracle, ties included") {
  Rng rng(4);
  std::uniform_int_distribution<int> coarse(0, 9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores(60);
    std::vector<char> pos(60);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      scores[i] = coarse(rng) / 10.0;
      pos[i] = static_cast<char>(coarse(rng) < 4);
    }
    pos[0] = 1;
    pos[1] = 0;
    CHECK(metrics::roc_auc_binary(scores, pos) == doctest::Approx(pairwise_auc(scores, pos)).epsilon(1e-12));
  }
}

TEST_CASE("aggregate examples") {
  auto summary = [](std::vector<double> v) { return metrics::summarize(v); };
  const auto one = summary({0.3});
  CHECK(one.mean == 0.3);
  CHECK(one.median == 0.3);
  CHECK(one.sem == 0.0);
  const auto two = summary({0.6, 0.8});
  CHECK(two.mean == doctest::Approx(0.7));
  CHECK(two.median == doctest::Approx(0.7));
  const auto three = summary({0.1, 0.2, 0.9});
  CHECK(three.mean == doctest::Approx(0.4));
  CHECK(three.median == doctest::Approx(0.2));
  // sample sd of {0.1, 0.2, 0.9} is sqrt(0.19), sem = sqrt(0.19 / 3)
  CHECK(three.sem == doctest::Approx(std::sqrt(0.19 / 3.0)));
  CHECK_THROWS_AS(summary({}), ArgumentError);

  const auto table = metrics::aggregate({{{"a", 1.0}, {"b", 3.0}}, {{"a", 2.0}, {"b", 5.0}}});
  CHECK(table.at("a").mean == 1.5);
  CHECK(table.at("b").median == 4.0);
  CHECK(table.at("b").count == 2);
}

TEST_CASE("summary json carries every metric") {
  const auto table = metrics::aggregate({{{"intersection", 0.5}}});
  const auto text = metrics::summary_json(table);
  CHECK(text.find("\"intersection\"") != std::string::npos);
  CHECK(text.find("\"median\"") != std::string::npos);
}
}
