#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "speedhist/graph.hpp"
#include "speedhist/rng.hpp"

namespace testing {

using speedhist::Matrix;

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("speedhist_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Line graph over nodes 0..n-1 with one continuous zero feature column.
inline speedhist::graph::LineGraph make_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::int64_t> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
  std::vector<speedhist::graph::Edge> e;
  for (auto [a, b] : edges) e.push_back({a, b});
  return speedhist::graph::LineGraph::with_encoded_features(std::move(ids), std::move(e), Matrix::Zero(n, 1));
}

/// Symmetric Erdos-Renyi style graph with `n` nodes and expected degree `degree`.
inline speedhist::graph::LineGraph random_graph(int n, double degree, std::uint64_t seed) {
  speedhist::Rng rng(seed);
  std::bernoulli_distribution keep(degree / std::max(1, n - 1));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (keep(rng)) {
        edges.emplace_back(i, j);
        edges.emplace_back(j, i);
      }
    }
  }
  return make_graph(n, edges);
}

inline Matrix random_histograms(int rows, int k, speedhist::Rng& rng, double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(rows, k);
  for (int r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      m(r, c) = u(rng) < zero_prob ? 0.0 : u(rng);
      sum += m(r, c);
    }
    if (sum == 0.0) {
      m(r, 0) = 1.0;
      sum = 1.0;
    }
    m.row(r) /= sum;
  }
  return m;
}

/// Central-difference gradient of `f` at `x` (step h, double precision).
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, Matrix x, double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = f(x);
    x.data()[i] = keep - h;
    const double down = f(x);
    x.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, speedhist::Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace testing
