#include <algorithm>
#include <cmath>

#include "speedhist/argcn.hpp"
#include "speedhist/errors.hpp"

namespace speedhist::argcn {

namespace {
std::vector<char> effective_mask(const std::vector<char>& mask, Eigen::Index rows) {
  if (mask.empty()) return std::vector<char>(static_cast<std::size_t>(rows), 1);
  if (static_cast<Eigen::Index>(mask.size()) != rows) throw ArgumentError("mask length does not match rows");
  return mask;
}

double masked_count(const std::vector<char>& mask) {
  return static_cast<double>(std::count_if(mask.begin(), mask.end(), [](char m) { return m != 0; }));
}
}  // namespace

LossValue intersection_loss(const Matrix& predicted, const Matrix& target, const std::vector<char>& mask) {
  if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
    throw ArgumentError("intersection_loss: shape mismatch");
  }
  const auto m = effective_mask(mask, predicted.rows());
  const double n = masked_count(m);
  LossValue out{0.0, Matrix::Zero(predicted.rows(), predicted.cols())};
  if (n == 0) return out;
  for (Eigen::Index i = 0; i < predicted.rows(); ++i) {
    if (!m[static_cast<std::size_t>(i)]) continue;
    double overlap = 0.0;
    for (Eigen::Index j = 0; j < predicted.cols(); ++j) {
      const double s = predicted(i, j);
      const double t = target(i, j);
      overlap += std::min(s, t);
      // Subgradient of min: the smaller argument carries it, ties split evenly.
      out.grad(i, j) = s < t ? -1.0 / n : (s == t ? -0.5 / n : 0.0);
    }
    out.value += 1.0 - overlap;
  }
  out.value /= n;
  return out;
}

LossValue cross_entropy_loss(const Matrix& predicted, const Matrix& one_hot, const std::vector<char>& mask) {
  if (predicted.rows() != one_hot.rows() || predicted.cols() != one_hot.cols()) {
    throw ArgumentError("cross_entropy_loss: shape mismatch");
  }
  constexpr double kFloor = 1e-12;
  const auto m = effective_mask(mask, predicted.rows());
  const double n = masked_count(m);
  LossValue out{0.0, Matrix::Zero(predicted.rows(), predicted.cols())};
  if (n == 0) return out;
  for (Eigen::Index i = 0; i < predicted.rows(); ++i) {
    if (!m[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < predicted.cols(); ++j) {
      if (one_hot(i, j) == 0.0) continue;
      const double p = predicted(i, j);
      out.value -= one_hot(i, j) * std::log(std::max(p, kFloor));
      if (p > kFloor) out.grad(i, j) = -one_hot(i, j) / (p * n);
    }
  }
  out.value /= n;
  return out;
}

LossValue bce_logits(const Matrix& logits, double target) {
  LossValue out{0.0, Matrix(logits.rows(), logits.cols())};
  const double n = static_cast<double>(logits.size());
  if (n == 0) return out;
  for (Eigen::Index k = 0; k < logits.size(); ++k) {
    const double x = logits.data()[k];
    out.value += std::max(x, 0.0) - x * target + std::log1p(std::exp(-std::abs(x)));
    const double sig = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    out.grad.data()[k] = (sig - target) / n;
  }
  out.value /= n;
  return out;
}

}  // namespace speedhist::argcn
