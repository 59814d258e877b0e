#include <cmath>
#include <string>

#include "speedhist/errors.hpp"
#include "speedhist/nn.hpp"

namespace speedhist::nn {

namespace {
std::string shape(const auto& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError(std::string(what) + ": shape " + shape(a) + " vs " + shape(b));
  }
}
}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ArgumentError("matmul: " + shape(a) + " * " + shape(b));
  return a * b;
}

ProductGrads matmul_backward(const Matrix& a, const Matrix& b, const Matrix& dout) {
  if (dout.rows() != a.rows() || dout.cols() != b.cols()) throw ArgumentError("matmul_backward: bad dout shape");
  return {dout * b.transpose(), a.transpose() * dout};
}

Matrix sparse_dense_matmul(const SparseMatrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ArgumentError("sparse_dense_matmul: " + shape(a) + " * " + shape(b));
  return a * b;
}

Matrix sparse_dense_matmul_backward_dense(const SparseMatrix& a, const Matrix& dout) {
  if (dout.rows() != a.rows()) throw ArgumentError("sparse_dense_matmul_backward: bad dout shape");
  return a.transpose() * dout;
}

SparseMatrix sparse_dense_matmul_backward_sparse(const SparseMatrix& a, const Matrix& b, const Matrix& dout) {
  if (dout.rows() != a.rows() || dout.cols() != b.cols()) {
    throw ArgumentError("sparse_dense_matmul_backward: bad dout shape");
  }
  SparseMatrix da = a;
  for (Eigen::Index i = 0; i < da.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(da, i); it; ++it) {
      it.valueRef() = dout.row(it.row()).dot(b.row(it.col()));
    }
  }
  return da;
}

Matrix add_row_bias(const Matrix& x, const Matrix& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) throw ArgumentError("add_row_bias: bias " + shape(bias));
  Matrix out = x;
  out.rowwise() += bias.row(0);
  return out;
}

Matrix row_bias_backward(const Matrix& dout) { return dout.colwise().sum(); }

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_backward(const Matrix& x, const Matrix& dout) {
  require_same_shape(x, dout, "relu_backward");
  return (x.array() > 0.0).select(dout, 0.0);
}

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Matrix sigmoid_backward(const Matrix& out, const Matrix& dout) {
  require_same_shape(out, dout, "sigmoid_backward");
  return dout.array() * out.array() * (1.0 - out.array());
}

Matrix softmax_rows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    out.row(i) = (x.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

Matrix softmax_rows_backward(const Matrix& out, const Matrix& dout) {
  require_same_shape(out, dout, "softmax_rows_backward");
  // dx_ij = y_ij * (g_ij - sum_k g_ik y_ik)
  const Eigen::VectorXd dots = (out.array() * dout.array()).rowwise().sum();
  Matrix dx = dout;
  dx.colwise() -= dots;
  return dx.cwiseProduct(out);
}

Matrix activate(Activation act, const Matrix& x) {
  switch (act) {
    case Activation::kLinear:
      return x;
    case Activation::kRelu:
      return relu(x);
    case Activation::kSigmoid:
      return sigmoid(x);
    case Activation::kSoftmax:
      return softmax_rows(x);
  }
  return x;
}

Matrix activate_backward(Activation act, const Matrix& x, const Matrix& out, const Matrix& dout) {
  switch (act) {
    case Activation::kLinear:
      return dout;
    case Activation::kRelu:
      return relu_backward(x, dout);
    case Activation::kSigmoid:
      return sigmoid_backward(out, dout);
    case Activation::kSoftmax:
      return softmax_rows_backward(out, dout);
  }
  return dout;
}

DropoutResult dropout(const Matrix& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return {x, Matrix()};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = u(rng) < rate ? 0.0 : keep_scale;
  return {x.cwiseProduct(mask), std::move(mask)};
}

Matrix dropout_backward(const DropoutResult& forward, const Matrix& dout) {
  if (forward.mask.size() == 0) return dout;
  require_same_shape(forward.mask, dout, "dropout_backward");
  return dout.cwiseProduct(forward.mask);
}

Matrix gaussian_noise(const Matrix& x, double stddev, bool training, Rng& rng) {
  if (stddev < 0.0) throw ArgumentError("noise stddev must be non-negative");
  if (!training || stddev == 0.0) return x;
  return x + stddev * standard_normal(x.rows(), x.cols(), rng);
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index k = 0; k < out.size(); ++k) out.data()[k] = n(rng);
  return out;
}

Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  Matrix w(fan_in, fan_out);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = u(rng);
  return w;
}

}  // namespace speedhist::nn
