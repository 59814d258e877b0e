#pragma once

#include <span>
#include <string>
#include <vector>

#include "speedhist/matrix.hpp"
#include "speedhist/rng.hpp"

// Dense/sparse building blocks with hand-written reverse-mode gradients. Every
// op is a pair: a forward function and a *_backward function that maps the
// upstream gradient to gradients of the inputs.
namespace speedhist::nn {

using Tensor2 = Matrix;

struct Parameter {
  Matrix value;
  Matrix grad;

  Parameter() = default;
  explicit Parameter(Matrix v) : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// --- products ---------------------------------------------------------------

Matrix matmul(const Matrix& a, const Matrix& b);

struct ProductGrads {
  Matrix da;
  Matrix db;
};
ProductGrads matmul_backward(const Matrix& a, const Matrix& b, const Matrix& dout);

Matrix sparse_dense_matmul(const SparseMatrix& a, const Matrix& b);
/// Gradient w.r.t. the dense operand: a^T * dout.
Matrix sparse_dense_matmul_backward_dense(const SparseMatrix& a, const Matrix& dout);
/// Gradient w.r.t. the sparse operand, restricted to its sparsity pattern.
SparseMatrix sparse_dense_matmul_backward_sparse(const SparseMatrix& a, const Matrix& b, const Matrix& dout);

/// x + 1 * bias, bias is 1 x cols.
Matrix add_row_bias(const Matrix& x, const Matrix& bias);
/// Column sums of dout.
Matrix row_bias_backward(const Matrix& dout);

// --- activations --------------------------------------------------------------

enum class Activation { kLinear, kRelu, kSigmoid, kSoftmax };

Matrix relu(const Matrix& x);
Matrix relu_backward(const Matrix& x, const Matrix& dout);
Matrix sigmoid(const Matrix& x);
Matrix sigmoid_backward(const Matrix& out, const Matrix& dout);
/// Row-wise softmax with the row maximum subtracted first.
Matrix softmax_rows(const Matrix& x);
Matrix softmax_rows_backward(const Matrix& out, const Matrix& dout);

Matrix activate(Activation act, const Matrix& x);
/// `x` is the activation input, `out` its output.
Matrix activate_backward(Activation act, const Matrix& x, const Matrix& out, const Matrix& dout);

// --- stochastic layers --------------------------------------------------------

struct DropoutResult {
  Matrix out;
  Matrix mask;  // 0 or 1/(1-rate); empty when the layer was the identity
};
/// Inverted dropout. Identity when !training or rate == 0. Throws
/// ArgumentError unless 0 <= rate < 1.
DropoutResult dropout(const Matrix& x, double rate, bool training, Rng& rng);
Matrix dropout_backward(const DropoutResult& forward, const Matrix& dout);

/// x + N(0, stddev^2) noise in training mode, identity otherwise. The gradient
/// passes through unchanged.
Matrix gaussian_noise(const Matrix& x, double stddev, bool training, Rng& rng);

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// U(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

// --- optimizer ----------------------------------------------------------------

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
};

/// One bias-corrected Adam update: p -= lr * m_hat / (sqrt(v_hat) + eps).
/// Moments are created on the first call; later calls must pass the same
/// shapes. Throws ArgumentError on any mismatch.
void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix* const> grads);
void adam_step(AdamState& state, std::span<Parameter* const> params);

// --- multilayer perceptron ----------------------------------------------------

struct MlpConfig {
  int input = 0;
  std::vector<int> hidden;  // ReLU layers, each followed by dropout
  int output = 0;
  Activation output_activation = Activation::kLinear;
  double dropout = 0.0;
  bool zero_init_output = false;
};

struct MlpTrace {
  std::vector<Matrix> inputs;       // input of each dense layer
  std::vector<Matrix> pre;          // pre-activation of each dense layer
  std::vector<Matrix> activated;    // activation output of each dense layer
  std::vector<DropoutResult> drop;  // dropout after each hidden layer
  Matrix output;
};

class Mlp {
 public:
  Mlp() = default;
  Mlp(const MlpConfig& config, Rng& rng);

  [[nodiscard]] MlpTrace forward(const Matrix& x, bool training, Rng& rng) const;
  /// Output only; never applies dropout.
  [[nodiscard]] Matrix predict(const Matrix& x) const;
  /// Backpropagates `dout` (gradient w.r.t. the trace output). Parameter
  /// gradients are accumulated only when `accumulate` is set. Returns the
  /// gradient w.r.t. the input.
  Matrix backward(const MlpTrace& trace, const Matrix& dout, bool accumulate = true);

  std::vector<Parameter*> parameters();
  [[nodiscard]] std::vector<const Parameter*> parameters() const;
  void zero_grad();
  [[nodiscard]] const MlpConfig& config() const { return config_; }

 private:
  MlpConfig config_;
  std::vector<Parameter> weights_;
  std::vector<Parameter> biases_;
};

// --- checkpoints --------------------------------------------------------------

struct NamedTensor {
  std::string name;
  Matrix value;
};

/// JSON checkpoint: {"format": "speedhist-checkpoint", "version": 1,
/// "meta": {...}, "tensors": [{"name", "rows", "cols", "data"}]}. `data` is
/// row-major; doubles round-trip exactly.
void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors,
                     const std::string& meta_json = "{}");
struct Checkpoint {
  std::vector<NamedTensor> tensors;
  std::string meta_json;
  [[nodiscard]] const Matrix& at(const std::string& name) const;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace speedhist::nn
