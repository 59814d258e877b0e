#include "speedhist/errors.hpp"
#include "speedhist/nn.hpp"

namespace speedhist::nn {

Mlp::Mlp(const MlpConfig& config, Rng& rng) : config_(config) {
  if (config.input < 1 || config.output < 1) throw ArgumentError("mlp: layer widths must be positive");
  std::vector<int> widths{config.input};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(config.output);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const bool last = l + 2 == widths.size();
    Matrix w = last && config.zero_init_output ? Matrix::Zero(widths[l], widths[l + 1])
                                               : glorot_uniform(widths[l], widths[l + 1], rng);
    weights_.emplace_back(std::move(w));
    biases_.emplace_back(Matrix::Zero(1, widths[l + 1]));
  }
}

MlpTrace Mlp::forward(const Matrix& x, bool training, Rng& rng) const {
  if (x.cols() != config_.input) {
    throw ArgumentError("mlp: input has " + std::to_string(x.cols()) + " columns, expected " +
                        std::to_string(config_.input));
  }
  MlpTrace t;
  Matrix h = x;
  const std::size_t layers = weights_.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const bool last = l + 1 == layers;
    t.inputs.push_back(h);
    t.pre.push_back(add_row_bias(matmul(h, weights_[l].value), biases_[l].value));
    const Activation act = last ? config_.output_activation : Activation::kRelu;
    t.activated.push_back(activate(act, t.pre.back()));
    if (last) {
      h = t.activated.back();
    } else {
      t.drop.push_back(dropout(t.activated.back(), config_.dropout, training, rng));
      h = t.drop.back().out;
    }
  }
  t.output = std::move(h);
  return t;
}

Matrix Mlp::predict(const Matrix& x) const {
  Rng unused(0);
  return forward(x, false, unused).output;
}

Matrix Mlp::backward(const MlpTrace& trace, const Matrix& dout, bool accumulate) {
  Matrix g = dout;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const bool last = l + 1 == weights_.size();
    if (!last) g = dropout_backward(trace.drop[l], g);
    const Activation act = last ? config_.output_activation : Activation::kRelu;
    g = activate_backward(act, trace.pre[l], trace.activated[l], g);
    if (accumulate) {
      auto grads = matmul_backward(trace.inputs[l], weights_[l].value, g);
      weights_[l].grad += grads.db;
      biases_[l].grad += row_bias_backward(g);
      g = std::move(grads.da);
    } else {
      g = g * weights_[l].value.transpose();
    }
  }
  return g;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const Parameter*> Mlp::parameters() const {
  std::vector<const Parameter*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

void Mlp::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

}  // namespace speedhist::nn
