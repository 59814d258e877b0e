#include "speedhist/argcn.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/n2v.hpp"

namespace speedhist::n2v {

namespace {
std::vector<int> selected(const std::vector<char>& mask) {
  std::vector<int> rows;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) rows.push_back(static_cast<int>(i));
  }
  return rows;
}
}  // namespace

HeadResult regress_head(const Matrix& embeddings, const Matrix& labels, const std::vector<char>& train_mask,
                        const std::vector<char>& test_mask, const HeadConfig& config, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(embeddings.rows());
  if (static_cast<std::size_t>(labels.rows()) != n || train_mask.size() != n ||
      (!test_mask.empty() && test_mask.size() != n)) {
    throw ArgumentError("regress_head: embeddings, labels and masks must have the same number of rows");
  }
  const auto train_rows = selected(train_mask);
  if (train_rows.empty()) throw ConfigurationError("regress_head: no training label");

  Matrix x(static_cast<Eigen::Index>(train_rows.size()), embeddings.cols());
  Matrix y(static_cast<Eigen::Index>(train_rows.size()), labels.cols());
  for (std::size_t k = 0; k < train_rows.size(); ++k) {
    x.row(static_cast<Eigen::Index>(k)) = embeddings.row(train_rows[k]);
    y.row(static_cast<Eigen::Index>(k)) = labels.row(train_rows[k]);
  }

  Rng rng(seed);
  HeadResult r;
  r.model = nn::Mlp({static_cast<int>(embeddings.cols()), config.hidden, static_cast<int>(labels.cols()),
                     nn::Activation::kSoftmax, 0.0, true},
                    rng);
  nn::AdamState adam;
  adam.learning_rate = config.learning_rate;
  r.loss_trace.reserve(static_cast<std::size_t>(std::max(config.epochs, 0)));
  for (int e = 0; e < config.epochs; ++e) {
    r.model.zero_grad();
    const auto trace = r.model.forward(x, true, rng);
    const auto loss = argcn::intersection_loss(trace.output, y);
    r.model.backward(trace, loss.grad);
    nn::adam_step(adam, r.model.parameters());
    r.loss_trace.push_back(loss.value);
  }
  r.predictions = r.model.predict(embeddings);
  r.train_metrics = metrics::mean(metrics::hist_metrics_rows(labels, r.predictions, train_rows));
  if (!test_mask.empty()) {
    r.test_metrics = metrics::mean(metrics::hist_metrics_rows(labels, r.predictions, selected(test_mask)));
  }
  return r;
}

}  // namespace speedhist::n2v
