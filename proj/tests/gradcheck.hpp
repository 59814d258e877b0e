#pragma once

#include <string>
#include <vector>

#include "support.hpp"

#include "speedhist/argcn.hpp"

namespace testing {

struct GradCheck {
  std::string name;  // loss/parameter pair
  double relative_error = 0.0;
};

/// Four-node instance with F = 5 input features and an M = 3 embedding.
inline speedhist::argcn::TrainingData gradcheck_data(speedhist::argcn::TaskMode mode, speedhist::Rng& rng) {
  using namespace speedhist;
  const auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 1}});
  Matrix x = random_matrix(4, 5, rng);
  Matrix targets;
  if (mode == argcn::TaskMode::kRegression) {
    targets = random_histograms(4, 6, rng);
  } else {
    targets = Matrix::Zero(4, 3);
    for (int r = 0; r < 4; ++r) targets(r, r % 3) = 1.0;
  }
  auto data = argcn::TrainingData::from_graph(g, targets, {1, 1, 0, 1});
  data.features = x.sparseView();
  return data;
}

inline speedhist::argcn::ArgcnConfig gradcheck_config(speedhist::argcn::TaskMode mode) {
  using namespace speedhist;
  auto cfg = mode == argcn::TaskMode::kRegression ? argcn::ArgcnConfig::road(5, 6)
                                                  : argcn::ArgcnConfig::classification(5, 3);
  cfg.encoder_hidden = 8;
  cfg.embedding_dim = 3;
  cfg.decoder_hidden = {8, 8};
  cfg.discriminator_hidden = {16, 8};
  return cfg;
}

/// Compares every gradient of the three training phases with central finite
/// differences (h = 1e-5). The relative error of a tensor is
/// ||analytic - numeric|| / max(||analytic||, ||numeric||).
inline std::vector<GradCheck> argcn_gradient_check(speedhist::argcn::TaskMode mode, std::uint64_t seed) {
  using namespace speedhist;
  using argcn::ArgcnModel;
  Rng rng(seed);
  const auto data = gradcheck_data(mode, rng);
  ArgcnModel model(gradcheck_config(mode), seed);
  // Zero-initialized biases can leave a ReLU input at exactly 0, where the
  // central difference sees half the slope. Jitter everything off the kinks.
  for (auto group : {&ArgcnModel::encoder_parameters, &ArgcnModel::decoder_parameters,
                     &ArgcnModel::discriminator_parameters}) {
    for (auto* p : (model.*group)()) p->value += random_matrix(p->value.rows(), p->value.cols(), rng, 0.05);
  }
  const std::uint64_t step = derive_seed(seed, 99);
  std::vector<GradCheck> out;

  using Group = std::vector<nn::Parameter*> (ArgcnModel::*)();
  auto check_group = [&](const std::string& label, ArgcnModel& analytic, Group group, auto&& loss) {
    auto params = (analytic.*group)();
    for (std::size_t k = 0; k < params.size(); ++k) {
      const Matrix fd = numeric_gradient(
          [&](const Matrix& v) {
            ArgcnModel copy = analytic;
            ((copy.*group)())[k]->value = v;
            return loss(copy);
          },
          params[k]->value);
      out.push_back({label + "/" + std::to_string(k), relative_error(params[k]->grad, fd)});
    }
  };

  // Phase 1: dL1 w.r.t. encoder and decoder.
  ArgcnModel m1 = model;
  argcn::supervised_pass(m1, data, step);
  auto l1 = [&](ArgcnModel& m) { return argcn::supervised_pass(m, data, step); };
  check_group("dL1/encoder", m1, &ArgcnModel::encoder_parameters, l1);
  check_group("dL1/decoder", m1, &ArgcnModel::decoder_parameters, l1);

  // Phase 2: dL2 w.r.t. the discriminator, embedding held constant.
  const Matrix z = argcn::encode(model, data.features, data.adjacency, true, derive_seed(seed, 7));
  ArgcnModel m2 = model;
  argcn::discriminator_pass(m2, z, step);
  auto l2 = [&](ArgcnModel& m) { return argcn::discriminator_pass(m, z, step).l2; };
  check_group("dL2/discriminator", m2, &ArgcnModel::discriminator_parameters, l2);

  // Phase 3: dL3 w.r.t. the encoder, discriminator held constant.
  ArgcnModel m3 = model;
  argcn::generator_pass(m3, data, step);
  auto l3 = [&](ArgcnModel& m) { return argcn::generator_pass(m, data, step); };
  check_group("dL3/encoder", m3, &ArgcnModel::encoder_parameters, l3);
  return out;
}

}  // namespace testing
