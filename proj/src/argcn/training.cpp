#include "speedhist/argcn.hpp"
#include "speedhist/csv.hpp"
#include "speedhist/errors.hpp"

namespace speedhist::argcn {

std::uint64_t stream_seed(std::uint64_t step_seed, Stream stream) {
  return derive_seed(step_seed, static_cast<std::uint64_t>(stream));
}

Matrix encode(const ArgcnModel& model, const SparseMatrix& x, const SparseMatrix& a, bool training,
              std::uint64_t seed) {
  Rng rng(seed);
  return model.encode_trace(x, a, training, rng).z;
}

Matrix decode(const ArgcnModel& model, const Matrix& z, bool training, std::uint64_t seed) {
  Rng rng(seed);
  return model.decoder().forward(z, training, rng).output;
}

Discrimination discriminate(const ArgcnModel& model, const Matrix& input) {
  Discrimination d;
  d.logits = model.discriminator().predict(input);
  d.scores = nn::sigmoid(d.logits);
  return d;
}

namespace {
LossValue task_loss(const ArgcnModel& model, const Matrix& predicted, const TrainingData& data) {
  return model.config().mode == TaskMode::kRegression ? intersection_loss(predicted, data.targets, data.mask)
                                                       : cross_entropy_loss(predicted, data.targets, data.mask);
}

void zero(const std::vector<nn::Parameter*>& params) {
  for (auto* p : params) p->zero_grad();
}
}  // namespace

double supervised_pass(ArgcnModel& model, const TrainingData& data, std::uint64_t step_seed, Matrix* z_out) {
  zero(model.encoder_parameters());
  zero(model.decoder_parameters());
  Rng enc_rng(stream_seed(step_seed, Stream::kEncoderSupervised));
  Rng dec_rng(stream_seed(step_seed, Stream::kDecoder));
  auto et = model.encode_trace(data.features, data.adjacency, true, enc_rng);
  auto dt = model.decoder().forward(et.z, true, dec_rng);
  auto loss = task_loss(model, dt.output, data);
  const Matrix dz = model.decoder().backward(dt, loss.grad);
  model.encoder_backward(data.features, data.adjacency, et, dz);
  if (z_out) *z_out = std::move(et.z);
  return loss.value;
}

StepLosses discriminator_pass(ArgcnModel& model, const Matrix& z, std::uint64_t step_seed) {
  zero(model.discriminator_parameters());
  Rng prior_rng(stream_seed(step_seed, Stream::kPrior));
  Rng real_rng(stream_seed(step_seed, Stream::kDiscriminatorReal));
  Rng fake_rng(stream_seed(step_seed, Stream::kDiscriminatorFake));
  const Matrix q = nn::standard_normal(z.rows(), z.cols(), prior_rng);
  auto& disc = model.discriminator();
  StepLosses l;
  auto rt = disc.forward(q, true, real_rng);
  auto real = bce_logits(rt.output, 1.0);
  disc.backward(rt, real.grad);
  auto ft = disc.forward(z, true, fake_rng);
  auto fake = bce_logits(ft.output, 0.0);
  disc.backward(ft, fake.grad);
  l.l2_real = real.value;
  l.l2_fake = fake.value;
  l.l2 = real.value + fake.value;
  return l;
}

double generator_pass(ArgcnModel& model, const TrainingData& data, std::uint64_t step_seed) {
  zero(model.encoder_parameters());
  Rng enc_rng(stream_seed(step_seed, Stream::kEncoderGenerator));
  Rng disc_rng(stream_seed(step_seed, Stream::kDiscriminatorGenerator));
  auto et = model.encode_trace(data.features, data.adjacency, true, enc_rng);
  auto& disc = model.discriminator();
  auto ft = disc.forward(et.z, true, disc_rng);
  auto loss = bce_logits(ft.output, 1.0);
  const Matrix dz = disc.backward(ft, loss.grad, /*accumulate=*/false);
  model.encoder_backward(data.features, data.adjacency, et, dz);
  return loss.value;
}

StepLosses optimization_step(ArgcnModel& model, const TrainingData& data, std::uint64_t step_seed,
                             const PhaseObserver& observer) {
  StepLosses losses;
  Matrix z;
  losses.l1 = supervised_pass(model, data, step_seed, &z);
  {
    auto params = model.encoder_parameters();
    auto dec = model.decoder_parameters();
    params.insert(params.end(), dec.begin(), dec.end());
    nn::adam_step(model.supervised_optimizer(), params);
  }
  if (observer) observer(1, model);
  if (!model.config().adversarial) return losses;

  const auto d = discriminator_pass(model, z, step_seed);
  losses.l2_real = d.l2_real;
  losses.l2_fake = d.l2_fake;
  losses.l2 = d.l2;
  nn::adam_step(model.discriminator_optimizer(), model.discriminator_parameters());
  if (observer) observer(2, model);

  losses.l3 = generator_pass(model, data, step_seed);
  nn::adam_step(model.generator_optimizer(), model.encoder_parameters());
  if (observer) observer(3, model);
  return losses;
}

TrainResult train(const TrainingData& data, const TrainConfig& config) {
  if (data.labeled_count() == 0) throw ConfigurationError("no labeled training node in batch");
  if (config.epochs < 0) throw ArgumentError("epochs must be non-negative");
  TrainResult r{ArgcnModel(config.model, derive_seed(config.seed, kInitStream)), {}};
  r.trace.reserve(static_cast<std::size_t>(config.epochs));
  for (int e = 0; e < config.epochs; ++e) {
    r.trace.push_back(
        optimization_step(r.model, data, derive_seed(config.seed, {kStepStream, static_cast<std::uint64_t>(e)})));
  }
  return r;
}

Matrix predict(const ArgcnModel& model, const SparseMatrix& x, const SparseMatrix& a) {
  Rng unused(0);
  const auto et = model.encode_trace(x, a, false, unused);
  return model.decoder().predict(et.z);
}

void write_loss_trace_csv(const std::string& path, const std::vector<StepLosses>& trace) {
  csv::Writer w(path, {"epoch", "l1", "l2", "l3"});
  for (std::size_t e = 0; e < trace.size(); ++e) {
    w.row({std::to_string(e), csv::format_double(trace[e].l1), csv::format_double(trace[e].l2),
           csv::format_double(trace[e].l3)});
  }
}

}  // namespace speedhist::argcn
