#include "json.hpp"

#include "speedhist/argcn.hpp"
#include "speedhist/errors.hpp"

namespace speedhist::argcn {

using nlohmann::json;

namespace {
const char* activation_name(nn::Activation a) {
  switch (a) {
    case nn::Activation::kLinear:
      return "linear";
    case nn::Activation::kRelu:
      return "relu";
    case nn::Activation::kSigmoid:
      return "sigmoid";
    case nn::Activation::kSoftmax:
      return "softmax";
  }
  return "linear";
}

nn::Activation activation_from(const std::string& name) {
  if (name == "linear") return nn::Activation::kLinear;
  if (name == "relu") return nn::Activation::kRelu;
  if (name == "sigmoid") return nn::Activation::kSigmoid;
  if (name == "softmax") return nn::Activation::kSoftmax;
  throw ArgumentError("unknown activation '" + name + "'");
}
}  // namespace

ArgcnConfig ArgcnConfig::road(int input_dim, int buckets) {
  ArgcnConfig c;
  c.mode = TaskMode::kRegression;
  c.input_dim = input_dim;
  c.output_dim = buckets;
  return c;
}

ArgcnConfig ArgcnConfig::classification(int input_dim, int classes) {
  ArgcnConfig c;
  c.mode = TaskMode::kClassification;
  c.input_dim = input_dim;
  c.embedding_dim = 32;
  c.decoder_hidden = {16, 16};
  c.output_dim = classes;
  c.decoder_dropout = 0.2;
  c.discriminator_dropout = 0.5;
  c.gcn_learning_rate = 1e-4;
  c.discriminator_learning_rate = 1e-5;
  c.generator_learning_rate = 1e-4;
  return c;
}

std::string ArgcnConfig::to_json() const {
  json j;
  j["mode"] = mode == TaskMode::kRegression ? "regression" : "classification";
  j["input_dim"] = input_dim;
  j["encoder_hidden"] = encoder_hidden;
  j["embedding_dim"] = embedding_dim;
  j["decoder_hidden"] = decoder_hidden;
  j["output_dim"] = output_dim;
  j["discriminator_hidden"] = discriminator_hidden;
  j["decoder_dropout"] = decoder_dropout;
  j["discriminator_dropout"] = discriminator_dropout;
  j["noise_stddev"] = noise_stddev;
  j["gcn_learning_rate"] = gcn_learning_rate;
  j["discriminator_learning_rate"] = discriminator_learning_rate;
  j["generator_learning_rate"] = generator_learning_rate;
  j["adversarial"] = adversarial;
  j["encoder_output_activation"] = activation_name(encoder_output_activation);
  return j.dump();
}

ArgcnConfig ArgcnConfig::from_json(const std::string& text) {
  ArgcnConfig c;
  try {
    const auto j = json::parse(text);
    c.mode = j.at("mode") == "regression" ? TaskMode::kRegression : TaskMode::kClassification;
    c.input_dim = j.at("input_dim");
    c.encoder_hidden = j.at("encoder_hidden");
    c.embedding_dim = j.at("embedding_dim");
    c.decoder_hidden = j.at("decoder_hidden").get<std::vector<int>>();
    c.output_dim = j.at("output_dim");
    c.discriminator_hidden = j.at("discriminator_hidden").get<std::vector<int>>();
    c.decoder_dropout = j.at("decoder_dropout");
    c.discriminator_dropout = j.at("discriminator_dropout");
    c.noise_stddev = j.at("noise_stddev");
    c.gcn_learning_rate = j.at("gcn_learning_rate");
    c.discriminator_learning_rate = j.at("discriminator_learning_rate");
    c.generator_learning_rate = j.at("generator_learning_rate");
    c.adversarial = j.at("adversarial");
    c.encoder_output_activation = activation_from(j.at("encoder_output_activation"));
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("bad model config: ") + e.what());
  }
  return c;
}

TrainingData TrainingData::from_graph(const graph::LineGraph& g, Matrix targets, std::vector<char> mask) {
  if (static_cast<std::size_t>(targets.rows()) != g.num_nodes() || mask.size() != g.num_nodes()) {
    throw ArgumentError("targets/mask do not match graph size");
  }
  TrainingData d;
  d.features = g.features().sparseView();
  d.adjacency = graph::normalize_adjacency(g, true);
  d.targets = std::move(targets);
  d.mask = std::move(mask);
  return d;
}

std::size_t TrainingData::labeled_count() const {
  std::size_t n = 0;
  for (char m : mask) n += m ? 1 : 0;
  return n;
}

ArgcnModel::ArgcnModel(const ArgcnConfig& config, std::uint64_t seed) : config_(config) {
  if (config.input_dim < 1 || config.embedding_dim < 1 || config.output_dim < 1) {
    throw ArgumentError("model dimensions must be positive");
  }
  Rng rng(seed);
  w0_ = nn::Parameter(nn::glorot_uniform(config.input_dim, config.encoder_hidden, rng));
  w1_ = nn::Parameter(nn::glorot_uniform(config.encoder_hidden, config.embedding_dim, rng));
  decoder_ = nn::Mlp({config.embedding_dim, config.decoder_hidden, config.output_dim, nn::Activation::kSoftmax,
                      config.decoder_dropout, false},
                     rng);
  discriminator_ = nn::Mlp({config.embedding_dim, config.discriminator_hidden, 1, nn::Activation::kLinear,
                            config.discriminator_dropout, false},
                           rng);
  adam_supervised_.learning_rate = config.gcn_learning_rate;
  adam_discriminator_.learning_rate = config.discriminator_learning_rate;
  adam_generator_.learning_rate = config.generator_learning_rate;
}

EncoderTrace ArgcnModel::encode_trace(const SparseMatrix& x, const SparseMatrix& a, bool training, Rng& rng) const {
  if (x.cols() != w0_.value.rows()) {
    throw ArgumentError("encoder: feature width " + std::to_string(x.cols()) + " != " +
                        std::to_string(w0_.value.rows()));
  }
  if (a.rows() != x.rows() || a.cols() != x.rows()) throw ArgumentError("encoder: adjacency does not match features");
  EncoderTrace t;
  t.projected0 = x * w0_.value;
  t.pre0 = nn::sparse_dense_matmul(a, t.projected0);
  t.hidden = nn::relu(t.pre0);
  t.noisy = nn::gaussian_noise(t.hidden, config_.noise_stddev, training, rng);
  t.projected1 = nn::matmul(t.noisy, w1_.value);
  t.pre1 = nn::sparse_dense_matmul(a, t.projected1);
  t.z = nn::activate(config_.encoder_output_activation, t.pre1);
  return t;
}

void ArgcnModel::encoder_backward(const SparseMatrix& x, const SparseMatrix& a, const EncoderTrace& t,
                                  const Matrix& dz) {
  const Matrix dpre1 = nn::activate_backward(config_.encoder_output_activation, t.pre1, t.z, dz);
  const Matrix dproj1 = nn::sparse_dense_matmul_backward_dense(a, dpre1);
  auto g1 = nn::matmul_backward(t.noisy, w1_.value, dproj1);
  w1_.grad += g1.db;
  const Matrix dpre0 = nn::relu_backward(t.pre0, g1.da);
  const Matrix dproj0 = nn::sparse_dense_matmul_backward_dense(a, dpre0);
  w0_.grad += x.transpose() * dproj0;
}

std::vector<nn::Parameter*> ArgcnModel::encoder_parameters() { return {&w0_, &w1_}; }
std::vector<nn::Parameter*> ArgcnModel::decoder_parameters() { return decoder_.parameters(); }
std::vector<nn::Parameter*> ArgcnModel::discriminator_parameters() { return discriminator_.parameters(); }

std::vector<nn::NamedTensor> ArgcnModel::tensors() const {
  std::vector<nn::NamedTensor> out{{"encoder/w0", w0_.value}, {"encoder/w1", w1_.value}};
  auto add = [&](const std::string& prefix, const nn::Mlp& mlp) {
    const auto params = mlp.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      out.push_back({prefix + (i % 2 == 0 ? "/w" : "/b") + std::to_string(i / 2), params[i]->value});
    }
  };
  add("decoder", decoder_);
  add("discriminator", discriminator_);
  return out;
}

void ArgcnModel::save(const std::string& path) const { nn::save_checkpoint(path, tensors(), config_.to_json()); }

ArgcnModel ArgcnModel::load(const std::string& path) {
  const auto ck = nn::load_checkpoint(path);
  ArgcnModel m(ArgcnConfig::from_json(ck.meta_json), 0);
  auto assign = [&](nn::Parameter& p, const std::string& name) {
    const auto& v = ck.at(name);
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      throw LoadError(path, "tensor '" + name + "' has the wrong shape");
    }
    p.value = v;
  };
  assign(m.w0_, "encoder/w0");
  assign(m.w1_, "encoder/w1");
  auto load_mlp = [&](const std::string& prefix, nn::Mlp& mlp) {
    const auto params = mlp.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      assign(*params[i], prefix + (i % 2 == 0 ? "/w" : "/b") + std::to_string(i / 2));
    }
  };
  load_mlp("decoder", m.decoder_);
  load_mlp("discriminator", m.discriminator_);
  return m;
}

}  // namespace speedhist::argcn
