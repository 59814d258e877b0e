#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "speedhist/graph.hpp"
#include "speedhist/nn.hpp"

// Adversarially regularized graph convolutional model: a two-layer GCN
// encoder with Gaussian noise between the layers, an MLP decoder, and an MLP
// discriminator that pushes the embeddings towards N(0, 1).
namespace speedhist::argcn {

enum class TaskMode { kRegression, kClassification };

struct ArgcnConfig {
  TaskMode mode = TaskMode::kRegression;
  int input_dim = 0;
  int encoder_hidden = 32;
  int embedding_dim = 16;
  std::vector<int> decoder_hidden{256, 256};
  int output_dim = graph::kDefaultBuckets;
  std::vector<int> discriminator_hidden{64, 32};
  double decoder_dropout = 0.3;
  double discriminator_dropout = 0.3;
  double noise_stddev = 0.1;
  double gcn_learning_rate = 1e-3;
  double discriminator_learning_rate = 1e-4;
  // Learning rate of the encoder update driven by the discriminator.
  double generator_learning_rate = 1e-3;
  bool adversarial = true;
  nn::Activation encoder_output_activation = nn::Activation::kLinear;

  /// Road-histogram settings (16-d embedding, 256-256 decoder, 30% dropout).
  static ArgcnConfig road(int input_dim, int buckets = graph::kDefaultBuckets);
  /// Citation-classification settings (32-d embedding, 16-16 decoder, 20%/50% dropout).
  static ArgcnConfig classification(int input_dim, int classes);

  [[nodiscard]] std::string to_json() const;
  static ArgcnConfig from_json(const std::string& text);
};

/// Inputs of one full-batch training problem.
struct TrainingData {
  SparseMatrix features;   // N x F
  SparseMatrix adjacency;  // normalized, N x N
  Matrix targets;          // N x output (histograms or one-hot rows)
  std::vector<char> mask;  // rows that contribute to the task loss

  static TrainingData from_graph(const graph::LineGraph& g, Matrix targets, std::vector<char> mask);
  [[nodiscard]] std::size_t labeled_count() const;
};

struct EncoderTrace {
  Matrix projected0;  // X W0
  Matrix pre0;        // A X W0
  Matrix hidden;      // relu(pre0)
  Matrix noisy;       // hidden + noise
  Matrix projected1;  // noisy W1
  Matrix pre1;        // A noisy W1
  Matrix z;           // output activation of pre1
};

class ArgcnModel {
 public:
  ArgcnModel() = default;
  ArgcnModel(const ArgcnConfig& config, std::uint64_t seed);

  [[nodiscard]] const ArgcnConfig& config() const { return config_; }

  [[nodiscard]] EncoderTrace encode_trace(const SparseMatrix& x, const SparseMatrix& a, bool training,
                                          Rng& rng) const;
  /// Accumulates encoder weight gradients for upstream gradient dz.
  void encoder_backward(const SparseMatrix& x, const SparseMatrix& a, const EncoderTrace& trace, const Matrix& dz);

  nn::Parameter& encoder_weight(int layer) { return layer == 0 ? w0_ : w1_; }
  [[nodiscard]] const nn::Parameter& encoder_weight(int layer) const { return layer == 0 ? w0_ : w1_; }
  nn::Mlp& decoder() { return decoder_; }
  [[nodiscard]] const nn::Mlp& decoder() const { return decoder_; }
  nn::Mlp& discriminator() { return discriminator_; }
  [[nodiscard]] const nn::Mlp& discriminator() const { return discriminator_; }

  std::vector<nn::Parameter*> encoder_parameters();
  std::vector<nn::Parameter*> decoder_parameters();
  std::vector<nn::Parameter*> discriminator_parameters();

  // Optimizer state for each update group.
  nn::AdamState& supervised_optimizer() { return adam_supervised_; }
  nn::AdamState& discriminator_optimizer() { return adam_discriminator_; }
  nn::AdamState& generator_optimizer() { return adam_generator_; }

  [[nodiscard]] std::vector<nn::NamedTensor> tensors() const;
  void save(const std::string& path) const;
  static ArgcnModel load(const std::string& path);

 private:
  ArgcnConfig config_;
  nn::Parameter w0_;
  nn::Parameter w1_;
  nn::Mlp decoder_;
  nn::Mlp discriminator_;
  nn::AdamState adam_supervised_;
  nn::AdamState adam_discriminator_;
  nn::AdamState adam_generator_;
};

// --- forward passes -----------------------------------------------------------

Matrix encode(const ArgcnModel& model, const SparseMatrix& x, const SparseMatrix& a, bool training,
              std::uint64_t seed);
Matrix decode(const ArgcnModel& model, const Matrix& z, bool training, std::uint64_t seed);

struct Discrimination {
  Matrix scores;  // sigmoid(logits), N x 1
  Matrix logits;
};
/// Inference-mode discriminator.
Discrimination discriminate(const ArgcnModel& model, const Matrix& input);

// --- losses -------------------------------------------------------------------

struct LossValue {
  double value = 0.0;
  Matrix grad;  // gradient w.r.t. the first argument
};

/// Mean over masked rows of 1 - sum_i min(S_i, T_i). An empty mask selects all rows.
LossValue intersection_loss(const Matrix& predicted, const Matrix& target, const std::vector<char>& mask = {});
/// Mean over masked rows of -log max(p_true, 1e-12).
LossValue cross_entropy_loss(const Matrix& predicted, const Matrix& one_hot, const std::vector<char>& mask = {});
/// Mean of max(x, 0) - x z + log(1 + exp(-|x|)) for a constant target z.
LossValue bce_logits(const Matrix& logits, double target);

// --- training -----------------------------------------------------------------

struct StepLosses {
  double l1 = 0.0;
  double l2_real = 0.0;
  double l2_fake = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
};

// Random streams of one optimization step, each derived from the step seed.
enum class Stream : std::uint64_t {
  kEncoderSupervised = 1,
  kDecoder = 2,
  kPrior = 3,
  kDiscriminatorReal = 4,
  kDiscriminatorFake = 5,
  kEncoderGenerator = 6,
  kDiscriminatorGenerator = 7,
};
std::uint64_t stream_seed(std::uint64_t step_seed, Stream stream);

/// Zeroes encoder and decoder gradients, then fills them with dL1. Returns L1.
/// When `z_out` is given it receives the embedding used.
double supervised_pass(ArgcnModel& model, const TrainingData& data, std::uint64_t step_seed, Matrix* z_out = nullptr);
/// Zeroes discriminator gradients, then fills them with dL2 for prior sample
/// vs constant embedding `z`.
StepLosses discriminator_pass(ArgcnModel& model, const Matrix& z, std::uint64_t step_seed);
/// Zeroes encoder gradients, then fills them with dL3; the discriminator is
/// held constant. Returns L3.
double generator_pass(ArgcnModel& model, const TrainingData& data, std::uint64_t step_seed);

using PhaseObserver = std::function<void(int phase, const ArgcnModel& model)>;

/// One step: (1) update encoder+decoder on L1, (2) update the discriminator on
/// L2, (3) update the encoder on L3. Phases 2 and 3 run only when the model
/// is adversarial. `observer` is called after each executed phase.
StepLosses optimization_step(ArgcnModel& model, const TrainingData& data, std::uint64_t step_seed,
                             const PhaseObserver& observer = {});

struct TrainConfig {
  ArgcnConfig model;
  int epochs = 2000;
  std::uint64_t seed = 0;
};

struct TrainResult {
  ArgcnModel model;
  std::vector<StepLosses> trace;
};

/// Initializes a model from derive_seed(seed, init) and runs `epochs`
/// full-batch optimization steps; step e uses derive_seed(seed, {step, e}).
/// Throws ConfigurationError when the mask selects no row.
TrainResult train(const TrainingData& data, const TrainConfig& config);

inline constexpr std::uint64_t kInitStream = 0x1417;
inline constexpr std::uint64_t kStepStream = 0x57e9;

/// Inference: decode(encode(x, a)) without noise or dropout.
Matrix predict(const ArgcnModel& model, const SparseMatrix& x, const SparseMatrix& a);

void write_loss_trace_csv(const std::string& path, const std::vector<StepLosses>& trace);

}  // namespace speedhist::argcn
