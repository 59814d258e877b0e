#include <charconv>
#include <fstream>

#include "speedhist/csv.hpp"
#include "speedhist/errors.hpp"
#include "speedhist/harness.hpp"

namespace speedhist::harness {

namespace {
std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ArgumentError("setting '" + key + "': bad value '" + value + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& field : csv::split(value, ',')) out.push_back(parse_number<int>(key, trim(field)));
  return out;
}
}  // namespace

ModelKind parse_model(const std::string& name) {
  if (name == "full-gcn") return ModelKind::kFullGcn;
  if (name == "gcn-no-adv") return ModelKind::kGcnNoAdv;
  if (name == "n2v-base") return ModelKind::kN2vBase;
  if (name == "n2v-feature-graph") return ModelKind::kN2vFeatureGraph;
  if (name == "n2v-features" || name == "n2v-sequence") return ModelKind::kN2vSequence;
  if (name == "naive-1") return ModelKind::kNaive1;
  if (name == "naive-2") return ModelKind::kNaive2;
  throw ArgumentError("unknown model '" + name +
                      "' (expected full-gcn, gcn-no-adv, n2v-base, n2v-feature-graph, n2v-features, naive-1, "
                      "naive-2)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFullGcn:
      return "full-gcn";
    case ModelKind::kGcnNoAdv:
      return "gcn-no-adv";
    case ModelKind::kN2vBase:
      return "n2v-base";
    case ModelKind::kN2vFeatureGraph:
      return "n2v-feature-graph";
    case ModelKind::kN2vSequence:
      return "n2v-features";
    case ModelKind::kNaive1:
      return "naive-1";
    case ModelKind::kNaive2:
      return "naive-2";
  }
  return "full-gcn";
}

void ExperimentConfig::validate() const {
  if (clusters < 1) throw ArgumentError("clusters must be at least 1");
  if (batches < 1 || batches > clusters) throw ArgumentError("batches must lie in [1, clusters]");
  if (clusters % batches != 0) throw ArgumentError("clusters must be a multiple of batches");
  if (repetitions < 1) throw ArgumentError("repetitions must be at least 1");
  if (epochs < 0) throw ArgumentError("epochs must be non-negative");
  if (parallel < 1) throw ArgumentError("parallel must be at least 1");
  if (imbalance < 0.0) throw ArgumentError("imbalance must be non-negative");
  if (dropout && (*dropout < 0.0 || *dropout >= 1.0)) throw ArgumentError("dropout must lie in [0, 1)");
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto as_int = [&] { return parse_number<int>(key, value); };
  auto as_double = [&] { return parse_number<double>(key, value); };
  if (key == "model") {
    c.model = parse_model(value);
  } else if (key == "clusters") {
    c.clusters = as_int();
  } else if (key == "batches") {
    c.batches = as_int();
  } else if (key == "repetitions") {
    c.repetitions = as_int();
  } else if (key == "epochs") {
    c.epochs = as_int();
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "parallel") {
    c.parallel = as_int();
  } else if (key == "imbalance") {
    c.imbalance = as_double();
  } else if (key == "gcn_lr") {
    c.gcn_learning_rate = as_double();
  } else if (key == "discriminator_lr") {
    c.discriminator_learning_rate = as_double();
  } else if (key == "encoder_hidden") {
    c.encoder_hidden = as_int();
  } else if (key == "embedding_dim") {
    c.embedding_dim = as_int();
  } else if (key == "decoder_hidden") {
    c.decoder_hidden = parse_int_list(key, value);
  } else if (key == "dropout") {
    c.dropout = as_double();
  } else if (key == "walk_length") {
    c.embed.walks.walk_length = as_int();
  } else if (key == "walks_per_node") {
    c.embed.walks.walks_per_node = as_int();
  } else if (key == "p") {
    c.embed.walks.p = as_double();
  } else if (key == "q") {
    c.embed.walks.q = as_double();
  } else if (key == "topology_dims") {
    c.embed.topology.dims = as_int();
  } else if (key == "feature_dims") {
    c.embed.feature.dims = as_int();
  } else if (key == "window") {
    c.embed.topology.window = c.embed.feature.window = as_int();
  } else if (key == "negatives") {
    c.embed.topology.negatives = c.embed.feature.negatives = as_int();
  } else if (key == "w2v_epochs") {
    c.embed.topology.epochs = c.embed.feature.epochs = as_int();
  } else if (key == "head_epochs") {
    c.head.epochs = as_int();
  } else if (key == "head_lr") {
    c.head.learning_rate = as_double();
  } else if (key == "artifact_dir") {
    c.artifact_dir = value;
  } else {
    throw ArgumentError("unknown setting '" + key + "'");
  }
}

ExperimentConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, "cannot open file");
  ExperimentConfig c;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw LoadError(path, "line " + std::to_string(number) + ": expected key = value");
    try {
      apply_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ArgumentError& e) {
      throw LoadError(path, "line " + std::to_string(number) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

}  // namespace speedhist::harness
