#include <algorithm>
#include <cmath>

#include "speedhist/errors.hpp"
#include "speedhist/n2v.hpp"
#include "speedhist/rng.hpp"

namespace speedhist::n2v {

bool Embedding::contains(Token t) const { return std::binary_search(vocabulary.begin(), vocabulary.end(), t); }

int Embedding::index_of(Token t) const {
  const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), t);
  if (it == vocabulary.end() || *it != t) throw StructuralError("token " + std::to_string(t) + " not in vocabulary");
  return static_cast<int>(it - vocabulary.begin());
}

Matrix Embedding::lookup(const std::vector<Token>& tokens) const {
  Matrix out(static_cast<Eigen::Index>(tokens.size()), vectors.cols());
  for (std::size_t i = 0; i < tokens.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = vectors.row(index_of(tokens[i]));
  return out;
}

namespace {
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Embedding skipgram_embed(const WalkCorpus& corpus, const SkipGramOptions& options, std::uint64_t seed) {
  if (options.dims < 1 || options.window < 1 || options.negatives < 0 || options.epochs < 0) {
    throw ArgumentError("skipgram_embed: invalid options");
  }
  Embedding emb;
  std::size_t total_tokens = 0;
  for (const auto& s : corpus.sequences) {
    emb.vocabulary.insert(emb.vocabulary.end(), s.begin(), s.end());
    total_tokens += s.size();
  }
  if (total_tokens == 0) throw ArgumentError("skipgram_embed: empty corpus");
  std::sort(emb.vocabulary.begin(), emb.vocabulary.end());
  emb.vocabulary.erase(std::unique(emb.vocabulary.begin(), emb.vocabulary.end()), emb.vocabulary.end());
  const auto vocab = static_cast<Eigen::Index>(emb.vocabulary.size());

  // Corpus as vocabulary indices.
  std::vector<std::vector<int>> seqs;
  seqs.reserve(corpus.sequences.size());
  std::vector<double> counts(emb.vocabulary.size(), 0.0);
  for (const auto& s : corpus.sequences) {
    auto& out = seqs.emplace_back();
    out.reserve(s.size());
    for (Token t : s) {
      const int i = emb.index_of(t);
      out.push_back(i);
      counts[static_cast<std::size_t>(i)] += 1.0;
    }
  }
  // Negative-sampling table: token i fills a share of slots proportional to
  // count_i^0.75.
  constexpr int kTableBits = 20;
  std::vector<int> table(std::size_t{1} << kTableBits);
  {
    double norm = 0.0;
    for (double c : counts) norm += std::pow(c, 0.75);
    std::size_t word = 0;
    double cumulative = std::pow(counts[0], 0.75) / norm;
    for (std::size_t slot = 0; slot < table.size(); ++slot) {
      table[slot] = static_cast<int>(word);
      if (static_cast<double>(slot + 1) / static_cast<double>(table.size()) > cumulative && word + 1 < counts.size()) {
        ++word;
        cumulative += std::pow(counts[word], 0.75) / norm;
      }
    }
  }

  Rng rng(seed);
  const auto dims = static_cast<std::size_t>(options.dims);
  const float half = 0.5F / static_cast<float>(options.dims);
  std::vector<float> in(static_cast<std::size_t>(vocab) * dims);
  std::uniform_real_distribution<float> init(-half, half);
  for (auto& v : in) v = init(rng);
  std::vector<float> out(in.size(), 0.0F);
  std::vector<float> update(dims);

  std::uniform_int_distribution<int> shrink(0, options.window - 1);
  auto draw_negative = [&] { return table[rng() >> (64 - kTableBits)]; };

  const double planned = static_cast<double>(total_tokens) * options.epochs;
  double processed = 0.0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (const auto& s : seqs) {
      const auto len = static_cast<int>(s.size());
      for (int pos = 0; pos < len; ++pos) {
        const double lr_now = std::max(options.min_learning_rate,
                                       options.learning_rate - (options.learning_rate - options.min_learning_rate) *
                                                                   processed / planned);
        const auto lr = static_cast<float>(lr_now);
        processed += 1.0;
        const int center = s[static_cast<std::size_t>(pos)];
        const int reach = options.window - shrink(rng);
        for (int c = std::max(0, pos - reach); c <= std::min(len - 1, pos + reach); ++c) {
          if (c == pos) continue;
          const auto dim = static_cast<Eigen::Index>(dims);
          Eigen::Map<Eigen::VectorXf> ctx(in.data() + static_cast<std::size_t>(s[static_cast<std::size_t>(c)]) * dims, dim);
          Eigen::Map<Eigen::VectorXf> upd(update.data(), dim);
          upd.setZero();
          for (int d = 0; d <= options.negatives; ++d) {
            int target = center;
            float label = 1.0F;
            if (d > 0) {
              target = draw_negative();
              if (target == center) continue;
              label = 0.0F;
            }
            Eigen::Map<Eigen::VectorXf> tgt(out.data() + static_cast<std::size_t>(target) * dims, dim);
            const float g = (label - static_cast<float>(sigmoid(ctx.dot(tgt)))) * lr;
            upd.noalias() += g * tgt;
            tgt.noalias() += g * ctx;
          }
          ctx += upd;
        }
      }
    }
  }
  emb.vectors.resize(vocab, options.dims);
  for (std::size_t k = 0; k < in.size(); ++k) emb.vectors.data()[k] = in[k];
  return emb;
}

}  // namespace speedhist::n2v
