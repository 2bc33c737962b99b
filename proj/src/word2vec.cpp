#include "tunisent/word2vec.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tunisent/errors.hpp"
#include "tunisent/rng.hpp"
#include "tunisent/textproc.hpp"

namespace tunisent {

namespace {

void validate(const Word2vecParams& p) {
  if (p.dim < 1) throw InvalidHyperparameter("word2vec dim must be >= 1");
  if (p.window < 1) throw InvalidHyperparameter("window must be >= 1");
  if (p.epochs < 1) throw InvalidHyperparameter("epochs must be >= 1");
  if (p.min_count < 1) throw InvalidHyperparameter("min_count must be >= 1");
  if (p.negative < 0) throw InvalidHyperparameter("negative must be >= 0");
  if (!(p.learning_rate > 0.0)) {
    throw InvalidHyperparameter("learning rate must be > 0");
  }
}

double sigmoid(double x) {
  if (x > 30.0) return 1.0;
  if (x < -30.0) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

// Cumulative unigram^0.75 table; sampled by binary search.
class NegativeSampler {
 public:
  NegativeSampler(const std::vector<std::int64_t>& freqs, std::int32_t first) {
    cumulative_.reserve(freqs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      acc += std::pow(static_cast<double>(freqs[i]), 0.75);
      cumulative_.push_back(acc);
    }
    first_ = first;
  }

  std::int32_t sample(std::mt19937_64& rng) const {
    const double u = uniform_unit(rng) * cumulative_.back();
    const auto it =
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto k = static_cast<std::int32_t>(
        std::min<std::size_t>(it - cumulative_.begin(),
                              cumulative_.size() - 1));
    return first_ + k;
  }

 private:
  std::vector<double> cumulative_;
  std::int32_t first_;
};

}  // namespace

Word2vecResult train_word2vec(
    const std::vector<std::vector<std::string>>& sentences,
    const Word2vecParams& params) {
  validate(params);

  // Frequency-sorted vocabulary, ties broken by first occurrence.
  std::unordered_map<std::string, std::int64_t> freq;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::size_t running = 0;
  for (const auto& sent : sentences) {
    for (const auto& tok : sent) {
      if (freq[tok]++ == 0) first_seen[tok] = running;
      ++running;
    }
  }
  if (freq.empty()) throw EmptyCorpus("word2vec corpus has no tokens");

  std::vector<std::pair<std::string, std::int64_t>> order;
  for (auto& [tok, n] : freq) {
    if (n >= params.min_count) order.emplace_back(tok, n);
  }
  if (order.empty()) {
    throw EmptyCorpus("no token reaches min_count=" +
                      std::to_string(params.min_count));
  }
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return first_seen[a.first] < first_seen[b.first];
  });

  Vocabulary vocab;
  std::vector<std::int64_t> kept_freqs;
  for (const auto& [tok, n] : order) {
    vocab.add(tok);
    kept_freqs.push_back(n);
  }
  const std::int32_t vocab_size = vocab.size();
  const std::int32_t first_word = 2;  // rows 0/1 are PAD/UNK

  // Sub-min_count tokens drop out of the id sequences entirely.
  std::vector<std::vector<std::int32_t>> ids;
  ids.reserve(sentences.size());
  std::int64_t corpus_words = 0;
  for (const auto& sent : sentences) {
    std::vector<std::int32_t> row;
    row.reserve(sent.size());
    for (const auto& tok : sent) {
      if (vocab.contains(tok)) row.push_back(vocab.lookup(tok));
    }
    corpus_words += static_cast<std::int64_t>(row.size());
    if (!row.empty()) ids.push_back(std::move(row));
  }
  if (corpus_words == 0) throw EmptyCorpus("word2vec corpus has no tokens");

  std::mt19937_64 rng(params.seed);
  const int dim = params.dim;
  EmbeddingMatrix matrix;
  matrix.rows = Eigen::MatrixXd::Zero(vocab_size, dim);
  Eigen::MatrixXd out_vectors = Eigen::MatrixXd::Zero(vocab_size, dim);
  for (std::int32_t w = first_word; w < vocab_size; ++w) {
    for (int d = 0; d < dim; ++d) {
      matrix.rows(w, d) = uniform_range(rng, -0.5, 0.5) / dim;
    }
  }

  NegativeSampler sampler(kept_freqs, first_word);
  const double total =
      static_cast<double>(corpus_words) * params.epochs + 1.0;
  std::int64_t processed = 0;

  Eigen::VectorXd accum(dim), hidden(dim);
  const auto train_pair = [&](std::int32_t input_row, std::int32_t target,
                              const Eigen::VectorXd& input_vec, double alpha,
                              Eigen::VectorXd& grad_in) {
    for (int d = 0; d <= params.negative; ++d) {
      std::int32_t out_row;
      double label;
      if (d == 0) {
        out_row = target;
        label = 1.0;
      } else {
        out_row = sampler.sample(rng);
        for (int tries = 0; out_row == target && tries < 8; ++tries) {
          out_row = sampler.sample(rng);
        }
        if (out_row == target) continue;
        label = 0.0;
      }
      const double score = input_vec.dot(out_vectors.row(out_row));
      const double g = (label - sigmoid(score)) * alpha;
      grad_in += g * out_vectors.row(out_row).transpose();
      out_vectors.row(out_row) += g * input_vec.transpose();
    }
    (void)input_row;
  };

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (const auto& sent : ids) {
      const int n = static_cast<int>(sent.size());
      for (int pos = 0; pos < n; ++pos) {
        const double alpha =
            params.learning_rate *
            std::max(1.0 - static_cast<double>(processed) / total, 1e-4);
        ++processed;
        const int reach =
            1 + static_cast<int>(bounded_rand(rng, params.window));
        if (params.algorithm == Word2vecAlgorithm::SkipGram) {
          for (int off = -reach; off <= reach; ++off) {
            const int ctx = pos + off;
            if (off == 0 || ctx < 0 || ctx >= n) continue;
            hidden = matrix.rows.row(sent[pos]);
            accum.setZero();
            train_pair(sent[pos], sent[ctx], hidden, alpha, accum);
            matrix.rows.row(sent[pos]) += accum.transpose();
          }
        } else {  // CBOW: average of context predicts the center word
          hidden.setZero();
          int n_ctx = 0;
          for (int off = -reach; off <= reach; ++off) {
            const int ctx = pos + off;
            if (off == 0 || ctx < 0 || ctx >= n) continue;
            hidden += matrix.rows.row(sent[ctx]).transpose();
            ++n_ctx;
          }
          if (n_ctx == 0) continue;
          hidden /= n_ctx;
          accum.setZero();
          train_pair(-1, sent[pos], hidden, alpha, accum);
          for (int off = -reach; off <= reach; ++off) {
            const int ctx = pos + off;
            if (off == 0 || ctx < 0 || ctx >= n) continue;
            matrix.rows.row(sent[ctx]) += accum.transpose();
          }
        }
      }
    }
  }

  if (vocab_size > first_word) {
    matrix.rows.row(Vocabulary::kUnk) =
        matrix.rows.bottomRows(vocab_size - first_word).colwise().mean();
  }
  return {std::move(vocab), std::move(matrix)};
}

Word2vecResult train_word2vec(const LabeledDataset& corpus,
                              const Word2vecParams& params) {
  const bool any_train = std::any_of(
      corpus.split.begin(), corpus.split.end(),
      [](SplitTag t) { return t == SplitTag::Train; });
  std::vector<std::vector<std::string>> sentences;
  if (any_train) {
    for (std::size_t i : corpus.train_indices()) {
      sentences.push_back(token_surfaces(corpus.comments[i].text));
    }
  } else {
    // No train tags yet: fit on everything except comments already marked
    // as held-out Test data.
    for (std::size_t i = 0; i < corpus.comments.size(); ++i) {
      if (i < corpus.split.size() && corpus.split[i] == SplitTag::Test) {
        continue;
      }
      sentences.push_back(token_surfaces(corpus.comments[i].text));
    }
  }
  if (sentences.empty()) throw EmptyCorpus("dataset has no training comments");
  return train_word2vec(sentences, params);
}

double cosine_similarity(const EmbeddingMatrix& matrix, std::int32_t a,
                         std::int32_t b) {
  const Eigen::VectorXd va = matrix.rows.row(a);
  const Eigen::VectorXd vb = matrix.rows.row(b);
  const double na = va.norm(), nb = vb.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return va.dot(vb) / (na * nb);
}

}  // namespace tunisent
