#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tunisent/corpus.hpp"
#include "tunisent/embedding.hpp"

namespace tunisent {

enum class Word2vecAlgorithm { SkipGram, Cbow };

struct Word2vecParams {
  int dim = 300;
  int window = 5;
  int epochs = 5;
  Word2vecAlgorithm algorithm = Word2vecAlgorithm::SkipGram;
  int min_count = 1;
  int negative = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 42;
};

struct Word2vecResult {
  Vocabulary vocab;
  EmbeddingMatrix matrix;
};

// Single-threaded negative-sampling trainer; bitwise reproducible for a
// fixed (corpus, params, seed) within one build. Vocabulary order is by
// descending frequency, ties by first occurrence. The UNK row is the mean
// of all trained rows; PAD stays zero.
Word2vecResult train_word2vec(
    const std::vector<std::vector<std::string>>& sentences,
    const Word2vecParams& params = {});

// Trains on the Train split when the dataset has one, otherwise on every
// comment. Sentences are tokenized with textproc::tokenize.
Word2vecResult train_word2vec(const LabeledDataset& corpus,
                              const Word2vecParams& params = {});

double cosine_similarity(const EmbeddingMatrix& matrix, std::int32_t a,
                         std::int32_t b);

}  // namespace tunisent
