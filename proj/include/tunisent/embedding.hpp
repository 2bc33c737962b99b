#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace tunisent {

// Token -> dense index map. Index 0 is PAD, index 1 is UNK; every
// out-of-vocabulary token resolves to UNK at lookup time.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  std::int32_t add(std::string_view token);
  std::int32_t lookup(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }
  const std::string& token(std::int32_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // One token per line; the line number is the index.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// Dense vectors, one row per vocabulary index. The PAD row is always zero.
struct EmbeddingMatrix {
  Eigen::MatrixXd rows;  // (|vocab|, dim)

  int dim() const { return static_cast<int>(rows.cols()); }
  std::int64_t count() const { return rows.rows(); }
  bool all_finite() const { return rows.allFinite(); }
};

// A fixed-length encoded sequence. Only the real (unmasked) rows are stored
// in `vectors`; padded positions carry the PAD index and an implicit zero
// vector.
struct SequenceEncoding {
  int max_len = 0;
  int n_real = 0;                 // mask true-count
  std::vector<std::int32_t> indices;  // size max_len, right-padded
  Eigen::MatrixXf vectors;        // (n_real, dim); (0,0) when not materialized

  int dim() const { return static_cast<int>(vectors.cols()); }
  bool mask(int t) const { return t >= 0 && t < n_real; }
  // Padded view with explicit zero rows, for callers that want the full
  // (max_len, dim) shape.
  Eigen::MatrixXf padded() const;
};

// In-vocab tokens map to their rows, OOV tokens to the UNK row; sequences
// truncate at max_len.
SequenceEncoding encode_static(const std::vector<std::string>& tokens,
                               const Vocabulary& vocab,
                               const EmbeddingMatrix& matrix, int max_len);

// Directory layout: vocab.txt + vectors.bin (row-major float32 LE) +
// meta.json (dim, count plus whatever extras the producer recorded).
void save_embedding(const Vocabulary& vocab, const EmbeddingMatrix& matrix,
                    const std::string& dir,
                    const std::string& extra_meta_json = "{}");
std::pair<Vocabulary, EmbeddingMatrix> load_embedding(const std::string& dir);

enum class VectorFileFormat { Auto, Text, Binary };

// Loads word vectors in the standard text format (header "count dim", then
// one "token v1..vdim" row per entry) or its binary sibling. PAD and UNK
// rows are prepended; UNK is the mean of the loaded rows.
std::pair<Vocabulary, EmbeddingMatrix> load_pretrained(
    const std::string& path, VectorFileFormat format = VectorFileFormat::Auto);

// Writers for the same two formats (test fixtures, interchange).
void save_word_vectors_text(const Vocabulary& vocab,
                            const EmbeddingMatrix& matrix,
                            const std::string& path);
void save_word_vectors_binary(const Vocabulary& vocab,
                              const EmbeddingMatrix& matrix,
                              const std::string& path);

}  // namespace tunisent
