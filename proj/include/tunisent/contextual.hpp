#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "tunisent/embedding.hpp"

namespace tunisent {

using RowMajorMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Greedy longest-match-first subword tokenizer. A word is first looked up
// whole; failing that it is broken into vocabulary pieces, and any
// character with no piece of its own becomes one UNK piece, so every token
// decomposes into at least one piece.
class WordPieceTokenizer {
 public:
  WordPieceTokenizer(std::vector<std::string> pieces, bool do_lower_case);
  static WordPieceTokenizer from_file(const std::string& path,
                                      bool do_lower_case);

  std::int32_t piece_count() const {
    return static_cast<std::int32_t>(pieces_.size());
  }
  const std::string& piece(std::int32_t id) const { return pieces_.at(id); }
  std::optional<std::int32_t> piece_id(std::string_view piece) const;

  std::int32_t pad_id() const { return pad_id_; }
  std::int32_t unk_id() const { return unk_id_; }
  std::int32_t cls_id() const { return cls_id_; }
  std::int32_t sep_id() const { return sep_id_; }

  // Subword pieces of a single word (no specials), as piece ids.
  std::vector<std::int32_t> word_pieces(std::string_view word) const;
  std::vector<std::string> word_piece_surfaces(std::string_view word) const;

  // Whitespace/punctuation pre-split followed by word_pieces; no specials.
  std::vector<std::int32_t> encode_text(std::string_view text) const;

  // Words after the basic split (whitespace, punctuation, control chars).
  static std::vector<std::string> basic_split(std::string_view text,
                                              bool do_lower_case);

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, std::int32_t> index_;
  bool do_lower_case_;
  std::int32_t pad_id_ = 0, unk_id_ = 0, cls_id_ = 0, sep_id_ = 0;
};

enum class ContextualMode { EmbeddingLayerOnly, FullEncoder };

std::string to_string(ContextualMode m);
std::optional<ContextualMode> parse_contextual_mode(std::string_view s);

// Post-layer-norm transformer encoder (BERT layout), float32, inference
// only. Checkpoint directory: manifest.json + weights.bin + vocab.txt; the
// manifest lists every tensor with HF-style names, shape and float offset.
class BertEncoder {
 public:
  static BertEncoder load(const std::string& dir);

  int hidden_size() const { return hidden_; }
  int num_layers() const { return layers_; }
  int max_position() const { return max_position_; }

  const RowMajorMatrixXf& word_embeddings() const { return word_embeddings_; }

  // Final hidden states, (n, hidden). `ids` must fit max_position.
  RowMajorMatrixXf encode(const std::vector<std::int32_t>& ids) const;

 private:
  struct Layer {
    RowMajorMatrixXf wq, wk, wv, wo, w1, w2;
    Eigen::VectorXf bq, bk, bv, bo, b1, b2;
    Eigen::VectorXf ln1_g, ln1_b, ln2_g, ln2_b;
  };

  int hidden_ = 0, layers_ = 0, heads_ = 0, intermediate_ = 0,
      max_position_ = 0;
  float ln_eps_ = 1e-12f;
  RowMajorMatrixXf word_embeddings_, position_embeddings_, type_embeddings_;
  Eigen::VectorXf emb_ln_g_, emb_ln_b_;
  std::vector<Layer> layers_data_;
};

// Frozen multilingual-checkpoint representation provider. Texts become
// [CLS] + pieces + [SEP]; vectors are either static rows of the input
// embedding matrix or final encoder hidden states.
class ContextualProvider {
 public:
  // Throws ProviderUnavailable when the directory (or, with an empty path,
  // the TUNISENT_MODEL_DIR environment variable) does not point at a
  // usable checkpoint.
  static std::shared_ptr<ContextualProvider> load(
      const std::string& dir, ContextualMode mode = ContextualMode::FullEncoder);

  int dim() const { return encoder_.hidden_size(); }
  ContextualMode mode() const { return mode_; }
  const WordPieceTokenizer& tokenizer() const { return *tokenizer_; }
  const std::string& checkpoint_dir() const { return dir_; }

  SequenceEncoding encode(std::string_view text, int max_len) const;

 private:
  ContextualProvider(std::string dir, ContextualMode mode,
                     WordPieceTokenizer tokenizer, BertEncoder encoder);

  std::string dir_;
  ContextualMode mode_;
  std::unique_ptr<WordPieceTokenizer> tokenizer_;
  BertEncoder encoder_;
};

SequenceEncoding encode_contextual(std::string_view text,
                                   const ContextualProvider& provider,
                                   int max_len);

}  // namespace tunisent
