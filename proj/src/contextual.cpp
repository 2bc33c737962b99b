#include "tunisent/contextual.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tunisent/errors.hpp"
#include "tunisent/utf8.hpp"

namespace tunisent {

namespace fs = std::filesystem;

WordPieceTokenizer::WordPieceTokenizer(std::vector<std::string> pieces,
                                       bool do_lower_case)
    : pieces_(std::move(pieces)), do_lower_case_(do_lower_case) {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    index_.emplace(pieces_[i], static_cast<std::int32_t>(i));
  }
  const auto require = [&](const char* name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw FormatError(std::string("subword vocabulary lacks ") + name, 0);
    }
    return it->second;
  };
  pad_id_ = require("[PAD]");
  unk_id_ = require("[UNK]");
  cls_id_ = require("[CLS]");
  sep_id_ = require("[SEP]");
}

WordPieceTokenizer WordPieceTokenizer::from_file(const std::string& path,
                                                 bool do_lower_case) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pieces.push_back(line);
  }
  while (!pieces.empty() && pieces.back().empty()) pieces.pop_back();
  return WordPieceTokenizer(std::move(pieces), do_lower_case);
}

std::optional<std::int32_t> WordPieceTokenizer::piece_id(
    std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> WordPieceTokenizer::basic_split(std::string_view text,
                                                         bool do_lower_case) {
  std::vector<std::string> words;
  std::string current;
  for (char32_t cp : utf8::decode(text)) {
    if (cp < 0x20 || cp == 0x7F) cp = U' ';  // control chars act as spaces
    if (do_lower_case) cp = utf8::to_lower(cp);
    if (utf8::is_space(cp)) {
      if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
    } else if (utf8::is_punct(cp)) {
      // every punctuation codepoint stands alone
      if (!current.empty()) {
        words.push_back(std::move(current));
        current.clear();
      }
      std::string p;
      utf8::append(p, cp);
      words.push_back(std::move(p));
    } else {
      utf8::append(current, cp);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<std::int32_t> WordPieceTokenizer::word_pieces(
    std::string_view word) const {
  std::vector<std::int32_t> out;
  std::string lowered;
  if (do_lower_case_) {
    for (char32_t cp : utf8::decode(word)) {
      utf8::append(lowered, utf8::to_lower(cp));
    }
    word = lowered;
  }
  const auto cps = utf8::decode(word);
  if (cps.empty()) return out;

  std::size_t start = 0;
  while (start < cps.size()) {
    std::size_t end = cps.size();
    std::int32_t matched = -1;
    while (end > start) {
      std::string candidate = start > 0 ? "##" : "";
      for (std::size_t k = start; k < end; ++k) {
        utf8::append(candidate, cps[k]);
      }
      if (auto id = piece_id(candidate)) {
        matched = *id;
        break;
      }
      --end;
    }
    if (matched >= 0) {
      out.push_back(matched);
      start = end;
    } else {
      // No piece covers this character: one UNK piece for it, then keep
      // decomposing the rest of the word.
      out.push_back(unk_id_);
      ++start;
    }
  }
  return out;
}

std::vector<std::string> WordPieceTokenizer::word_piece_surfaces(
    std::string_view word) const {
  std::vector<std::string> out;
  for (std::int32_t id : word_pieces(word)) out.push_back(pieces_.at(id));
  return out;
}

std::vector<std::int32_t> WordPieceTokenizer::encode_text(
    std::string_view text) const {
  std::vector<std::int32_t> ids;
  for (const auto& word : basic_split(text, do_lower_case_)) {
    const auto pieces = word_pieces(word);
    ids.insert(ids.end(), pieces.begin(), pieces.end());
  }
  return ids;
}

std::string to_string(ContextualMode m) {
  return m == ContextualMode::FullEncoder ? "full_encoder"
                                          : "embedding_layer_only";
}

std::optional<ContextualMode> parse_contextual_mode(std::string_view s) {
  if (s == "full_encoder") return ContextualMode::FullEncoder;
  if (s == "embedding_layer_only") return ContextualMode::EmbeddingLayerOnly;
  return std::nullopt;
}

namespace {

void layer_norm(RowMajorMatrixXf& x, const Eigen::VectorXf& gamma,
                const Eigen::VectorXf& beta, float eps) {
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    const float mean = row.mean();
    const float var = (row.array() - mean).square().mean();
    const float inv = 1.0f / std::sqrt(var + eps);
    row = ((row.array() - mean) * inv).matrix().cwiseProduct(
              gamma.transpose()) +
          beta.transpose();
  }
}

inline float gelu(float x) {
  return 0.5f * x * (1.0f + std::erf(x * 0.70710678118654752f));
}

struct TensorBlob {
  std::unordered_map<std::string, std::pair<std::vector<std::int64_t>,
                                            std::size_t>>
      entries;  // name -> (shape, float offset)
  std::vector<float> data;

  RowMajorMatrixXf matrix(const std::string& name, const std::string& dir) {
    auto it = entries.find(name);
    if (it == entries.end()) {
      throw FormatError(dir + ": manifest lacks tensor '" + name + "'", 0);
    }
    const auto& [shape, offset] = it->second;
    std::int64_t rows = 1, cols = 1;
    if (shape.size() == 1) {
      cols = shape[0];
    } else if (shape.size() == 2) {
      rows = shape[0];
      cols = shape[1];
    } else {
      throw FormatError(dir + ": tensor '" + name + "' is not 1-D or 2-D", 0);
    }
    const auto n = static_cast<std::size_t>(rows * cols);
    if (offset + n > data.size()) {
      throw FormatError(dir + ": weights.bin too small for '" + name + "'",
                        offset * sizeof(float));
    }
    RowMajorMatrixXf m(rows, cols);
    std::memcpy(m.data(), data.data() + offset, n * sizeof(float));
    return m;
  }

  Eigen::VectorXf vector(const std::string& name, const std::string& dir) {
    RowMajorMatrixXf m = matrix(name, dir);
    return Eigen::Map<Eigen::VectorXf>(m.data(), m.size());
  }
};

TensorBlob read_blob(const fs::path& base, const nlohmann::json& manifest) {
  TensorBlob blob;
  for (const auto& t : manifest.at("tensors")) {
    blob.entries.emplace(
        t.at("name").get<std::string>(),
        std::make_pair(t.at("shape").get<std::vector<std::int64_t>>(),
                       t.at("offset").get<std::size_t>()));
  }
  std::ifstream bin(base / "weights.bin", std::ios::binary);
  if (!bin) throw ProviderUnavailable("missing weights.bin in " +
                                      base.string());
  bin.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(bin.tellg());
  bin.seekg(0);
  blob.data.resize(bytes / sizeof(float));
  bin.read(reinterpret_cast<char*>(blob.data.data()),
           static_cast<std::streamsize>(blob.data.size() * sizeof(float)));
  return blob;
}

}  // namespace

BertEncoder BertEncoder::load(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream mj(base / "manifest.json");
  if (!mj) {
    throw ProviderUnavailable("no contextual checkpoint manifest at " + dir);
  }
  nlohmann::json manifest = nlohmann::json::parse(mj, nullptr, false);
  if (manifest.is_discarded()) {
    throw FormatError(dir + "/manifest.json: invalid JSON", 0);
  }

  BertEncoder enc;
  enc.hidden_ = manifest.at("hidden_size").get<int>();
  enc.layers_ = manifest.at("num_layers").get<int>();
  enc.heads_ = manifest.at("num_heads").get<int>();
  enc.intermediate_ = manifest.at("intermediate_size").get<int>();
  enc.max_position_ = manifest.at("max_position").get<int>();
  enc.ln_eps_ = manifest.value("layer_norm_eps", 1e-12f);
  if (enc.hidden_ % enc.heads_ != 0) {
    throw FormatError(dir + ": hidden_size not divisible by num_heads", 0);
  }

  TensorBlob blob = read_blob(base, manifest);
  enc.word_embeddings_ =
      blob.matrix("embeddings.word_embeddings.weight", dir);
  enc.position_embeddings_ =
      blob.matrix("embeddings.position_embeddings.weight", dir);
  enc.type_embeddings_ =
      blob.matrix("embeddings.token_type_embeddings.weight", dir);
  enc.emb_ln_g_ = blob.vector("embeddings.LayerNorm.weight", dir);
  enc.emb_ln_b_ = blob.vector("embeddings.LayerNorm.bias", dir);

  enc.layers_data_.resize(static_cast<std::size_t>(enc.layers_));
  for (int l = 0; l < enc.layers_; ++l) {
    const std::string p = "encoder.layer." + std::to_string(l) + ".";
    Layer& lay = enc.layers_data_[static_cast<std::size_t>(l)];
    lay.wq = blob.matrix(p + "attention.self.query.weight", dir);
    lay.bq = blob.vector(p + "attention.self.query.bias", dir);
    lay.wk = blob.matrix(p + "attention.self.key.weight", dir);
    lay.bk = blob.vector(p + "attention.self.key.bias", dir);
    lay.wv = blob.matrix(p + "attention.self.value.weight", dir);
    lay.bv = blob.vector(p + "attention.self.value.bias", dir);
    lay.wo = blob.matrix(p + "attention.output.dense.weight", dir);
    lay.bo = blob.vector(p + "attention.output.dense.bias", dir);
    lay.ln1_g = blob.vector(p + "attention.output.LayerNorm.weight", dir);
    lay.ln1_b = blob.vector(p + "attention.output.LayerNorm.bias", dir);
    lay.w1 = blob.matrix(p + "intermediate.dense.weight", dir);
    lay.b1 = blob.vector(p + "intermediate.dense.bias", dir);
    lay.w2 = blob.matrix(p + "output.dense.weight", dir);
    lay.b2 = blob.vector(p + "output.dense.bias", dir);
    lay.ln2_g = blob.vector(p + "output.LayerNorm.weight", dir);
    lay.ln2_b = blob.vector(p + "output.LayerNorm.bias", dir);
  }
  return enc;
}

RowMajorMatrixXf BertEncoder::encode(
    const std::vector<std::int32_t>& ids) const {
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (n == 0) return RowMajorMatrixXf(0, hidden_);
  if (n > max_position_) {
    throw InvalidSpec("sequence of " + std::to_string(ids.size()) +
                      " pieces exceeds the model's max position " +
                      std::to_string(max_position_));
  }
  RowMajorMatrixXf x(n, hidden_);
  for (Eigen::Index t = 0; t < n; ++t) {
    x.row(t) = word_embeddings_.row(ids[static_cast<std::size_t>(t)]) +
               position_embeddings_.row(t) + type_embeddings_.row(0);
  }
  layer_norm(x, emb_ln_g_, emb_ln_b_, ln_eps_);

  const int head_dim = hidden_ / heads_;
  const float scale = 1.0f / std::sqrt(static_cast<float>(head_dim));
  for (const Layer& lay : layers_data_) {
    RowMajorMatrixXf q = x * lay.wq.transpose();
    q.rowwise() += lay.bq.transpose();
    RowMajorMatrixXf k = x * lay.wk.transpose();
    k.rowwise() += lay.bk.transpose();
    RowMajorMatrixXf v = x * lay.wv.transpose();
    v.rowwise() += lay.bv.transpose();

    RowMajorMatrixXf context(n, hidden_);
    for (int h = 0; h < heads_; ++h) {
      const auto qh = q.middleCols(h * head_dim, head_dim);
      const auto kh = k.middleCols(h * head_dim, head_dim);
      const auto vh = v.middleCols(h * head_dim, head_dim);
      RowMajorMatrixXf scores = (qh * kh.transpose()) * scale;
      for (Eigen::Index r = 0; r < n; ++r) {
        auto row = scores.row(r);
        const float m = row.maxCoeff();
        row = (row.array() - m).exp();
        row /= row.sum();
      }
      context.middleCols(h * head_dim, head_dim) = scores * vh;
    }
    RowMajorMatrixXf attn = context * lay.wo.transpose();
    attn.rowwise() += lay.bo.transpose();
    x += attn;
    layer_norm(x, lay.ln1_g, lay.ln1_b, ln_eps_);

    RowMajorMatrixXf inter = x * lay.w1.transpose();
    inter.rowwise() += lay.b1.transpose();
    for (Eigen::Index i = 0; i < inter.size(); ++i) {
      inter.data()[i] = gelu(inter.data()[i]);
    }
    RowMajorMatrixXf ffn = inter * lay.w2.transpose();
    ffn.rowwise() += lay.b2.transpose();
    x += ffn;
    layer_norm(x, lay.ln2_g, lay.ln2_b, ln_eps_);
  }
  return x;
}

ContextualProvider::ContextualProvider(std::string dir, ContextualMode mode,
                                       WordPieceTokenizer tokenizer,
                                       BertEncoder encoder)
    : dir_(std::move(dir)),
      mode_(mode),
      tokenizer_(std::make_unique<WordPieceTokenizer>(std::move(tokenizer))),
      encoder_(std::move(encoder)) {}

std::shared_ptr<ContextualProvider> ContextualProvider::load(
    const std::string& dir, ContextualMode mode) {
  std::string resolved = dir;
  if (resolved.empty()) {
    const char* env = std::getenv("TUNISENT_MODEL_DIR");
    if (env == nullptr || *env == '\0') {
      throw ProviderUnavailable(
          "no contextual checkpoint configured (set TUNISENT_MODEL_DIR or "
          "pass a model directory)");
    }
    resolved = env;
  }
  if (!fs::is_directory(resolved)) {
    throw ProviderUnavailable("contextual checkpoint directory not found: " +
                              resolved);
  }
  BertEncoder encoder = BertEncoder::load(resolved);

  std::ifstream mj(fs::path(resolved) / "manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(mj);
  const bool lower = manifest.value("do_lower_case", false);
  WordPieceTokenizer tokenizer = WordPieceTokenizer::from_file(
      (fs::path(resolved) / "vocab.txt").string(), lower);
  if (tokenizer.piece_count() != encoder.word_embeddings().rows()) {
    throw FormatError(resolved + ": vocab.txt size " +
                          std::to_string(tokenizer.piece_count()) +
                          " != embedding rows " +
                          std::to_string(encoder.word_embeddings().rows()),
                      0);
  }
  return std::shared_ptr<ContextualProvider>(new ContextualProvider(
      resolved, mode, std::move(tokenizer), std::move(encoder)));
}

SequenceEncoding ContextualProvider::encode(std::string_view text,
                                            int max_len) const {
  if (max_len < 2) {
    throw InvalidSpec("contextual max_len must fit [CLS] and [SEP]");
  }
  std::vector<std::int32_t> ids = tokenizer_->encode_text(text);
  const std::size_t budget = static_cast<std::size_t>(max_len) - 2;
  if (ids.size() > budget) ids.resize(budget);
  ids.insert(ids.begin(), tokenizer_->cls_id());
  ids.push_back(tokenizer_->sep_id());

  SequenceEncoding enc;
  enc.max_len = max_len;
  enc.n_real = static_cast<int>(ids.size());
  enc.indices.assign(static_cast<std::size_t>(max_len), tokenizer_->pad_id());
  std::copy(ids.begin(), ids.end(), enc.indices.begin());

  if (mode_ == ContextualMode::EmbeddingLayerOnly) {
    enc.vectors.resize(enc.n_real, dim());
    for (int t = 0; t < enc.n_real; ++t) {
      enc.vectors.row(t) =
          encoder_.word_embeddings().row(ids[static_cast<std::size_t>(t)]);
    }
  } else {
    enc.vectors = encoder_.encode(ids);
  }
  return enc;
}

SequenceEncoding encode_contextual(std::string_view text,
                                   const ContextualProvider& provider,
                                   int max_len) {
  return provider.encode(text, max_len);
}

}  // namespace tunisent
