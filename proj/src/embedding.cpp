#include "tunisent/embedding.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tunisent/errors.hpp"

namespace tunisent {

namespace fs = std::filesystem;

Vocabulary::Vocabulary() {
  tokens_.emplace_back(kPadToken);
  tokens_.emplace_back(kUnkToken);
  index_.emplace(std::string(kPadToken), kPad);
  index_.emplace(std::string(kUnkToken), kUnk);
}

std::int32_t Vocabulary::add(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const auto idx = static_cast<std::int32_t>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), idx);
  return idx;
}

std::int32_t Vocabulary::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& t : tokens_) out << t << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  Vocabulary v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 0 && line != kPadToken) {
      throw FormatError(path + ": line 0 must be " + std::string(kPadToken),
                        0);
    }
    if (lineno == 1 && line != kUnkToken) {
      throw FormatError(path + ": line 1 must be " + std::string(kUnkToken),
                        0);
    }
    if (lineno >= 2) v.add(line);
    ++lineno;
  }
  if (lineno < 2) throw FormatError(path + ": vocabulary too short", 0);
  return v;
}

Eigen::MatrixXf SequenceEncoding::padded() const {
  Eigen::MatrixXf out = Eigen::MatrixXf::Zero(max_len, vectors.cols());
  if (n_real > 0) out.topRows(n_real) = vectors;
  return out;
}

SequenceEncoding encode_static(const std::vector<std::string>& tokens,
                               const Vocabulary& vocab,
                               const EmbeddingMatrix& matrix, int max_len) {
  if (max_len < 1) throw InvalidSpec("max_len must be >= 1");
  SequenceEncoding enc;
  enc.max_len = max_len;
  enc.n_real = static_cast<int>(
      std::min<std::size_t>(tokens.size(), static_cast<std::size_t>(max_len)));
  enc.indices.assign(max_len, Vocabulary::kPad);
  enc.vectors.resize(enc.n_real, matrix.dim());
  for (int t = 0; t < enc.n_real; ++t) {
    const auto idx = vocab.lookup(tokens[t]);
    enc.indices[t] = idx;
    enc.vectors.row(t) = matrix.rows.row(idx).cast<float>();
  }
  return enc;
}

namespace {

void write_f32(std::ostream& out, const Eigen::MatrixXd& m) {
  // row-major little-endian float32
  std::vector<float> row(m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = static_cast<float>(m(r, c));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

}  // namespace

void save_embedding(const Vocabulary& vocab, const EmbeddingMatrix& matrix,
                    const std::string& dir,
                    const std::string& extra_meta_json) {
  fs::create_directories(dir);
  vocab.save((fs::path(dir) / "vocab.txt").string());
  std::ofstream bin((fs::path(dir) / "vectors.bin").string(),
                    std::ios::binary);
  if (!bin) throw InputError("cannot write vectors.bin in " + dir);
  write_f32(bin, matrix.rows);

  nlohmann::ordered_json meta = nlohmann::ordered_json::parse(extra_meta_json);
  meta["dim"] = matrix.dim();
  meta["count"] = matrix.count();
  std::ofstream mj((fs::path(dir) / "meta.json").string());
  mj << meta.dump(2) << "\n";
}

std::pair<Vocabulary, EmbeddingMatrix> load_embedding(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::is_directory(base)) throw MissingFile(dir);
  std::ifstream mj(base / "meta.json");
  if (!mj) throw MissingFile((base / "meta.json").string());
  nlohmann::json meta = nlohmann::json::parse(mj, nullptr, false);
  if (meta.is_discarded() || !meta.contains("dim") || !meta.contains("count")) {
    throw FormatError(dir + "/meta.json: expected dim and count", 0);
  }
  const auto dim = meta["dim"].get<std::int64_t>();
  const auto count = meta["count"].get<std::int64_t>();

  Vocabulary vocab = Vocabulary::load((base / "vocab.txt").string());
  if (vocab.size() != count) {
    throw DimensionMismatch(dir + ": vocab.txt has " +
                            std::to_string(vocab.size()) +
                            " entries, meta.json says " +
                            std::to_string(count));
  }

  std::ifstream bin(base / "vectors.bin", std::ios::binary);
  if (!bin) throw MissingFile((base / "vectors.bin").string());
  EmbeddingMatrix matrix;
  matrix.rows.resize(count, dim);
  std::vector<float> row(static_cast<std::size_t>(dim));
  for (std::int64_t r = 0; r < count; ++r) {
    bin.read(reinterpret_cast<char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!bin) {
      throw FormatError(dir + "/vectors.bin truncated",
                        static_cast<std::size_t>(bin.gcount()));
    }
    for (std::int64_t c = 0; c < dim; ++c) {
      matrix.rows(r, c) = row[static_cast<std::size_t>(c)];
    }
  }
  if (!matrix.all_finite()) {
    throw FormatError(dir + "/vectors.bin holds non-finite values", 0);
  }
  return {std::move(vocab), std::move(matrix)};
}

namespace {

struct TextCursor {
  const std::string& data;
  std::size_t pos = 0;

  bool eof() const { return pos >= data.size(); }
  void skip_spaces() {
    while (!eof() && (data[pos] == ' ' || data[pos] == '\t')) ++pos;
  }
  void skip_blank_lines() {
    while (!eof() &&
           (data[pos] == '\n' || data[pos] == '\r' || data[pos] == ' ' ||
            data[pos] == '\t')) {
      ++pos;
    }
  }
};

std::string next_field(TextCursor& cur) {
  cur.skip_spaces();
  std::size_t start = cur.pos;
  while (!cur.eof() && cur.data[cur.pos] != ' ' && cur.data[cur.pos] != '\t' &&
         cur.data[cur.pos] != '\n' && cur.data[cur.pos] != '\r') {
    ++cur.pos;
  }
  return cur.data.substr(start, cur.pos - start);
}

double parse_float_field(TextCursor& cur, const std::string& path) {
  cur.skip_spaces();
  const std::size_t at = cur.pos;
  std::string field = next_field(cur);
  if (field.empty()) throw FormatError(path + ": expected a number", at);
  double value = 0.0;
  auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw FormatError(path + ": bad float '" + field + "'", at);
  }
  return value;
}

std::int64_t parse_int_field(TextCursor& cur, const std::string& path) {
  cur.skip_spaces();
  const std::size_t at = cur.pos;
  std::string field = next_field(cur);
  std::int64_t value = 0;
  auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size() || value < 0) {
    throw FormatError(path + ": bad count '" + field + "'", at);
  }
  return value;
}

std::pair<Vocabulary, EmbeddingMatrix> finalize_pretrained(
    const std::string& path, Vocabulary vocab,
    std::vector<Eigen::VectorXd> loaded, std::int64_t dim) {
  if (loaded.empty()) throw FormatError(path + ": no vectors", 0);
  EmbeddingMatrix matrix;
  matrix.rows = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(loaded.size()) + 2, dim);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    matrix.rows.row(static_cast<Eigen::Index>(i) + 2) = loaded[i];
    mean += loaded[i];
  }
  mean /= static_cast<double>(loaded.size());
  matrix.rows.row(Vocabulary::kUnk) = mean;  // OOV policy: mean vector
  return {std::move(vocab), std::move(matrix)};
}

std::pair<Vocabulary, EmbeddingMatrix> load_pretrained_text(
    const std::string& path, const std::string& data) {
  TextCursor cur{data};
  const std::int64_t count = parse_int_field(cur, path);
  const std::int64_t dim = parse_int_field(cur, path);
  if (count < 1 || dim < 1) {
    throw FormatError(path + ": header must be '<count> <dim>'", 0);
  }
  Vocabulary vocab;
  std::vector<Eigen::VectorXd> loaded;
  loaded.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    cur.skip_blank_lines();
    const std::size_t row_at = cur.pos;
    if (cur.eof()) throw FormatError(path + ": truncated file", cur.pos);
    std::string token = next_field(cur);
    if (token.empty()) throw FormatError(path + ": empty token", row_at);
    Eigen::VectorXd vec(dim);
    for (std::int64_t d = 0; d < dim; ++d) {
      cur.skip_spaces();
      if (cur.eof() || cur.data[cur.pos] == '\n' || cur.data[cur.pos] == '\r') {
        throw DimensionMismatch(path + ": row for '" + token + "' has " +
                                std::to_string(d) + " values, header says " +
                                std::to_string(dim));
      }
      vec[d] = parse_float_field(cur, path);
    }
    cur.skip_spaces();
    if (!cur.eof() && cur.data[cur.pos] != '\n' && cur.data[cur.pos] != '\r') {
      throw DimensionMismatch(path + ": row for '" + token +
                              "' has more than " + std::to_string(dim) +
                              " values");
    }
    if (!vec.allFinite()) {
      throw FormatError(path + ": non-finite value in row for '" + token + "'",
                        row_at);
    }
    if (!vocab.contains(token)) {  // first occurrence wins
      vocab.add(token);
      loaded.push_back(std::move(vec));
    }
  }
  cur.skip_blank_lines();
  if (!cur.eof()) {
    throw FormatError(path + ": trailing data after declared rows", cur.pos);
  }
  return finalize_pretrained(path, std::move(vocab), std::move(loaded), dim);
}

std::pair<Vocabulary, EmbeddingMatrix> load_pretrained_binary(
    const std::string& path, const std::string& data) {
  std::size_t header_end = data.find('\n');
  if (header_end == std::string::npos) {
    throw FormatError(path + ": missing header line", 0);
  }
  std::istringstream header(data.substr(0, header_end));
  std::int64_t count = 0, dim = 0;
  if (!(header >> count >> dim) || count < 1 || dim < 1) {
    throw FormatError(path + ": header must be '<count> <dim>'", 0);
  }
  std::size_t pos = header_end + 1;
  Vocabulary vocab;
  std::vector<Eigen::VectorXd> loaded;
  loaded.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    std::size_t token_start = pos;
    while (pos < data.size() && data[pos] != ' ') ++pos;
    if (pos >= data.size()) {
      throw FormatError(path + ": truncated token", token_start);
    }
    std::string token = data.substr(token_start, pos - token_start);
    // gensim-style files put each entry on its own line
    while (!token.empty() && (token.front() == '\n' || token.front() == '\r'))
      token.erase(token.begin());
    if (token.empty()) throw FormatError(path + ": empty token", token_start);
    ++pos;  // the separating space
    if (pos + static_cast<std::size_t>(dim) * sizeof(float) > data.size()) {
      throw FormatError(path + ": truncated vector for '" + token + "'", pos);
    }
    Eigen::VectorXd vec(dim);
    for (std::int64_t d = 0; d < dim; ++d) {
      float f;
      std::memcpy(&f, data.data() + pos, sizeof(float));
      pos += sizeof(float);
      vec[d] = f;
    }
    if (!vec.allFinite()) {
      throw FormatError(path + ": non-finite value in row for '" + token + "'",
                        token_start);
    }
    if (!vocab.contains(token)) {
      vocab.add(token);
      loaded.push_back(std::move(vec));
    }
  }
  return finalize_pretrained(path, std::move(vocab), std::move(loaded), dim);
}

}  // namespace

std::pair<Vocabulary, EmbeddingMatrix> load_pretrained(
    const std::string& path, VectorFileFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();
  if (data.empty()) throw FormatError(path + ": empty file", 0);

  if (format == VectorFileFormat::Auto) {
    format = fs::path(path).extension() == ".bin" ? VectorFileFormat::Binary
                                                  : VectorFileFormat::Text;
  }
  return format == VectorFileFormat::Binary
             ? load_pretrained_binary(path, data)
             : load_pretrained_text(path, data);
}

void save_word_vectors_text(const Vocabulary& vocab,
                            const EmbeddingMatrix& matrix,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  const auto n = matrix.count() - 2;  // PAD/UNK are not part of the format
  out << n << " " << matrix.dim() << "\n";
  out.precision(9);
  for (std::int64_t r = 2; r < matrix.count(); ++r) {
    out << vocab.token(static_cast<std::int32_t>(r));
    for (int c = 0; c < matrix.dim(); ++c) out << " " << matrix.rows(r, c);
    out << "\n";
  }
}

void save_word_vectors_binary(const Vocabulary& vocab,
                              const EmbeddingMatrix& matrix,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << matrix.count() - 2 << " " << matrix.dim() << "\n";
  for (std::int64_t r = 2; r < matrix.count(); ++r) {
    out << vocab.token(static_cast<std::int32_t>(r)) << " ";
    for (int c = 0; c < matrix.dim(); ++c) {
      const float f = static_cast<float>(matrix.rows(r, c));
      out.write(reinterpret_cast<const char*>(&f), sizeof(float));
    }
    out << "\n";
  }
}

}  // namespace tunisent
