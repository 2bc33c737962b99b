#include "tunisent/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "tunisent/errors.hpp"
#include "tunisent/rng.hpp"
#include "tunisent/utf8.hpp"

namespace tunisent {

namespace {

constexpr std::size_t kMaxReportedRows = 10;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string data = buf.str();
  if (data.size() >= 3 && data.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    data.erase(0, 3);  // UTF-8 BOM
  }
  return data;
}

// RFC 4180 records: quoted fields may hold delimiters, escaped quotes and
// newlines. Used for both CSV and TSV (tab delimiter).
std::vector<std::vector<std::string>> parse_delimited(const std::string& data,
                                                      char delim) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  const auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  const auto end_record = [&] {
    end_field();
    bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(record);
    record.clear();
  };
  for (std::size_t i = 0; i < data.size(); ++i) {
    char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (!field.empty() || !record.empty()) end_record();
  return records;
}

std::string csv_escape(const std::string& s, char delim) {
  bool needs_quotes = s.find_first_of(std::string("\"\r\n") + delim) !=
                      std::string::npos;
  if (!needs_quotes) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct ParsedRow {
  Comment comment;
  std::optional<std::string> issue;
};

ParsedRow make_comment(std::size_t record_index, std::string id,
                       std::optional<std::string> text,
                       std::optional<std::string> raw_label, bool has_label,
                       const LoadOptions& options) {
  ParsedRow row;
  if (!text.has_value()) {
    row.issue = "missing text field";
    return row;
  }
  if (utf8::trim(*text).empty()) {
    row.issue = "text is empty after trimming whitespace";
    return row;
  }
  row.comment.id = id.empty() ? std::to_string(record_index) : std::move(id);
  row.comment.text = std::move(*text);
  if (has_label && raw_label.has_value() && !raw_label->empty()) {
    auto polarity = parse_polarity(*raw_label);
    if (!polarity.has_value()) {
      row.issue = "invalid label '" + *raw_label +
                  "' (expected positive or negative)";
      return row;
    }
    row.comment.label = polarity;
  } else if (options.require_labels) {
    row.issue = has_label ? "missing label value" : "missing label field";
    return row;
  }
  return row;
}

LabeledDataset finish_load(const std::string& path,
                           std::vector<ParsedRow> rows) {
  std::vector<SchemaError::RowIssue> issues;
  std::size_t total_issues = 0;
  std::vector<Comment> comments;
  comments.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].issue.has_value()) {
      ++total_issues;
      if (issues.size() < kMaxReportedRows) {
        issues.emplace_back(i + 1, *rows[i].issue);
      }
    } else {
      comments.push_back(std::move(rows[i].comment));
    }
  }
  if (total_issues > 0) {
    throw SchemaError(path + ": " + std::to_string(total_issues) +
                          " malformed record(s)",
                      std::move(issues));
  }
  if (comments.empty()) {
    throw EmptyDataset(path + ": no records");
  }
  LabeledDataset dataset(std::filesystem::path(path).stem().string(),
                         std::move(comments));
  return dataset;
}

LabeledDataset load_delimited(const std::string& path, char delim,
                              const LoadOptions& options) {
  auto records = parse_delimited(read_file(path), delim);
  if (records.empty()) throw EmptyDataset(path + ": no records");

  const auto& header = records.front();
  int id_col = -1, text_col = -1, label_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::string name = utf8::lower_ascii(utf8::trim(header[c]));
    if (name == "id") id_col = static_cast<int>(c);
    else if (name == "text") text_col = static_cast<int>(c);
    else if (name == "label") label_col = static_cast<int>(c);
  }
  if (text_col < 0) {
    throw SchemaError(path + ": header has no 'text' column",
                      {{0, "header: " + (header.empty() ? "" : header[0])}});
  }
  if (label_col < 0 && options.require_labels) {
    throw SchemaError(path + ": header has no 'label' column",
                      {{0, "expected columns id,text,label"}});
  }

  std::vector<ParsedRow> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      ParsedRow row;
      row.issue = "expected " + std::to_string(header.size()) +
                  " fields, got " + std::to_string(rec.size());
      rows.push_back(std::move(row));
      continue;
    }
    auto get = [&](int col) -> std::optional<std::string> {
      if (col < 0) return std::nullopt;
      return rec[static_cast<std::size_t>(col)];
    };
    rows.push_back(make_comment(r, get(id_col).value_or(""), get(text_col),
                                get(label_col), label_col >= 0, options));
  }
  return finish_load(path, std::move(rows));
}

LabeledDataset load_jsonl(const std::string& path,
                          const LoadOptions& options) {
  std::string data = read_file(path);
  std::istringstream in(data);
  std::string line;
  std::vector<ParsedRow> rows;
  std::size_t record_index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::trim(line).empty()) continue;
    ++record_index;
    ParsedRow row;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      row.issue = "not a JSON object";
      rows.push_back(std::move(row));
      continue;
    }
    std::string id;
    if (obj.contains("id")) {
      if (obj["id"].is_string()) id = obj["id"].get<std::string>();
      else if (obj["id"].is_number_integer())
        id = std::to_string(obj["id"].get<long long>());
    }
    std::optional<std::string> text;
    if (obj.contains("text") && obj["text"].is_string()) {
      text = obj["text"].get<std::string>();
    }
    bool has_label = obj.contains("label") && !obj["label"].is_null();
    std::optional<std::string> label;
    if (has_label) {
      if (obj["label"].is_string()) label = obj["label"].get<std::string>();
      else label = obj["label"].dump();
    }
    rows.push_back(make_comment(record_index, std::move(id), std::move(text),
                                std::move(label), has_label, options));
  }
  return finish_load(path, std::move(rows));
}

std::uint64_t count_where(const std::vector<SplitTag>& split, SplitTag tag) {
  return static_cast<std::uint64_t>(
      std::count(split.begin(), split.end(), tag));
}

}  // namespace

std::string to_string(Polarity p) {
  return p == Polarity::Positive ? "positive" : "negative";
}

std::optional<Polarity> parse_polarity(std::string_view s) {
  std::string v = utf8::lower_ascii(utf8::trim(s));
  if (v == "positive" || v == "pos" || v == "1") return Polarity::Positive;
  if (v == "negative" || v == "neg" || v == "0") return Polarity::Negative;
  return std::nullopt;
}

LabeledDataset::LabeledDataset(std::string name_, std::vector<Comment> cs)
    : name(std::move(name_)), comments(std::move(cs)) {
  split.assign(comments.size(), SplitTag::Unassigned);
  stats = compute_stats(*this);
}

LabeledDataset::LabeledDataset(const LabeledDataset& other)
    : name(other.name),
      comments(other.comments),
      split(other.split),
      stats(other.stats) {}

LabeledDataset& LabeledDataset::operator=(const LabeledDataset& other) {
  if (this != &other) {
    name = other.name;
    comments = other.comments;
    split = other.split;
    stats = other.stats;
  }
  return *this;
}

bool LabeledDataset::has_split() const {
  return !split.empty() &&
         std::none_of(split.begin(), split.end(),
                      [](SplitTag t) { return t == SplitTag::Unassigned; });
}

bool LabeledDataset::fully_labeled() const {
  return std::all_of(comments.begin(), comments.end(),
                     [](const Comment& c) { return c.label.has_value(); });
}

std::vector<std::size_t> LabeledDataset::train_indices() const {
  counters_.train.fetch_add(1, std::memory_order_relaxed);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == SplitTag::Train) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> LabeledDataset::test_indices() const {
  counters_.test.fetch_add(1, std::memory_order_relaxed);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == SplitTag::Test) out.push_back(i);
  }
  return out;
}

void LabeledDataset::reset_read_counters() const {
  counters_.train.store(0);
  counters_.test.store(0);
}

SplitSpec SplitSpec::fraction(double f, std::uint64_t seed) {
  SplitSpec s;
  s.test_fraction = f;
  s.seed = seed;
  return s;
}

SplitSpec SplitSpec::exact(std::uint64_t n_train, std::uint64_t n_test,
                           std::uint64_t seed) {
  SplitSpec s;
  s.counts = {n_train, n_test};
  s.seed = seed;
  return s;
}

SplitSpec SplitSpec::preset_tunizi(std::uint64_t seed) {
  return exact(8616, 1295, seed);
}

SplitSpec SplitSpec::preset_tsac_tunizi(std::uint64_t seed) {
  return exact(7379, 1817, seed);
}

SplitSpec SplitSpec::parse(const std::string& text, std::uint64_t seed) {
  if (text == "preset-tunizi") return preset_tunizi(seed);
  if (text == "preset-tsac-tunizi") return preset_tsac_tunizi(seed);
  if (text.rfind("fraction:", 0) == 0) {
    try {
      return fraction(std::stod(text.substr(9)), seed);
    } catch (const std::exception&) {
      throw InvalidSpec("bad split fraction: " + text);
    }
  }
  throw InvalidSpec(
      "unknown split '" + text +
      "' (expected preset-tunizi, preset-tsac-tunizi or fraction:F)");
}

DatasetFormat infer_format(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  ext = utf8::lower_ascii(ext);
  if (ext == ".tsv") return DatasetFormat::Tsv;
  if (ext == ".jsonl" || ext == ".ndjson") return DatasetFormat::Jsonl;
  return DatasetFormat::Csv;
}

std::string to_string(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::Csv:
      return "csv";
    case DatasetFormat::Tsv:
      return "tsv";
    case DatasetFormat::Jsonl:
      return "jsonl";
  }
  return "csv";
}

std::optional<DatasetFormat> parse_format(std::string_view s) {
  std::string v = utf8::lower_ascii(s);
  if (v == "csv") return DatasetFormat::Csv;
  if (v == "tsv") return DatasetFormat::Tsv;
  if (v == "jsonl") return DatasetFormat::Jsonl;
  return std::nullopt;
}

LabeledDataset load_dataset(const std::string& path, DatasetFormat format,
                            const LoadOptions& options) {
  switch (format) {
    case DatasetFormat::Csv:
      return load_delimited(path, ',', options);
    case DatasetFormat::Tsv:
      return load_delimited(path, '\t', options);
    case DatasetFormat::Jsonl:
      return load_jsonl(path, options);
  }
  throw InvalidSpec("unknown dataset format");
}

LabeledDataset load_dataset(const std::string& path,
                            const LoadOptions& options) {
  return load_dataset(path, infer_format(path), options);
}

void save_dataset(const LabeledDataset& dataset, const std::string& path,
                  DatasetFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  if (format == DatasetFormat::Jsonl) {
    for (const auto& c : dataset.comments) {
      nlohmann::ordered_json obj;
      obj["id"] = c.id;
      obj["text"] = c.text;
      if (c.label.has_value()) obj["label"] = to_string(*c.label);
      out << obj.dump() << "\n";
    }
    return;
  }
  const char delim = format == DatasetFormat::Tsv ? '\t' : ',';
  out << "id" << delim << "text" << delim << "label\n";
  for (const auto& c : dataset.comments) {
    out << csv_escape(c.id, delim) << delim << csv_escape(c.text, delim)
        << delim << (c.label.has_value() ? to_string(*c.label) : "") << "\n";
  }
}

LabeledDataset filter_romanized(const LabeledDataset& dataset) {
  LabeledDataset out;
  out.name = dataset.name;
  for (std::size_t i = 0; i < dataset.comments.size(); ++i) {
    bool has_arabic = false;
    for (char32_t cp : utf8::decode(dataset.comments[i].text)) {
      if (utf8::is_arabic_block(cp)) {
        has_arabic = true;
        break;
      }
    }
    if (!has_arabic) {
      out.comments.push_back(dataset.comments[i]);
      out.split.push_back(i < dataset.split.size() ? dataset.split[i]
                                                   : SplitTag::Unassigned);
    }
  }
  out.stats = compute_stats(out);
  return out;
}

LabeledDataset split_dataset(const LabeledDataset& dataset,
                             const SplitSpec& spec) {
  const std::uint64_t n = dataset.size();
  if (!dataset.fully_labeled()) {
    throw InvalidSpec("split requires a fully labeled dataset");
  }
  std::uint64_t n_test = 0;
  if (spec.counts.has_value()) {
    auto [train_count, test_count] = *spec.counts;
    if (train_count + test_count != n) {
      throw InvalidSpec("split counts " + std::to_string(train_count) + "+" +
                        std::to_string(test_count) + " do not partition " +
                        std::to_string(n) + " comments");
    }
    n_test = test_count;
  } else if (spec.test_fraction.has_value()) {
    double f = *spec.test_fraction;
    if (!(f > 0.0 && f < 1.0)) {
      throw InvalidSpec("test fraction must lie in (0,1)");
    }
    n_test = static_cast<std::uint64_t>(f * static_cast<double>(n));
  } else {
    throw InvalidSpec("split spec needs a fraction or exact counts");
  }
  const std::uint64_t n_train = n - n_test;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  deterministic_shuffle(order, rng);

  LabeledDataset out(dataset);
  out.split.assign(n, SplitTag::Test);
  for (std::uint64_t k = 0; k < n_train; ++k) {
    out.split[order[k]] = SplitTag::Train;
  }
  out.stats = compute_stats(out);
  return out;
}

CorpusStats compute_stats(const LabeledDataset& dataset, bool lowercase) {
  CorpusStats s;
  s.n_comments = dataset.size();
  std::unordered_set<std::string> unique;
  for (const auto& c : dataset.comments) {
    if (c.label == Polarity::Positive) ++s.n_positive;
    if (c.label == Polarity::Negative) ++s.n_negative;
    const auto cps = utf8::decode(c.text);
    std::size_t i = 0;
    while (i < cps.size()) {
      while (i < cps.size() && utf8::is_space(cps[i])) ++i;
      if (i >= cps.size()) break;
      std::size_t j = i;
      std::vector<char32_t> word;
      while (j < cps.size() && !utf8::is_space(cps[j])) {
        word.push_back(lowercase ? utf8::to_lower(cps[j]) : cps[j]);
        ++j;
      }
      ++s.n_words;
      unique.insert(utf8::encode(word));
      i = j;
    }
  }
  s.n_unique_words = unique.size();
  s.n_train = count_where(dataset.split, SplitTag::Train);
  s.n_test = count_where(dataset.split, SplitTag::Test);
  return s;
}

}  // namespace tunisent
