#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tunisent {

enum class Polarity : std::uint8_t { Negative = 0, Positive = 1 };

std::string to_string(Polarity p);
std::optional<Polarity> parse_polarity(std::string_view s);

// One social-media comment. The text is kept raw; no normalization is ever
// applied on load.
struct Comment {
  std::string id;
  std::string text;
  std::optional<Polarity> label;
};

enum class SplitTag : std::uint8_t { Unassigned = 0, Train = 1, Test = 2 };

struct CorpusStats {
  std::uint64_t n_words = 0;
  std::uint64_t n_unique_words = 0;
  std::uint64_t n_comments = 0;
  std::uint64_t n_positive = 0;
  std::uint64_t n_negative = 0;
  std::uint64_t n_train = 0;
  std::uint64_t n_test = 0;

  bool operator==(const CorpusStats&) const = default;
};

// A named collection of comments with an optional train/test assignment.
// The split-access counters exist so tests can show the training loop never
// touches the test split; they are not part of the dataset value.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(std::string name, std::vector<Comment> comments);

  LabeledDataset(const LabeledDataset& other);
  LabeledDataset& operator=(const LabeledDataset& other);
  LabeledDataset(LabeledDataset&&) noexcept = default;
  LabeledDataset& operator=(LabeledDataset&&) noexcept = default;

  std::string name;
  std::vector<Comment> comments;
  std::vector<SplitTag> split;  // parallel to comments
  CorpusStats stats;

  std::size_t size() const { return comments.size(); }
  bool has_split() const;
  bool fully_labeled() const;

  std::vector<std::size_t> train_indices() const;
  std::vector<std::size_t> test_indices() const;

  std::uint64_t train_reads() const { return counters_.train.load(); }
  std::uint64_t test_reads() const { return counters_.test.load(); }
  void reset_read_counters() const;

 private:
  struct Counters {
    mutable std::atomic<std::uint64_t> train{0};
    mutable std::atomic<std::uint64_t> test{0};
  };
  Counters counters_;
};

// Either a test fraction in (0,1) with floor rounding (remainder to Train)
// or exact (n_train, n_test) counts that must partition the dataset.
struct SplitSpec {
  std::optional<double> test_fraction;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> counts;
  std::uint64_t seed = 42;

  static SplitSpec fraction(double f, std::uint64_t seed = 42);
  static SplitSpec exact(std::uint64_t n_train, std::uint64_t n_test,
                         std::uint64_t seed = 42);
  // Named presets matching the published dataset splits.
  static SplitSpec preset_tunizi(std::uint64_t seed = 42);       // 8616/1295
  static SplitSpec preset_tsac_tunizi(std::uint64_t seed = 42);  // 7379/1817
  static SplitSpec parse(const std::string& text, std::uint64_t seed = 42);
};

enum class DatasetFormat { Csv, Tsv, Jsonl };

// Picks the format from the file extension; defaults to CSV.
DatasetFormat infer_format(const std::string& path);
std::string to_string(DatasetFormat f);
std::optional<DatasetFormat> parse_format(std::string_view s);

struct LoadOptions {
  // When set, a record without a usable label is a schema error. Predict
  // inputs disable this and load such records as unlabeled.
  bool require_labels = true;
};

LabeledDataset load_dataset(const std::string& path, DatasetFormat format,
                            const LoadOptions& options = {});
LabeledDataset load_dataset(const std::string& path,
                            const LoadOptions& options = {});

void save_dataset(const LabeledDataset& dataset, const std::string& path,
                  DatasetFormat format);

// Keeps exactly the comments with zero Arabic-block codepoints (order and
// text untouched); recomputes stats. Idempotent.
LabeledDataset filter_romanized(const LabeledDataset& dataset);

// Deterministic seeded assignment, uniform over permutations. Requires a
// fully labeled dataset.
LabeledDataset split_dataset(const LabeledDataset& dataset,
                             const SplitSpec& spec);

// Word counts use plain whitespace tokenization of the raw text. The
// unique-word count is case-sensitive unless `lowercase` is set.
CorpusStats compute_stats(const LabeledDataset& dataset,
                          bool lowercase = false);

}  // namespace tunisent
