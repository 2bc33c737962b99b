#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tunisent/classifier.hpp"
#include "tunisent/contextual.hpp"
#include "tunisent/corpus.hpp"
#include "tunisent/metrics.hpp"
#include "tunisent/word2vec.hpp"

namespace tunisent {

enum class EmbeddingKind { Word2vecSelf, PretrainedStatic, Contextual };

std::string to_string(EmbeddingKind k);
std::optional<EmbeddingKind> parse_embedding_kind(std::string_view s);

// One experiment grid cell. Zero-valued max_len/filters resolve to the
// per-embedding defaults; resolve() materializes every default so reports
// are self-describing.
struct TrainSpec {
  EmbeddingKind embedding = EmbeddingKind::Word2vecSelf;
  Architecture classifier = Architecture::Cnn;
  int epochs = 3;
  int batch_size = 16;
  std::uint64_t seed = 42;
  std::string dataset_name;
  std::uint64_t split_seed = 42;

  int max_len = 0;  // 0 -> 64 for static embeddings, 128 for contextual
  double learning_rate = 1e-3;
  double dropout_rate = 0.5;
  // Off by default, mirroring the fixed-epoch regime; when set, this
  // fraction of the Train split is held out and its loss logged per epoch
  // (no early stopping).
  double dev_fraction = 0.0;

  std::vector<int> filter_widths{3, 4, 5};
  int filters_per_width = 0;  // 0 -> 200 for self-trained word2vec, else 100
  int hidden_size = 128;

  Word2vecParams word2vec;      // embedding == Word2vecSelf
  std::string pretrained_path;  // embedding == PretrainedStatic
  std::string model_dir;        // embedding == Contextual; "" -> env var
  ContextualMode contextual_mode = ContextualMode::FullEncoder;

  void resolve();
  bool resolved() const { return max_len > 0 && filters_per_width > 0; }

  std::string to_json() const;
  static TrainSpec from_json(const std::string& json_text);
};

// Turns raw comment text into classifier-ready encodings. Construction may
// train or load the underlying representation; encoding afterwards is
// read-only and thread-safe.
class SequenceEncoder {
 public:
  virtual ~SequenceEncoder() = default;
  virtual int dim() const = 0;
  virtual int max_len() const = 0;
  virtual SequenceEncoding encode(std::string_view text) const = 0;
  // Writes whatever a later cmd_predict needs into the checkpoint dir.
  virtual void save(const std::string& checkpoint_dir) const = 0;
};

std::unique_ptr<SequenceEncoder> make_static_encoder(Vocabulary vocab,
                                                     EmbeddingMatrix matrix,
                                                     int max_len,
                                                     std::string meta_json = "{}");
std::unique_ptr<SequenceEncoder> make_contextual_encoder(
    std::shared_ptr<ContextualProvider> provider, int max_len);

// Builds the spec's embedding provider. Self-trained word2vec fits on the
// dataset's Train split; the other two never touch the dataset.
std::unique_ptr<SequenceEncoder> build_encoder(const TrainSpec& spec,
                                               const LabeledDataset& dataset);

struct EpochLog {
  double mean_loss = 0.0;
  std::optional<double> dev_loss;
  std::vector<int> batch_sizes;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
};

struct TrainedModel {
  TrainSpec spec;  // resolved
  std::shared_ptr<SequenceEncoder> encoder;
  std::shared_ptr<Classifier> classifier;
  TrainingLog log;
};

// Mini-batch training over the Train split: exactly spec.epochs passes,
// batch order reshuffled per epoch from the run seed, final batch may be
// smaller. The Test split is never read here.
TrainedModel train(const TrainSpec& spec, const LabeledDataset& dataset);
TrainedModel train(const TrainSpec& spec, const LabeledDataset& dataset,
                   std::shared_ptr<SequenceEncoder> encoder);

struct EvalReport {
  double accuracy = 0.0;
  double f1_micro = 0.0;
  double f1_macro = 0.0;
  ConfusionMatrix confusion;
  TrainSpec spec;
  double wall_time_seconds = 0.0;
  std::uint64_t split_seed = 42;

  std::string to_json() const;
  static EvalReport from_json(const std::string& json_text);
};

// Scores every Test comment once. Ties (p_pos == p_neg) predict Positive.
EvalReport evaluate(const Classifier& classifier,
                    const SequenceEncoder& encoder,
                    const LabeledDataset& dataset, const TrainSpec& spec);
EvalReport evaluate(const TrainedModel& model, const LabeledDataset& dataset);

// Checkpoint directory = classifier manifest/params + encoder state, enough
// to reload and predict without the original dataset.
void save_model(const TrainedModel& model, const std::string& dir);
struct LoadedModel {
  TrainSpec spec;
  std::shared_ptr<SequenceEncoder> encoder;
  std::shared_ptr<Classifier> classifier;
};
LoadedModel load_model(const std::string& dir);

// One grid cell as configured on disk (JSON mirroring TrainSpec fields plus
// the dataset reference and output directory).
struct ExperimentConfig {
  std::string dataset_path;
  std::optional<DatasetFormat> format;  // unset -> infer from extension
  std::string dataset_name;             // "" -> file stem
  bool filter_romanized = false;
  SplitSpec split = SplitSpec::fraction(0.2);
  TrainSpec spec;
  std::string out_dir = "out";

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json(const std::string& json_text);
  std::string to_json() const;  // resolved echo
};

struct ExperimentResult {
  EvalReport report;
  std::string report_path;
  std::string checkpoint_dir;
};

// Load -> (optional) filter -> split -> train -> evaluate -> persist.
// Writes reports/<dataset>/<embedding>-<classifier>.json, the checkpoint
// directory, and a resolved-config echo next to the checkpoint.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Scans a directory tree for report JSON files and renders the aggregate
// CSV (embedding, classifier, dataset, acc, f1_micro, f1_macro), metrics as
// percentages with one decimal. Duplicate grid cells are kept and listed in
// `duplicates`.
std::string aggregate_reports(const std::string& reports_dir,
                              std::vector<std::string>* duplicates = nullptr);

}  // namespace tunisent
