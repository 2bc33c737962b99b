#include "tunisent/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "tunisent/errors.hpp"
#include "tunisent/rng.hpp"
#include "tunisent/textproc.hpp"

namespace tunisent {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_string(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::Word2vecSelf:
      return "word2vec_self";
    case EmbeddingKind::PretrainedStatic:
      return "pretrained_static";
    case EmbeddingKind::Contextual:
      return "contextual";
  }
  return "word2vec_self";
}

std::optional<EmbeddingKind> parse_embedding_kind(std::string_view s) {
  if (s == "word2vec_self") return EmbeddingKind::Word2vecSelf;
  if (s == "pretrained_static") return EmbeddingKind::PretrainedStatic;
  if (s == "contextual") return EmbeddingKind::Contextual;
  return std::nullopt;
}

void TrainSpec::resolve() {
  if (max_len == 0) {
    max_len = embedding == EmbeddingKind::Contextual ? 128 : 64;
  }
  if (filters_per_width == 0) {
    filters_per_width = embedding == EmbeddingKind::Word2vecSelf ? 200 : 100;
  }
  if (epochs < 1) throw InvalidSpec("epochs must be >= 1");
  if (batch_size < 1) throw InvalidSpec("batch_size must be >= 1");
  if (dev_fraction < 0.0 || dev_fraction >= 1.0) {
    throw InvalidSpec("dev_fraction must lie in [0,1)");
  }
}

namespace {

ordered_json word2vec_json(const Word2vecParams& p) {
  ordered_json j;
  j["dim"] = p.dim;
  j["window"] = p.window;
  j["epochs"] = p.epochs;
  j["algorithm"] =
      p.algorithm == Word2vecAlgorithm::SkipGram ? "skipgram" : "cbow";
  j["min_count"] = p.min_count;
  j["negative"] = p.negative;
  j["learning_rate"] = p.learning_rate;
  j["seed"] = p.seed;
  return j;
}

Word2vecParams word2vec_from_json(const nlohmann::json& j) {
  Word2vecParams p;
  p.dim = j.value("dim", p.dim);
  p.window = j.value("window", p.window);
  p.epochs = j.value("epochs", p.epochs);
  if (j.contains("algorithm")) {
    const auto a = j["algorithm"].get<std::string>();
    if (a == "skipgram") p.algorithm = Word2vecAlgorithm::SkipGram;
    else if (a == "cbow") p.algorithm = Word2vecAlgorithm::Cbow;
    else throw InvalidSpec("unknown word2vec algorithm: " + a);
  }
  p.min_count = j.value("min_count", p.min_count);
  p.negative = j.value("negative", p.negative);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  p.seed = j.value("seed", p.seed);
  return p;
}

ordered_json spec_json(const TrainSpec& s) {
  ordered_json j;
  j["embedding"] = to_string(s.embedding);
  j["classifier"] = to_string(s.classifier);
  j["epochs"] = s.epochs;
  j["batch_size"] = s.batch_size;
  j["seed"] = s.seed;
  j["dataset_name"] = s.dataset_name;
  j["split_seed"] = s.split_seed;
  j["max_len"] = s.max_len;
  j["learning_rate"] = s.learning_rate;
  j["dropout_rate"] = s.dropout_rate;
  j["dev_fraction"] = s.dev_fraction;
  if (s.classifier == Architecture::Cnn) {
    j["filter_widths"] = s.filter_widths;
    j["filters_per_width"] = s.filters_per_width;
  } else {
    j["hidden_size"] = s.hidden_size;
  }
  switch (s.embedding) {
    case EmbeddingKind::Word2vecSelf:
      j["word2vec"] = word2vec_json(s.word2vec);
      break;
    case EmbeddingKind::PretrainedStatic:
      j["pretrained_path"] = s.pretrained_path;
      break;
    case EmbeddingKind::Contextual:
      j["model_dir"] = s.model_dir;
      j["contextual_mode"] = to_string(s.contextual_mode);
      break;
  }
  return j;
}

TrainSpec spec_from_json(const nlohmann::json& j) {
  TrainSpec s;
  if (j.contains("embedding")) {
    const auto e = parse_embedding_kind(j["embedding"].get<std::string>());
    if (!e) throw InvalidSpec("unknown embedding: " +
                              j["embedding"].get<std::string>());
    s.embedding = *e;
  }
  if (j.contains("classifier")) {
    const auto a = parse_architecture(j["classifier"].get<std::string>());
    if (!a) throw InvalidSpec("unknown classifier: " +
                              j["classifier"].get<std::string>());
    s.classifier = *a;
  }
  s.epochs = j.value("epochs", s.epochs);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.seed = j.value("seed", s.seed);
  s.dataset_name = j.value("dataset_name", s.dataset_name);
  s.split_seed = j.value("split_seed", s.split_seed);
  s.max_len = j.value("max_len", s.max_len);
  s.learning_rate = j.value("learning_rate", s.learning_rate);
  s.dropout_rate = j.value("dropout_rate", s.dropout_rate);
  s.dev_fraction = j.value("dev_fraction", s.dev_fraction);
  s.filter_widths = j.value("filter_widths", s.filter_widths);
  s.filters_per_width = j.value("filters_per_width", s.filters_per_width);
  s.hidden_size = j.value("hidden_size", s.hidden_size);
  if (j.contains("word2vec")) s.word2vec = word2vec_from_json(j["word2vec"]);
  s.pretrained_path = j.value("pretrained_path", s.pretrained_path);
  s.model_dir = j.value("model_dir", s.model_dir);
  if (j.contains("contextual_mode")) {
    const auto m =
        parse_contextual_mode(j["contextual_mode"].get<std::string>());
    if (!m) throw InvalidSpec("unknown contextual_mode");
    s.contextual_mode = *m;
  }
  return s;
}

class StaticSequenceEncoder final : public SequenceEncoder {
 public:
  StaticSequenceEncoder(Vocabulary vocab, EmbeddingMatrix matrix, int max_len,
                        std::string meta_json)
      : vocab_(std::move(vocab)),
        matrix_(std::move(matrix)),
        max_len_(max_len),
        meta_json_(std::move(meta_json)) {}

  int dim() const override { return matrix_.dim(); }
  int max_len() const override { return max_len_; }

  SequenceEncoding encode(std::string_view text) const override {
    return encode_static(token_surfaces(text), vocab_, matrix_, max_len_);
  }

  void save(const std::string& checkpoint_dir) const override {
    save_embedding(vocab_, matrix_,
                   (fs::path(checkpoint_dir) / "embedding").string(),
                   meta_json_);
    ordered_json j;
    j["kind"] = "static";
    j["max_len"] = max_len_;
    std::ofstream out(fs::path(checkpoint_dir) / "encoder.json");
    out << j.dump(2) << "\n";
  }

  const Vocabulary& vocab() const { return vocab_; }
  const EmbeddingMatrix& matrix() const { return matrix_; }

 private:
  Vocabulary vocab_;
  EmbeddingMatrix matrix_;
  int max_len_;
  std::string meta_json_;
};

class ContextualSequenceEncoder final : public SequenceEncoder {
 public:
  ContextualSequenceEncoder(std::shared_ptr<ContextualProvider> provider,
                            int max_len)
      : provider_(std::move(provider)), max_len_(max_len) {}

  int dim() const override { return provider_->dim(); }
  int max_len() const override { return max_len_; }

  SequenceEncoding encode(std::string_view text) const override {
    return provider_->encode(text, max_len_);
  }

  void save(const std::string& checkpoint_dir) const override {
    ordered_json j;
    j["kind"] = "contextual";
    j["max_len"] = max_len_;
    j["model_dir"] = provider_->checkpoint_dir();
    j["mode"] = to_string(provider_->mode());
    std::ofstream out(fs::path(checkpoint_dir) / "encoder.json");
    out << j.dump(2) << "\n";
  }

 private:
  std::shared_ptr<ContextualProvider> provider_;
  int max_len_;
};

// Encoding is read-only per comment, so it fans out across threads; slots
// are written by index, keeping the result order-deterministic.
std::vector<SequenceEncoding> encode_all(const SequenceEncoder& encoder,
                                         const std::vector<const Comment*>&
                                             comments) {
  std::vector<SequenceEncoding> out(comments.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (comments.size() < 64 || hw < 2) {
    for (std::size_t i = 0; i < comments.size(); ++i) {
      out[i] = encoder.encode(comments[i]->text);
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto worker = [&] {
    try {
      for (std::size_t i = next.fetch_add(1); i < comments.size();
           i = next.fetch_add(1)) {
        out[i] = encoder.encode(comments[i]->text);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> threads;
  const unsigned n_threads =
      std::min<unsigned>(hw, static_cast<unsigned>(comments.size()));
  threads.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::unique_ptr<Classifier> build_classifier(const TrainSpec& spec, int dim) {
  if (spec.classifier == Architecture::Cnn) {
    CnnConfig c;
    c.filter_widths = spec.filter_widths;
    c.filters_per_width = spec.filters_per_width;
    c.dropout_rate = spec.dropout_rate;
    return build_cnn(c, dim, spec.max_len, spec.seed);
  }
  BiLstmConfig c;
  c.hidden_size = spec.hidden_size;
  c.dropout_rate = spec.dropout_rate;
  return build_bilstm(c, dim, spec.seed);
}

}  // namespace

std::string TrainSpec::to_json() const { return spec_json(*this).dump(2); }

TrainSpec TrainSpec::from_json(const std::string& json_text) {
  return spec_from_json(nlohmann::json::parse(json_text));
}

std::unique_ptr<SequenceEncoder> make_static_encoder(Vocabulary vocab,
                                                     EmbeddingMatrix matrix,
                                                     int max_len,
                                                     std::string meta_json) {
  return std::make_unique<StaticSequenceEncoder>(
      std::move(vocab), std::move(matrix), max_len, std::move(meta_json));
}

std::unique_ptr<SequenceEncoder> make_contextual_encoder(
    std::shared_ptr<ContextualProvider> provider, int max_len) {
  return std::make_unique<ContextualSequenceEncoder>(std::move(provider),
                                                     max_len);
}

std::unique_ptr<SequenceEncoder> build_encoder(const TrainSpec& spec_in,
                                               const LabeledDataset& dataset) {
  TrainSpec spec = spec_in;
  spec.resolve();
  switch (spec.embedding) {
    case EmbeddingKind::Word2vecSelf: {
      Word2vecParams params = spec.word2vec;
      auto [vocab, matrix] = train_word2vec(dataset, params);
      ordered_json meta;
      meta["seed"] = params.seed;
      meta["hyperparameters"] = word2vec_json(params);
      return make_static_encoder(std::move(vocab), std::move(matrix),
                                 spec.max_len, meta.dump());
    }
    case EmbeddingKind::PretrainedStatic: {
      if (spec.pretrained_path.empty()) {
        throw ProviderUnavailable(
            "pretrained_static embedding needs pretrained_path");
      }
      try {
        auto [vocab, matrix] = load_pretrained(spec.pretrained_path);
        ordered_json meta;
        meta["source"] = spec.pretrained_path;
        return make_static_encoder(std::move(vocab), std::move(matrix),
                                   spec.max_len, meta.dump());
      } catch (const MissingFile&) {
        throw ProviderUnavailable("pretrained vector file not found: " +
                                  spec.pretrained_path);
      }
    }
    case EmbeddingKind::Contextual: {
      auto provider =
          ContextualProvider::load(spec.model_dir, spec.contextual_mode);
      return make_contextual_encoder(std::move(provider), spec.max_len);
    }
  }
  throw InvalidSpec("unknown embedding kind");
}

TrainedModel train(const TrainSpec& spec, const LabeledDataset& dataset) {
  TrainSpec resolved = spec;
  resolved.resolve();
  std::shared_ptr<SequenceEncoder> encoder = build_encoder(resolved, dataset);
  return train(resolved, dataset, std::move(encoder));
}

TrainedModel train(const TrainSpec& spec_in, const LabeledDataset& dataset,
                   std::shared_ptr<SequenceEncoder> encoder) {
  TrainSpec spec = spec_in;
  spec.resolve();
  if (spec.dataset_name.empty()) spec.dataset_name = dataset.name;

  const auto train_idx = dataset.train_indices();
  if (train_idx.empty()) {
    throw InvalidSpec("dataset has no training split; call split_dataset");
  }

  std::vector<const Comment*> comments;
  std::vector<Polarity> labels;
  comments.reserve(train_idx.size());
  labels.reserve(train_idx.size());
  for (std::size_t i : train_idx) {
    const Comment& c = dataset.comments[i];
    if (!c.label.has_value()) {
      throw InvalidSpec("training comment without a label: id=" + c.id);
    }
    comments.push_back(&c);
    labels.push_back(*c.label);
  }
  const std::vector<SequenceEncoding> encodings = encode_all(*encoder, comments);

  // Optional held-out dev set, carved from the Train split with its own
  // seed stream so the batch order stays unchanged when it is off.
  std::vector<std::size_t> order(encodings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::size_t> dev_positions;
  if (spec.dev_fraction > 0.0) {
    std::mt19937_64 dev_rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
    deterministic_shuffle(order, dev_rng);
    const auto n_dev = static_cast<std::size_t>(
        spec.dev_fraction * static_cast<double>(order.size()));
    dev_positions.assign(order.begin(), order.begin() + n_dev);
    order.erase(order.begin(), order.begin() + n_dev);
    if (order.empty()) {
      throw InvalidSpec("dev_fraction leaves no training examples");
    }
  }

  TrainedModel model;
  model.spec = spec;
  model.encoder = std::move(encoder);
  std::unique_ptr<Classifier> classifier =
      build_classifier(spec, model.encoder->dim());
  AdamOptimizer adam(classifier->param_count(), spec.learning_rate);
  std::mt19937_64 run_rng(spec.seed);

  Eigen::VectorXd grad;
  std::vector<const SequenceEncoding*> batch;
  std::vector<Polarity> batch_labels;
  const auto fill_batch = [&](const std::vector<std::size_t>& positions,
                              std::size_t at, std::size_t take) {
    batch.clear();
    batch_labels.clear();
    for (std::size_t k = 0; k < take; ++k) {
      batch.push_back(&encodings[positions[at + k]]);
      batch_labels.push_back(labels[positions[at + k]]);
    }
  };

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    deterministic_shuffle(order, run_rng);
    EpochLog epoch_log;
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(spec.batch_size)) {
      const std::size_t take = std::min<std::size_t>(
          static_cast<std::size_t>(spec.batch_size), order.size() - at);
      fill_batch(order, at, take);
      const double loss =
          classifier->loss_and_grad(batch, batch_labels, grad, &run_rng);
      if (!std::isfinite(loss)) {
        throw Divergence("non-finite loss in epoch " +
                         std::to_string(epoch + 1) + ", batch " +
                         std::to_string(epoch_log.batch_sizes.size() + 1));
      }
      adam.step(classifier->params(), grad);
      loss_sum += loss * static_cast<double>(take);
      seen += take;
      epoch_log.batch_sizes.push_back(static_cast<int>(take));
    }
    epoch_log.mean_loss = loss_sum / static_cast<double>(seen);
    if (!dev_positions.empty()) {
      double dev_sum = 0.0;
      for (std::size_t at = 0; at < dev_positions.size();
           at += static_cast<std::size_t>(spec.batch_size)) {
        const std::size_t take = std::min<std::size_t>(
            static_cast<std::size_t>(spec.batch_size),
            dev_positions.size() - at);
        fill_batch(dev_positions, at, take);
        dev_sum += classifier->loss_and_grad(batch, batch_labels, grad,
                                             nullptr) *
                   static_cast<double>(take);
      }
      epoch_log.dev_loss = dev_sum / static_cast<double>(dev_positions.size());
    }
    model.log.epochs.push_back(std::move(epoch_log));
  }
  model.classifier = std::move(classifier);
  return model;
}

namespace {

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["accuracy"] = r.accuracy;
  j["f1_micro"] = r.f1_micro;
  j["f1_macro"] = r.f1_macro;
  j["confusion"] = {
      {"tn", r.confusion.counts[0][0]},
      {"fp", r.confusion.counts[0][1]},
      {"fn", r.confusion.counts[1][0]},
      {"tp", r.confusion.counts[1][1]},
  };
  j["spec"] = spec_json(r.spec);
  j["wall_time_seconds"] = r.wall_time_seconds;
  j["split_seed"] = r.split_seed;
  return j;
}

}  // namespace

std::string EvalReport::to_json() const { return report_json(*this).dump(2); }

EvalReport EvalReport::from_json(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  EvalReport r;
  r.accuracy = j.at("accuracy").get<double>();
  r.f1_micro = j.at("f1_micro").get<double>();
  r.f1_macro = j.at("f1_macro").get<double>();
  const auto& c = j.at("confusion");
  r.confusion.counts[0][0] = c.at("tn").get<std::uint64_t>();
  r.confusion.counts[0][1] = c.at("fp").get<std::uint64_t>();
  r.confusion.counts[1][0] = c.at("fn").get<std::uint64_t>();
  r.confusion.counts[1][1] = c.at("tp").get<std::uint64_t>();
  r.spec = spec_from_json(j.at("spec"));
  r.wall_time_seconds = j.value("wall_time_seconds", 0.0);
  r.split_seed = j.value("split_seed", std::uint64_t{42});
  return r;
}

EvalReport evaluate(const Classifier& classifier,
                    const SequenceEncoder& encoder,
                    const LabeledDataset& dataset, const TrainSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const auto test_idx = dataset.test_indices();
  if (test_idx.empty()) throw EmptyTestSplit("dataset has no test split");

  std::vector<const Comment*> comments;
  std::vector<Polarity> gold;
  comments.reserve(test_idx.size());
  gold.reserve(test_idx.size());
  for (std::size_t i : test_idx) {
    const Comment& c = dataset.comments[i];
    if (!c.label.has_value()) {
      throw InvalidSpec("test comment without a label: id=" + c.id);
    }
    comments.push_back(&c);
    gold.push_back(*c.label);
  }
  const std::vector<SequenceEncoding> encodings =
      encode_all(encoder, comments);
  std::vector<Polarity> pred;
  pred.reserve(encodings.size());
  for (const auto& enc : encodings) {
    const auto [p_neg, p_pos] = classifier.predict(enc);
    pred.push_back(p_pos >= p_neg ? Polarity::Positive : Polarity::Negative);
  }

  EvalReport report;
  report.confusion = confusion(gold, pred);
  report.accuracy = accuracy(report.confusion);
  report.f1_micro = f1_micro(report.confusion);
  report.f1_macro = f1_macro(report.confusion);
  report.spec = spec;
  report.split_seed = spec.split_seed;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

EvalReport evaluate(const TrainedModel& model, const LabeledDataset& dataset) {
  return evaluate(*model.classifier, *model.encoder, dataset, model.spec);
}

void save_model(const TrainedModel& model, const std::string& dir) {
  fs::create_directories(dir);
  save_classifier(*model.classifier, dir);
  model.encoder->save(dir);
  std::ofstream spec_out(fs::path(dir) / "train_spec.json");
  spec_out << model.spec.to_json() << "\n";
}

LoadedModel load_model(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::is_directory(base)) {
    throw ProviderUnavailable("no checkpoint directory at " + dir);
  }
  LoadedModel loaded;
  loaded.classifier = load_classifier(dir);

  std::ifstream spec_in(base / "train_spec.json");
  if (spec_in) {
    std::ostringstream buf;
    buf << spec_in.rdbuf();
    loaded.spec = TrainSpec::from_json(buf.str());
  }

  std::ifstream enc_in(base / "encoder.json");
  if (!enc_in) throw ProviderUnavailable("missing encoder.json in " + dir);
  nlohmann::json enc = nlohmann::json::parse(enc_in);
  const std::string kind = enc.at("kind").get<std::string>();
  const int max_len = enc.at("max_len").get<int>();
  if (kind == "static") {
    auto [vocab, matrix] = load_embedding((base / "embedding").string());
    loaded.encoder =
        make_static_encoder(std::move(vocab), std::move(matrix), max_len);
  } else if (kind == "contextual") {
    const auto mode =
        parse_contextual_mode(enc.at("mode").get<std::string>());
    auto provider = ContextualProvider::load(
        enc.value("model_dir", std::string{}),
        mode.value_or(ContextualMode::FullEncoder));
    loaded.encoder = make_contextual_encoder(std::move(provider), max_len);
  } else {
    throw FormatError(dir + ": unknown encoder kind '" + kind + "'", 0);
  }
  return loaded;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

ExperimentConfig ExperimentConfig::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw InvalidSpec("experiment config is not a JSON object");
  }
  ExperimentConfig cfg;
  const auto& d = j.contains("dataset") && j["dataset"].is_object()
                      ? j["dataset"]
                      : j;
  cfg.dataset_path = d.value("path", d.value("dataset_path", std::string{}));
  if (cfg.dataset_path.empty()) {
    throw InvalidSpec("experiment config needs dataset.path");
  }
  if (d.contains("format")) {
    const auto f = parse_format(d["format"].get<std::string>());
    if (!f) throw InvalidSpec("unknown dataset format");
    cfg.format = f;
  }
  cfg.dataset_name = d.value("name", std::string{});
  cfg.filter_romanized = d.value("filter_romanized", false);

  const std::uint64_t split_seed =
      d.value("split_seed", j.value("split_seed", std::uint64_t{42}));
  if (d.contains("split")) {
    const auto& sp = d["split"];
    if (sp.is_string()) {
      cfg.split = SplitSpec::parse(sp.get<std::string>(), split_seed);
    } else if (sp.is_object() && sp.contains("test_fraction")) {
      cfg.split =
          SplitSpec::fraction(sp["test_fraction"].get<double>(), split_seed);
    } else if (sp.is_object() && sp.contains("n_train") &&
               sp.contains("n_test")) {
      cfg.split = SplitSpec::exact(sp["n_train"].get<std::uint64_t>(),
                                   sp["n_test"].get<std::uint64_t>(),
                                   split_seed);
    } else {
      throw InvalidSpec("unrecognized dataset.split");
    }
  } else {
    cfg.split.seed = split_seed;
  }

  cfg.spec = spec_from_json(j);
  cfg.spec.split_seed = split_seed;
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  ordered_json d;
  d["path"] = dataset_path;
  d["format"] = to_string(format.value_or(infer_format(dataset_path)));
  d["name"] = dataset_name;
  d["filter_romanized"] = filter_romanized;
  if (split.counts.has_value()) {
    d["split"] = {{"n_train", split.counts->first},
                  {"n_test", split.counts->second}};
  } else if (split.test_fraction.has_value()) {
    d["split"] = {{"test_fraction", *split.test_fraction}};
  }
  d["split_seed"] = split.seed;
  j["dataset"] = d;
  ordered_json spec = spec_json(this->spec);
  for (auto& [key, value] : spec.items()) j[key] = value;
  j["out_dir"] = out_dir;
  return j.dump(2);
}

ExperimentResult run_experiment(const ExperimentConfig& config_in) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig config = config_in;

  LabeledDataset dataset = load_dataset(
      config.dataset_path,
      config.format.value_or(infer_format(config.dataset_path)));
  if (!config.dataset_name.empty()) dataset.name = config.dataset_name;
  config.dataset_name = dataset.name;
  if (config.filter_romanized) dataset = filter_romanized(dataset);
  dataset = split_dataset(dataset, config.split);

  config.spec.dataset_name = dataset.name;
  config.spec.split_seed = config.split.seed;
  config.spec.resolve();

  TrainedModel model = train(config.spec, dataset);
  EvalReport report = evaluate(model, dataset);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  const std::string cell =
      to_string(config.spec.embedding) + "-" + to_string(config.spec.classifier);
  const fs::path report_path =
      fs::path(config.out_dir) / "reports" / dataset.name / (cell + ".json");
  const fs::path ckpt_dir =
      fs::path(config.out_dir) / "checkpoints" / dataset.name / cell;

  fs::create_directories(report_path.parent_path());
  std::ofstream rf(report_path);
  rf << report.to_json() << "\n";

  save_model(model, ckpt_dir.string());
  std::ofstream echo(ckpt_dir / "resolved_config.json");
  echo << config.to_json() << "\n";

  return ExperimentResult{std::move(report), report_path.string(),
                          ckpt_dir.string()};
}

std::string aggregate_reports(const std::string& reports_dir,
                              std::vector<std::string>* duplicates) {
  if (!fs::is_directory(reports_dir)) throw MissingFile(reports_dir);
  struct Row {
    std::string embedding, classifier, dataset;
    double acc, micro, macro;
  };
  std::vector<Row> rows;
  for (const auto& entry : fs::recursive_directory_iterator(reports_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") {
      continue;
    }
    std::ifstream in(entry.path());
    std::ostringstream buf;
    buf << in.rdbuf();
    EvalReport r;
    try {
      r = EvalReport::from_json(buf.str());
    } catch (const std::exception&) {
      continue;  // not a report file
    }
    rows.push_back(Row{to_string(r.spec.embedding),
                       to_string(r.spec.classifier), r.spec.dataset_name,
                       r.accuracy, r.f1_micro, r.f1_macro});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.dataset, a.embedding, a.classifier) <
           std::tie(b.dataset, b.embedding, b.classifier);
  });
  if (duplicates != nullptr) {
    std::map<std::string, int> seen;
    for (const auto& r : rows) {
      const std::string key = r.embedding + "," + r.classifier + "," + r.dataset;
      if (++seen[key] == 2) duplicates->push_back(key);
    }
  }
  std::ostringstream csv;
  csv << "embedding,classifier,dataset,acc,f1_micro,f1_macro\n";
  csv.setf(std::ios::fixed);
  csv.precision(1);
  for (const auto& r : rows) {
    csv << r.embedding << "," << r.classifier << "," << r.dataset << ","
        << r.acc * 100.0 << "," << r.micro * 100.0 << "," << r.macro * 100.0
        << "\n";
  }
  return csv.str();
}

}  // namespace tunisent
