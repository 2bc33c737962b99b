#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tunisent/classifier.hpp"
#include "tunisent/contextual.hpp"
#include "tunisent/corpus.hpp"
#include "tunisent/errors.hpp"
#include "tunisent/metrics.hpp"
#include "tunisent/textproc.hpp"
#include "tunisent/training.hpp"
#include "tunisent/word2vec.hpp"

namespace py = pybind11;
using namespace tunisent;

namespace {

std::vector<Polarity> to_polarities(const std::vector<std::string>& labels) {
  std::vector<Polarity> out;
  out.reserve(labels.size());
  for (const auto& s : labels) {
    const auto p = parse_polarity(s);
    if (!p) throw InvalidSpec("unknown polarity label: " + s);
    out.push_back(*p);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_tunisent, m) {
  m.doc() = "Sentiment analysis toolkit for Romanized Tunisian (TUNIZI) text";

  py::register_exception<ProviderUnavailable>(m, "ProviderUnavailable");
  py::register_exception<InputError>(m, "InputError");

  // --- text processing ---
  py::class_<Token>(m, "Token")
      .def_readonly("surface", &Token::surface)
      .def_readonly("start", &Token::start)
      .def_readonly("end", &Token::end)
      .def("__repr__", [](const Token& t) {
        return "Token('" + t.surface + "', " + std::to_string(t.start) + ", " +
               std::to_string(t.end) + ")";
      });

  py::enum_<ScriptClass>(m, "ScriptClass")
      .value("ROMANIZED", ScriptClass::Romanized)
      .value("ARABIC", ScriptClass::Arabic)
      .value("MIXED", ScriptClass::Mixed)
      .value("NEUTRAL", ScriptClass::Neutral);

  m.def("tokenize", [](const std::string& text) { return tokenize(text); });
  m.def("token_surfaces",
        [](const std::string& text) { return token_surfaces(text); });
  m.def("classify_script",
        [](const std::string& text) { return classify_script(text); });
  m.def(
      "translit_candidates",
      [](const std::string& token, const std::string& table_path) {
        if (table_path.empty()) return translit_candidates(token);
        return TranslitTable::load(table_path).candidates(token);
      },
      py::arg("token"), py::arg("table_path") = "");

  // --- corpus ---
  py::enum_<Polarity>(m, "Polarity")
      .value("NEGATIVE", Polarity::Negative)
      .value("POSITIVE", Polarity::Positive);

  py::enum_<SplitTag>(m, "SplitTag")
      .value("UNASSIGNED", SplitTag::Unassigned)
      .value("TRAIN", SplitTag::Train)
      .value("TEST", SplitTag::Test);

  py::class_<Comment>(m, "Comment")
      .def(py::init([](std::string id, std::string text,
                       std::optional<Polarity> label) {
             return Comment{std::move(id), std::move(text), label};
           }),
           py::arg("id"), py::arg("text"), py::arg("label") = std::nullopt)
      .def_readwrite("id", &Comment::id)
      .def_readwrite("text", &Comment::text)
      .def_readwrite("label", &Comment::label);

  py::class_<CorpusStats>(m, "CorpusStats")
      .def_readonly("n_words", &CorpusStats::n_words)
      .def_readonly("n_unique_words", &CorpusStats::n_unique_words)
      .def_readonly("n_comments", &CorpusStats::n_comments)
      .def_readonly("n_positive", &CorpusStats::n_positive)
      .def_readonly("n_negative", &CorpusStats::n_negative)
      .def_readonly("n_train", &CorpusStats::n_train)
      .def_readonly("n_test", &CorpusStats::n_test);

  py::class_<LabeledDataset>(m, "LabeledDataset")
      .def(py::init([](std::string name, std::vector<Comment> comments) {
             return LabeledDataset(std::move(name), std::move(comments));
           }),
           py::arg("name"), py::arg("comments"))
      .def_readwrite("name", &LabeledDataset::name)
      .def_readonly("comments", &LabeledDataset::comments)
      .def_readonly("split", &LabeledDataset::split)
      .def_readonly("stats", &LabeledDataset::stats)
      .def("__len__", &LabeledDataset::size)
      .def("has_split", &LabeledDataset::has_split)
      .def("train_indices", &LabeledDataset::train_indices)
      .def("test_indices", &LabeledDataset::test_indices);

  py::class_<SplitSpec>(m, "SplitSpec")
      .def_static("fraction", &SplitSpec::fraction, py::arg("f"),
                  py::arg("seed") = 42)
      .def_static("exact", &SplitSpec::exact, py::arg("n_train"),
                  py::arg("n_test"), py::arg("seed") = 42)
      .def_static("preset_tunizi", &SplitSpec::preset_tunizi,
                  py::arg("seed") = 42)
      .def_static("preset_tsac_tunizi", &SplitSpec::preset_tsac_tunizi,
                  py::arg("seed") = 42)
      .def_readwrite("seed", &SplitSpec::seed);

  m.def(
      "load_dataset",
      [](const std::string& path, const std::string& format,
         bool require_labels) {
        LoadOptions options;
        options.require_labels = require_labels;
        if (format.empty()) return load_dataset(path, options);
        const auto f = parse_format(format);
        if (!f) throw InvalidSpec("unknown format: " + format);
        return load_dataset(path, *f, options);
      },
      py::arg("path"), py::arg("format") = "",
      py::arg("require_labels") = true);
  m.def(
      "save_dataset",
      [](const LabeledDataset& dataset, const std::string& path,
         const std::string& format) {
        save_dataset(dataset, path,
                     format.empty()
                         ? infer_format(path)
                         : parse_format(format).value_or(infer_format(path)));
      },
      py::arg("dataset"), py::arg("path"), py::arg("format") = "");
  m.def("filter_romanized", &filter_romanized);
  m.def("split_dataset", &split_dataset);
  m.def("compute_stats", &compute_stats, py::arg("dataset"),
        py::arg("lowercase") = false);

  // --- metrics ---
  py::class_<ConfusionMatrix>(m, "ConfusionMatrix")
      .def("total", &ConfusionMatrix::total)
      .def("correct", &ConfusionMatrix::correct)
      .def("counts", [](const ConfusionMatrix& cm) {
        return std::vector<std::vector<std::uint64_t>>{
            {cm.counts[0][0], cm.counts[0][1]},
            {cm.counts[1][0], cm.counts[1][1]}};
      });

  const auto metric_pair =
      [](const std::vector<Polarity>& gold, const std::vector<Polarity>& pred,
         double (*fn)(std::span<const Polarity>, std::span<const Polarity>)) {
        return fn(gold, pred);
      };
  m.def("accuracy", [metric_pair](const std::vector<Polarity>& g,
                                  const std::vector<Polarity>& p) {
    return metric_pair(g, p, &accuracy);
  });
  m.def("f1_micro", [metric_pair](const std::vector<Polarity>& g,
                                  const std::vector<Polarity>& p) {
    return metric_pair(g, p, &f1_micro);
  });
  m.def("f1_macro", [metric_pair](const std::vector<Polarity>& g,
                                  const std::vector<Polarity>& p) {
    return metric_pair(g, p, &f1_macro);
  });
  m.def("accuracy_labels",
        [](const std::vector<std::string>& g, const std::vector<std::string>& p) {
          return accuracy(to_polarities(g), to_polarities(p));
        });
  m.def("confusion",
        [](const std::vector<Polarity>& g, const std::vector<Polarity>& p) {
          return confusion(g, p);
        });

  // --- embeddings ---
  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<>())
      .def("add", &Vocabulary::add)
      .def("lookup", &Vocabulary::lookup)
      .def("contains", &Vocabulary::contains)
      .def("__len__", &Vocabulary::size)
      .def("token", &Vocabulary::token)
      .def("save", &Vocabulary::save)
      .def_static("load", &Vocabulary::load)
      .def_readonly_static("PAD", &Vocabulary::kPad)
      .def_readonly_static("UNK", &Vocabulary::kUnk);

  py::class_<EmbeddingMatrix>(m, "EmbeddingMatrix")
      .def_property_readonly(
          "rows", [](const EmbeddingMatrix& e) { return e.rows; })
      .def_property_readonly("dim", &EmbeddingMatrix::dim)
      .def_property_readonly("count", &EmbeddingMatrix::count);

  py::class_<SequenceEncoding>(m, "SequenceEncoding")
      .def_readonly("max_len", &SequenceEncoding::max_len)
      .def_readonly("n_real", &SequenceEncoding::n_real)
      .def_readonly("indices", &SequenceEncoding::indices)
      .def_property_readonly(
          "vectors", [](const SequenceEncoding& e) { return e.vectors; })
      .def("mask", &SequenceEncoding::mask)
      .def("padded", &SequenceEncoding::padded);

  py::enum_<Word2vecAlgorithm>(m, "Word2vecAlgorithm")
      .value("SKIPGRAM", Word2vecAlgorithm::SkipGram)
      .value("CBOW", Word2vecAlgorithm::Cbow);

  py::class_<Word2vecParams>(m, "Word2vecParams")
      .def(py::init<>())
      .def_readwrite("dim", &Word2vecParams::dim)
      .def_readwrite("window", &Word2vecParams::window)
      .def_readwrite("epochs", &Word2vecParams::epochs)
      .def_readwrite("algorithm", &Word2vecParams::algorithm)
      .def_readwrite("min_count", &Word2vecParams::min_count)
      .def_readwrite("negative", &Word2vecParams::negative)
      .def_readwrite("learning_rate", &Word2vecParams::learning_rate)
      .def_readwrite("seed", &Word2vecParams::seed);

  m.def(
      "train_word2vec",
      [](const std::vector<std::vector<std::string>>& sentences,
         const Word2vecParams& params) {
        auto result = train_word2vec(sentences, params);
        return py::make_tuple(std::move(result.vocab),
                              std::move(result.matrix));
      },
      py::arg("sentences"), py::arg("params") = Word2vecParams{});
  m.def(
      "train_word2vec_dataset",
      [](const LabeledDataset& dataset, const Word2vecParams& params) {
        auto result = train_word2vec(dataset, params);
        return py::make_tuple(std::move(result.vocab),
                              std::move(result.matrix));
      },
      py::arg("dataset"), py::arg("params") = Word2vecParams{});
  m.def("load_pretrained", [](const std::string& path) {
    auto [vocab, matrix] = load_pretrained(path);
    return py::make_tuple(std::move(vocab), std::move(matrix));
  });
  m.def("encode_static", &encode_static);
  m.def("cosine_similarity", &cosine_similarity);

  // --- contextual ---
  py::enum_<ContextualMode>(m, "ContextualMode")
      .value("EMBEDDING_LAYER_ONLY", ContextualMode::EmbeddingLayerOnly)
      .value("FULL_ENCODER", ContextualMode::FullEncoder);

  py::class_<WordPieceTokenizer>(m, "WordPieceTokenizer")
      .def_static("from_file", &WordPieceTokenizer::from_file, py::arg("path"),
                  py::arg("do_lower_case") = false)
      .def("word_pieces",
           [](const WordPieceTokenizer& t, const std::string& w) {
             return t.word_pieces(w);
           })
      .def("word_piece_surfaces",
           [](const WordPieceTokenizer& t, const std::string& w) {
             return t.word_piece_surfaces(w);
           })
      .def("encode_text", [](const WordPieceTokenizer& t,
                             const std::string& s) { return t.encode_text(s); })
      .def_property_readonly("piece_count", &WordPieceTokenizer::piece_count);

  py::class_<ContextualProvider, std::shared_ptr<ContextualProvider>>(
      m, "ContextualProvider")
      .def_static("load", &ContextualProvider::load, py::arg("dir") = "",
                  py::arg("mode") = ContextualMode::FullEncoder)
      .def_property_readonly("dim", &ContextualProvider::dim)
      .def("encode", [](const ContextualProvider& p, const std::string& text,
                        int max_len) { return p.encode(text, max_len); });

  // --- classifiers ---
  py::enum_<Architecture>(m, "Architecture")
      .value("CNN", Architecture::Cnn)
      .value("BILSTM", Architecture::BiLstm);

  py::class_<CnnConfig>(m, "CnnConfig")
      .def(py::init<>())
      .def_readwrite("filter_widths", &CnnConfig::filter_widths)
      .def_readwrite("filters_per_width", &CnnConfig::filters_per_width)
      .def_readwrite("dropout_rate", &CnnConfig::dropout_rate);

  py::class_<BiLstmConfig>(m, "BiLstmConfig")
      .def(py::init<>())
      .def_readwrite("hidden_size", &BiLstmConfig::hidden_size)
      .def_readwrite("dropout_rate", &BiLstmConfig::dropout_rate);

  py::class_<Classifier, std::shared_ptr<Classifier>>(m, "Classifier")
      .def_property_readonly("architecture", &Classifier::architecture)
      .def_property_readonly("input_dim", &Classifier::input_dim)
      .def_property_readonly("feature_dim", &Classifier::feature_dim)
      .def_property_readonly("param_count", &Classifier::param_count)
      .def("predict", &Classifier::predict)
      .def("get_params",
           [](const Classifier& c) -> Eigen::VectorXd { return c.params(); })
      .def("set_params",
           [](Classifier& c, const Eigen::VectorXd& p) {
             if (p.size() != c.params().size()) {
               throw DimensionMismatch("parameter vector size mismatch");
             }
             c.params() = p;
           })
      .def("tensor_names", [](const Classifier& c) {
        std::vector<std::string> names;
        for (const auto& t : c.layout()) names.push_back(t.name);
        return names;
      });

  m.def(
      "build_cnn",
      [](const CnnConfig& config, int input_dim, int max_len,
         std::uint64_t seed) -> std::shared_ptr<Classifier> {
        return build_cnn(config, input_dim, max_len, seed);
      },
      py::arg("config"), py::arg("input_dim"), py::arg("max_len") = 64,
      py::arg("seed") = 42);
  m.def(
      "build_bilstm",
      [](const BiLstmConfig& config, int input_dim,
         std::uint64_t seed) -> std::shared_ptr<Classifier> {
        return build_bilstm(config, input_dim, seed);
      },
      py::arg("config"), py::arg("input_dim"), py::arg("seed") = 42);
  m.def("save_classifier",
        [](const Classifier& c, const std::string& dir) {
          save_classifier(c, dir);
        });
  m.def("load_classifier",
        [](const std::string& dir) -> std::shared_ptr<Classifier> {
          return load_classifier(dir);
        });

  // --- training ---
  py::enum_<EmbeddingKind>(m, "EmbeddingKind")
      .value("WORD2VEC_SELF", EmbeddingKind::Word2vecSelf)
      .value("PRETRAINED_STATIC", EmbeddingKind::PretrainedStatic)
      .value("CONTEXTUAL", EmbeddingKind::Contextual);

  py::class_<TrainSpec>(m, "TrainSpec")
      .def(py::init<>())
      .def_readwrite("embedding", &TrainSpec::embedding)
      .def_readwrite("classifier", &TrainSpec::classifier)
      .def_readwrite("epochs", &TrainSpec::epochs)
      .def_readwrite("batch_size", &TrainSpec::batch_size)
      .def_readwrite("seed", &TrainSpec::seed)
      .def_readwrite("dataset_name", &TrainSpec::dataset_name)
      .def_readwrite("split_seed", &TrainSpec::split_seed)
      .def_readwrite("max_len", &TrainSpec::max_len)
      .def_readwrite("learning_rate", &TrainSpec::learning_rate)
      .def_readwrite("dropout_rate", &TrainSpec::dropout_rate)
      .def_readwrite("dev_fraction", &TrainSpec::dev_fraction)
      .def_readwrite("filter_widths", &TrainSpec::filter_widths)
      .def_readwrite("filters_per_width", &TrainSpec::filters_per_width)
      .def_readwrite("hidden_size", &TrainSpec::hidden_size)
      .def_readwrite("word2vec", &TrainSpec::word2vec)
      .def_readwrite("pretrained_path", &TrainSpec::pretrained_path)
      .def_readwrite("model_dir", &TrainSpec::model_dir)
      .def_readwrite("contextual_mode", &TrainSpec::contextual_mode)
      .def("resolve", &TrainSpec::resolve)
      .def("to_json", &TrainSpec::to_json);

  py::class_<EpochLog>(m, "EpochLog")
      .def_readonly("mean_loss", &EpochLog::mean_loss)
      .def_readonly("dev_loss", &EpochLog::dev_loss)
      .def_readonly("batch_sizes", &EpochLog::batch_sizes);

  py::class_<TrainingLog>(m, "TrainingLog")
      .def_readonly("epochs", &TrainingLog::epochs);

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_readonly("spec", &TrainedModel::spec)
      .def_readonly("classifier", &TrainedModel::classifier)
      .def_readonly("log", &TrainedModel::log)
      .def("encode",
           [](const TrainedModel& mdl, const std::string& text) {
             return mdl.encoder->encode(text);
           })
      .def("save", [](const TrainedModel& mdl, const std::string& dir) {
        save_model(mdl, dir);
      });

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("accuracy", &EvalReport::accuracy)
      .def_readonly("f1_micro", &EvalReport::f1_micro)
      .def_readonly("f1_macro", &EvalReport::f1_macro)
      .def_readonly("confusion", &EvalReport::confusion)
      .def_readonly("spec", &EvalReport::spec)
      .def_readonly("wall_time_seconds", &EvalReport::wall_time_seconds)
      .def_readonly("split_seed", &EvalReport::split_seed)
      .def("to_json", &EvalReport::to_json);

  m.def("train",
        [](const TrainSpec& spec, const LabeledDataset& dataset) {
          return train(spec, dataset);
        });
  m.def("evaluate",
        [](const TrainedModel& model, const LabeledDataset& dataset) {
          return evaluate(model, dataset);
        });
  m.def("run_experiment", [](const std::string& config_path) {
    const auto result = run_experiment(ExperimentConfig::from_file(config_path));
    return py::make_tuple(result.report, result.report_path,
                          result.checkpoint_dir);
  });
  m.def(
      "aggregate_reports",
      [](const std::string& dir) { return aggregate_reports(dir); },
      py::arg("reports_dir"));
}
