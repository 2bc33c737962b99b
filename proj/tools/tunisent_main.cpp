#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tunisent/corpus.hpp"
#include "tunisent/errors.hpp"
#include "tunisent/textproc.hpp"
#include "tunisent/training.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Exit codes: 0 success, 2 input/schema error, 3 environment/provider
// error, 1 internal error.
constexpr int kOk = 0;
constexpr int kInternalError = 1;
constexpr int kInputError = 2;
constexpr int kProviderError = 3;

tunisent::DatasetFormat resolve_format(const std::string& flag,
                                       const std::string& path) {
  if (flag.empty()) return tunisent::infer_format(path);
  const auto f = tunisent::parse_format(flag);
  if (!f) throw tunisent::InvalidSpec("unknown --format '" + flag + "'");
  return *f;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tunisent::InputError("cannot write " + path);
  out << text;
}

// Resolved-config echo written next to every file output.
void write_echo(const std::string& output_path, const ordered_json& resolved) {
  write_text(output_path + ".resolved.json", resolved.dump(2) + "\n");
}

ordered_json stats_json(const tunisent::CorpusStats& s) {
  ordered_json j;
  j["n_words"] = s.n_words;
  j["n_unique_words"] = s.n_unique_words;
  j["n_comments"] = s.n_comments;
  j["n_negative"] = s.n_negative;
  j["n_positive"] = s.n_positive;
  j["n_train"] = s.n_train;
  j["n_test"] = s.n_test;
  return j;
}

struct StatsArgs {
  std::string path, format;
  bool lowercase = false;
};

int cmd_stats(const StatsArgs& args) {
  const auto dataset = tunisent::load_dataset(
      args.path, resolve_format(args.format, args.path));
  const auto stats = tunisent::compute_stats(dataset, args.lowercase);
  std::cout << stats_json(stats).dump(2) << "\n";
  return kOk;
}

struct FilterArgs {
  std::string in_path, out_path, format;
};

int cmd_filter(const FilterArgs& args) {
  const auto in_format = resolve_format(args.format, args.in_path);
  const auto dataset = tunisent::load_dataset(args.in_path, in_format);
  const auto filtered = tunisent::filter_romanized(dataset);
  const auto out_format =
      args.format.empty() ? tunisent::infer_format(args.out_path) : in_format;
  tunisent::save_dataset(filtered, args.out_path, out_format);

  ordered_json echo;
  echo["subcommand"] = "filter";
  echo["input"] = args.in_path;
  echo["output"] = args.out_path;
  echo["format"] = tunisent::to_string(out_format);
  echo["kept"] = filtered.size();
  echo["dropped"] = dataset.size() - filtered.size();
  write_echo(args.out_path, echo);

  std::cerr << "kept " << filtered.size() << " of " << dataset.size()
            << " comments\n";
  return kOk;
}

struct TrainArgs {
  std::string config_path, out_dir, split, embedding, classifier, format;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_len;
};

int cmd_train(const TrainArgs& args, bool verbose) {
  auto config = tunisent::ExperimentConfig::from_file(args.config_path);
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  if (args.seed.has_value()) config.spec.seed = *args.seed;
  if (!args.split.empty()) {
    config.split = tunisent::SplitSpec::parse(
        args.split, args.seed.value_or(config.split.seed));
  }
  if (!args.embedding.empty()) {
    const auto e = tunisent::parse_embedding_kind(args.embedding);
    if (!e) throw tunisent::InvalidSpec("unknown --embedding");
    config.spec.embedding = *e;
    config.spec.filters_per_width = 0;  // re-resolve the per-embedding default
    config.spec.max_len = 0;
  }
  if (!args.classifier.empty()) {
    const auto a = tunisent::parse_architecture(args.classifier);
    if (!a) throw tunisent::InvalidSpec("unknown --classifier");
    config.spec.classifier = *a;
  }
  if (args.max_len.has_value()) config.spec.max_len = *args.max_len;
  if (!args.format.empty()) {
    config.format = resolve_format(args.format, config.dataset_path);
  }

  const auto result = tunisent::run_experiment(config);
  if (verbose) {
    std::cerr << "report: " << result.report_path << "\n"
              << "checkpoint: " << result.checkpoint_dir << "\n";
  }
  std::cout << result.report.to_json() << "\n";
  return kOk;
}

struct EvalArgs {
  std::string checkpoint, dataset, format;
};

int cmd_eval(const EvalArgs& args) {
  auto model = tunisent::load_model(args.checkpoint);
  auto dataset = tunisent::load_dataset(
      args.dataset, resolve_format(args.format, args.dataset));
  // The whole file is treated as held-out data.
  dataset.split.assign(dataset.size(), tunisent::SplitTag::Test);
  model.spec.dataset_name = dataset.name;
  const auto report =
      tunisent::evaluate(*model.classifier, *model.encoder, dataset,
                         model.spec);
  std::cout << report.to_json() << "\n";
  return kOk;
}

struct PredictArgs {
  std::string checkpoint, input, out_path, format;
};

int cmd_predict(const PredictArgs& args) {
  const auto model = tunisent::load_model(args.checkpoint);

  std::string csv = "id,polarity,probability\n";
  try {
    tunisent::LoadOptions options;
    options.require_labels = false;
    const auto dataset = tunisent::load_dataset(
        args.input, resolve_format(args.format, args.input), options);
    for (const auto& comment : dataset.comments) {
      const auto [p_neg, p_pos] =
          model.classifier->predict(model.encoder->encode(comment.text));
      const bool positive = p_pos >= p_neg;
      csv += comment.id;
      csv += positive ? ",positive," : ",negative,";
      csv += std::to_string(positive ? p_pos : p_neg);
      csv += "\n";
    }
  } catch (const tunisent::EmptyDataset&) {
    // empty input -> header-only CSV, success
  }

  if (args.out_path.empty()) {
    std::cout << csv;
  } else {
    write_text(args.out_path, csv);
    ordered_json echo;
    echo["subcommand"] = "predict";
    echo["checkpoint"] = args.checkpoint;
    echo["input"] = args.input;
    echo["output"] = args.out_path;
    write_echo(args.out_path, echo);
  }
  return kOk;
}

struct ReportArgs {
  std::string reports_dir, out_path;
};

int cmd_report(const ReportArgs& args) {
  std::vector<std::string> duplicates;
  const std::string csv =
      tunisent::aggregate_reports(args.reports_dir, &duplicates);
  for (const auto& d : duplicates) {
    std::cerr << "duplicate grid cell: " << d << "\n";
  }
  if (args.out_path.empty()) {
    std::cout << csv;
  } else {
    write_text(args.out_path, csv);
    ordered_json echo;
    echo["subcommand"] = "report";
    echo["reports_dir"] = args.reports_dir;
    echo["output"] = args.out_path;
    write_echo(args.out_path, echo);
  }
  return kOk;
}

struct TranslitArgs {
  std::vector<std::string> tokens;
  std::string table_path;
};

int cmd_translit(const TranslitArgs& args) {
  const tunisent::TranslitTable table =
      args.table_path.empty() ? tunisent::TranslitTable::builtin()
                              : tunisent::TranslitTable::load(args.table_path);
  for (const auto& token : args.tokens) {
    for (const auto& candidate : table.candidates(token)) {
      std::cout << token << "\t" << candidate << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentiment analysis toolkit for Romanized Tunisian (TUNIZI) "
               "social-media comments"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "extra progress output on stderr");

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "corpus statistics as JSON");
  stats->add_option("dataset", stats_args.path, "dataset file")->required();
  stats->add_option("--format", stats_args.format, "csv|tsv|jsonl");
  stats->add_flag("--lowercase", stats_args.lowercase,
                  "lowercase tokens for the unique-word count");

  FilterArgs filter_args;
  auto* filter = app.add_subcommand(
      "filter", "keep only comments with no Arabic-script codepoints");
  filter->add_option("input", filter_args.in_path, "input dataset")
      ->required();
  filter->add_option("output", filter_args.out_path, "output dataset")
      ->required();
  filter->add_option("--format", filter_args.format, "csv|tsv|jsonl");

  TrainArgs train_args;
  auto* train = app.add_subcommand(
      "train", "train one grid cell from a JSON config, then evaluate");
  train->add_option("config", train_args.config_path, "experiment config")
      ->required();
  train->add_option("--out", train_args.out_dir, "output directory override");
  train->add_option("--seed", train_args.seed, "run seed override");
  train->add_option("--split", train_args.split,
                    "preset-tunizi|preset-tsac-tunizi|fraction:F");
  train->add_option("--embedding", train_args.embedding,
                    "word2vec_self|pretrained_static|contextual");
  train->add_option("--classifier", train_args.classifier, "cnn|bilstm");
  train->add_option("--max-len", train_args.max_len, "sequence length cap");
  train->add_option("--format", train_args.format, "csv|tsv|jsonl");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand(
      "eval", "score a labeled dataset with a trained checkpoint");
  eval->add_option("checkpoint", eval_args.checkpoint, "checkpoint directory")
      ->required();
  eval->add_option("dataset", eval_args.dataset, "labeled dataset")
      ->required();
  eval->add_option("--format", eval_args.format, "csv|tsv|jsonl");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand(
      "predict", "per-comment polarity and probability as CSV");
  predict
      ->add_option("checkpoint", predict_args.checkpoint,
                   "checkpoint directory")
      ->required();
  predict->add_option("input", predict_args.input, "comments file")
      ->required();
  predict->add_option("--out", predict_args.out_path,
                      "write CSV here instead of stdout");
  predict->add_option("--format", predict_args.format, "csv|tsv|jsonl");

  ReportArgs report_args;
  auto* report = app.add_subcommand(
      "report", "aggregate report JSONs into one results CSV");
  report->add_option("reports", report_args.reports_dir, "reports directory")
      ->required();
  report->add_option("--out", report_args.out_path,
                     "write CSV here instead of stdout");

  TranslitArgs translit_args;
  auto* translit = app.add_subcommand(
      "translit", "Arabic-character candidates for Romanized tokens");
  translit->add_option("tokens", translit_args.tokens, "tokens to map")
      ->required();
  translit->add_option("--table", translit_args.table_path,
                       "override the built-in correspondence table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) return cmd_stats(stats_args);
    if (filter->parsed()) return cmd_filter(filter_args);
    if (train->parsed()) return cmd_train(train_args, verbose);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (predict->parsed()) return cmd_predict(predict_args);
    if (report->parsed()) return cmd_report(report_args);
    if (translit->parsed()) return cmd_translit(translit_args);
  } catch (const tunisent::ProviderUnavailable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kProviderError;
  } catch (const tunisent::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}
