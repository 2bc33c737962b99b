#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tunisent/classifier.hpp"
#include "tunisent/errors.hpp"

namespace tunisent {

namespace fs = std::filesystem;

namespace {
constexpr const char* kFormat = "tunisent-classifier-v1";
}

void save_classifier(const Classifier& classifier, const std::string& dir) {
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = kFormat;
  manifest["architecture"] = to_string(classifier.architecture());
  manifest["input_dim"] = classifier.input_dim();
  manifest["seed"] = classifier.seed();
  manifest["config"] = nlohmann::ordered_json::parse(classifier.config_json());
  manifest["dtype"] = "float32";
  manifest["order"] = "col_major";
  auto tensors = nlohmann::ordered_json::array();
  for (const auto& t : classifier.layout()) {
    tensors.push_back({{"name", t.name},
                       {"rows", t.rows},
                       {"cols", t.cols},
                       {"offset", t.offset}});
  }
  manifest["tensors"] = tensors;

  std::ofstream mj((fs::path(dir) / "manifest.json").string());
  if (!mj) throw InputError("cannot write manifest.json in " + dir);
  mj << manifest.dump(2) << "\n";

  std::ofstream bin((fs::path(dir) / "params.bin").string(),
                    std::ios::binary);
  if (!bin) throw InputError("cannot write params.bin in " + dir);
  const auto& p = classifier.params();
  std::vector<float> buf(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    buf[static_cast<std::size_t>(i)] = static_cast<float>(p[i]);
  }
  bin.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

std::unique_ptr<Classifier> load_classifier(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream mj(base / "manifest.json");
  if (!mj) throw ProviderUnavailable("no classifier checkpoint at " + dir);
  nlohmann::json manifest = nlohmann::json::parse(mj, nullptr, false);
  if (manifest.is_discarded() || manifest.value("format", "") != kFormat) {
    throw FormatError(dir + "/manifest.json: not a " + std::string(kFormat) +
                          " checkpoint",
                      0);
  }
  const int input_dim = manifest.at("input_dim").get<int>();
  const auto seed = manifest.value("seed", std::uint64_t{0});
  const auto& config = manifest.at("config");

  std::unique_ptr<Classifier> classifier;
  const std::string arch = manifest.at("architecture").get<std::string>();
  if (arch == "cnn") {
    CnnConfig c;
    c.filter_widths = config.at("filter_widths").get<std::vector<int>>();
    c.filters_per_width = config.at("filters_per_width").get<int>();
    c.dropout_rate = config.at("dropout_rate").get<double>();
    classifier = build_cnn(c, input_dim, config.at("max_len").get<int>(), seed);
  } else if (arch == "bilstm") {
    BiLstmConfig c;
    c.hidden_size = config.at("hidden_size").get<int>();
    c.dropout_rate = config.at("dropout_rate").get<double>();
    classifier = build_bilstm(c, input_dim, seed);
  } else {
    throw FormatError(dir + ": unknown architecture '" + arch + "'", 0);
  }

  // The declared layout must agree with the reconstructed architecture.
  const auto& tensors = manifest.at("tensors");
  if (tensors.size() != classifier->layout().size()) {
    throw FormatError(dir + ": tensor list does not match architecture", 0);
  }
  for (std::size_t i = 0; i < classifier->layout().size(); ++i) {
    const auto& want = classifier->layout()[i];
    const auto& got = tensors[i];
    if (got.at("name").get<std::string>() != want.name ||
        got.at("rows").get<Eigen::Index>() != want.rows ||
        got.at("cols").get<Eigen::Index>() != want.cols ||
        got.at("offset").get<std::size_t>() != want.offset) {
      throw FormatError(dir + ": tensor '" + want.name + "' mismatch", 0);
    }
  }

  std::ifstream bin(base / "params.bin", std::ios::binary);
  if (!bin) throw ProviderUnavailable("missing params.bin in " + dir);
  auto& p = classifier->params();
  std::vector<float> buf(static_cast<std::size_t>(p.size()));
  bin.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (bin.gcount() !=
      static_cast<std::streamsize>(buf.size() * sizeof(float))) {
    throw FormatError(dir + "/params.bin truncated",
                      static_cast<std::size_t>(bin.gcount()));
  }
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    p[i] = buf[static_cast<std::size_t>(i)];
  }
  return classifier;
}

}  // namespace tunisent
