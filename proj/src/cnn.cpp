#include <json.hpp>

#include "tunisent/classifier.hpp"
#include "tunisent/errors.hpp"

namespace tunisent {

namespace {

class CnnClassifier final : public Classifier {
 public:
  CnnClassifier(const CnnConfig& config, int input_dim, int max_len,
                std::uint64_t seed)
      : Classifier(input_dim, config.dropout_rate, seed),
        config_(config),
        max_len_(max_len) {
    if (config.filter_widths.empty()) {
      throw InvalidConfig("filter_widths must be non-empty");
    }
    for (int w : config.filter_widths) {
      if (w < 1) throw InvalidConfig("filter widths must be >= 1");
      if (w > max_len) {
        throw InvalidConfig("filter width " + std::to_string(w) +
                            " exceeds max_len " + std::to_string(max_len));
      }
    }
    if (config.filters_per_width < 1) {
      throw InvalidConfig("filters_per_width must be >= 1");
    }
    if (max_len < 1) throw InvalidConfig("max_len must be >= 1");
    for (int w : config.filter_widths) {
      const std::string base = "conv" + std::to_string(w);
      register_tensor(base + ".weight", config.filters_per_width,
                      static_cast<Eigen::Index>(w) * input_dim);
      register_tensor(base + ".bias", config.filters_per_width, 1);
    }
    finalize_layout(static_cast<int>(config.filter_widths.size()) *
                    config.filters_per_width);
  }

  Architecture architecture() const override { return Architecture::Cnn; }
  int max_len() const { return max_len_; }
  const CnnConfig& config() const { return config_; }

  std::string config_json() const override {
    nlohmann::ordered_json j;
    j["filter_widths"] = config_.filter_widths;
    j["filters_per_width"] = config_.filters_per_width;
    j["activation"] = "relu";
    j["pooling"] = "global_max";
    j["dropout_rate"] = config_.dropout_rate;
    j["max_len"] = max_len_;
    return j.dump();
  }

 protected:
  struct Cache final : FeatureCache {
    std::vector<Eigen::MatrixXd> windows;   // per bank, (n_win, w*dim)
    std::vector<std::vector<int>> argmax;   // per bank, per filter; -1 = dead
  };

  Eigen::VectorXd features(const SequenceEncoding& enc,
                           FeatureCache** cache) const override {
    const int filters = config_.filters_per_width;
    const int dim = input_dim();
    Eigen::VectorXd pooled = Eigen::VectorXd::Zero(feature_dim());

    Cache* c = nullptr;
    if (cache != nullptr) {
      c = new Cache();
      c->windows.resize(config_.filter_widths.size());
      c->argmax.assign(config_.filter_widths.size(),
                       std::vector<int>(static_cast<std::size_t>(filters), -1));
      *cache = c;
    }

    const int real = std::min<int>(enc.n_real,
                                   static_cast<int>(enc.vectors.rows()));
    for (std::size_t k = 0; k < config_.filter_widths.size(); ++k) {
      const int w = config_.filter_widths[k];
      const int n_win = real - w + 1;
      if (n_win < 1) continue;  // sequence shorter than the filter

      // im2col over the real windows only; padded rows never enter the max.
      Eigen::MatrixXd windows(n_win, static_cast<Eigen::Index>(w) * dim);
      for (int s = 0; s < n_win; ++s) {
        for (int j = 0; j < w; ++j) {
          windows.block(s, static_cast<Eigen::Index>(j) * dim, 1, dim) =
              enc.vectors.row(s + j).cast<double>();
        }
      }
      const auto weight = tensor("conv" + std::to_string(w) + ".weight");
      const auto bias = tensor("conv" + std::to_string(w) + ".bias");
      Eigen::MatrixXd z = windows * weight.transpose();
      z.rowwise() += bias.col(0).transpose();

      for (int f = 0; f < filters; ++f) {
        Eigen::Index best = 0;
        const double top = z.col(f).maxCoeff(&best);
        if (top > 0.0) {  // ReLU then max == max then ReLU clip
          pooled[static_cast<Eigen::Index>(k) * filters + f] = top;
          if (c != nullptr) c->argmax[k][static_cast<std::size_t>(f)] =
              static_cast<int>(best);
        }
      }
      if (c != nullptr) c->windows[k] = std::move(windows);
    }
    return pooled;
  }

  void backward_features(const FeatureCache& cache,
                         const Eigen::VectorXd& d_features,
                         Eigen::VectorXd& grad) const override {
    const auto& c = static_cast<const Cache&>(cache);
    const int filters = config_.filters_per_width;
    for (std::size_t k = 0; k < config_.filter_widths.size(); ++k) {
      if (c.windows[k].rows() == 0) continue;
      const std::string base = "conv" + std::to_string(config_.filter_widths[k]);
      auto d_weight = grad_tensor(grad, base + ".weight");
      auto d_bias = grad_tensor(grad, base + ".bias");
      for (int f = 0; f < filters; ++f) {
        const int s = c.argmax[k][static_cast<std::size_t>(f)];
        if (s < 0) continue;  // pooled output was clipped at zero
        const double g =
            d_features[static_cast<Eigen::Index>(k) * filters + f];
        if (g == 0.0) continue;
        d_weight.row(f) += g * c.windows[k].row(s);
        d_bias(f, 0) += g;
      }
    }
  }

 private:
  CnnConfig config_;
  int max_len_;
};

}  // namespace

std::unique_ptr<Classifier> build_cnn(const CnnConfig& config, int input_dim,
                                      int max_len, std::uint64_t seed) {
  return std::make_unique<CnnClassifier>(config, input_dim, max_len, seed);
}

}  // namespace tunisent
