#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tunisent/corpus.hpp"
#include "tunisent/embedding.hpp"

namespace tunisent {

enum class Architecture { Cnn, BiLstm };

std::string to_string(Architecture a);
std::optional<Architecture> parse_architecture(std::string_view s);

enum class Activation { Relu };
enum class Pooling { GlobalMax };
enum class Merge { ConcatFinalStates };

struct CnnConfig {
  std::vector<int> filter_widths{3, 4, 5};
  int filters_per_width = 100;
  Activation activation = Activation::Relu;
  Pooling pooling = Pooling::GlobalMax;
  double dropout_rate = 0.5;
};

struct BiLstmConfig {
  int hidden_size = 128;
  Merge merge = Merge::ConcatFinalStates;
  double dropout_rate = 0.5;
};

// One named view into the flat parameter vector. Tensor data is the
// col-major segment params[offset, offset+rows*cols).
struct TensorSpec {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

// Two-way sentence classifier over a masked sequence encoding. Parameters
// live in one flat vector with a declared tensor layout, which is what the
// optimizer, the finite-difference checks and the checkpoint format all
// operate on. Inference is read-only; training needs exclusive access.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual Architecture architecture() const = 0;
  int input_dim() const { return input_dim_; }
  int feature_dim() const { return feature_dim_; }
  double dropout_rate() const { return dropout_rate_; }
  std::uint64_t seed() const { return seed_; }

  const std::vector<TensorSpec>& layout() const { return layout_; }
  std::size_t param_count() const {
    return static_cast<std::size_t>(params_.size());
  }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> tensor(std::string_view name);
  Eigen::Map<const Eigen::MatrixXd> tensor(std::string_view name) const;

  // (p_negative, p_positive); softmax output, dropout disabled.
  std::pair<double, double> predict(const SequenceEncoding& enc) const;

  // Mean cross-entropy over the batch; writes dL/dparams into `grad`
  // (resized and zeroed here). Dropout draws from `dropout_rng` when
  // non-null, otherwise runs in inference mode.
  double loss_and_grad(std::span<const SequenceEncoding* const> batch,
                       std::span<const Polarity> labels, Eigen::VectorXd& grad,
                       std::mt19937_64* dropout_rng = nullptr) const;

  virtual std::string config_json() const = 0;

 protected:
  struct FeatureCache {
    virtual ~FeatureCache() = default;
  };

  Classifier(int input_dim, double dropout_rate, std::uint64_t seed);

  // Computes the pre-dropout feature vector; fills `cache` (when non-null)
  // with whatever the backward pass needs.
  virtual Eigen::VectorXd features(const SequenceEncoding& enc,
                                   FeatureCache** cache) const = 0;
  virtual void backward_features(const FeatureCache& cache,
                                 const Eigen::VectorXd& d_features,
                                 Eigen::VectorXd& grad) const = 0;

  void register_tensor(const std::string& name, Eigen::Index rows,
                       Eigen::Index cols);
  // Allocates the flat vector and applies Glorot-uniform / zero-bias
  // initialization in layout order.
  void finalize_layout(int feature_dim);
  const TensorSpec& spec(std::string_view name) const;
  Eigen::Map<Eigen::MatrixXd> grad_tensor(Eigen::VectorXd& grad,
                                          std::string_view name) const;

  void check_encoding(const SequenceEncoding& enc) const;

 private:
  int input_dim_;
  int feature_dim_ = 0;
  double dropout_rate_;
  std::uint64_t seed_;
  std::vector<TensorSpec> layout_;
  Eigen::VectorXd params_;
};

// Multi-width convolution bank, ReLU, per-filter global max pooling over
// the real (unmasked) windows, dropout, dense 2-way softmax.
std::unique_ptr<Classifier> build_cnn(const CnnConfig& config, int input_dim,
                                      int max_len, std::uint64_t seed);

// Forward and backward recurrent passes over the real steps only; final
// hidden states concatenated, dropout, dense 2-way softmax.
std::unique_ptr<Classifier> build_bilstm(const BiLstmConfig& config,
                                         int input_dim, std::uint64_t seed);

// Checkpoint directory: manifest.json (architecture, config, tensor layout)
// plus params.bin, the flat vector as little-endian float32 in layout order.
void save_classifier(const Classifier& classifier, const std::string& dir);
std::unique_ptr<Classifier> load_classifier(const std::string& dir);

// Adam with bias correction over the flat parameter vector.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::size_t n, double lr = 1e-3, double beta1 = 0.9,
                         double beta2 = 0.999, double eps = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  double learning_rate() const { return lr_; }

 private:
  Eigen::VectorXd m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

}  // namespace tunisent
