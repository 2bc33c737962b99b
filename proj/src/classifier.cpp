#include "tunisent/classifier.hpp"

#include <cmath>

#include "tunisent/errors.hpp"
#include "tunisent/rng.hpp"

namespace tunisent {

std::string to_string(Architecture a) {
  return a == Architecture::Cnn ? "cnn" : "bilstm";
}

std::optional<Architecture> parse_architecture(std::string_view s) {
  if (s == "cnn" || s == "CNN") return Architecture::Cnn;
  if (s == "bilstm" || s == "bi-lstm" || s == "BiLSTM") {
    return Architecture::BiLstm;
  }
  return std::nullopt;
}

Classifier::Classifier(int input_dim, double dropout_rate, std::uint64_t seed)
    : input_dim_(input_dim), dropout_rate_(dropout_rate), seed_(seed) {
  if (input_dim < 1) throw InvalidConfig("input_dim must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw InvalidConfig("dropout_rate must lie in [0,1)");
  }
}

void Classifier::register_tensor(const std::string& name, Eigen::Index rows,
                                 Eigen::Index cols) {
  std::size_t offset =
      layout_.empty() ? 0 : layout_.back().offset + layout_.back().size();
  layout_.push_back(TensorSpec{name, rows, cols, offset});
}

void Classifier::finalize_layout(int feature_dim) {
  feature_dim_ = feature_dim;
  register_tensor("dense.weight", 2, feature_dim);
  register_tensor("dense.bias", 2, 1);
  params_.setZero(static_cast<Eigen::Index>(layout_.back().offset +
                                            layout_.back().size()));
  std::mt19937_64 rng(seed_);
  for (const auto& t : layout_) {
    const bool is_bias = t.cols == 1 && t.name.ends_with(".bias");
    if (is_bias) continue;  // biases start at zero
    const double limit =
        std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
    auto view = params_.segment(static_cast<Eigen::Index>(t.offset),
                                static_cast<Eigen::Index>(t.size()));
    for (Eigen::Index i = 0; i < view.size(); ++i) {
      view[i] = uniform_range(rng, -limit, limit);
    }
  }
}

const TensorSpec& Classifier::spec(std::string_view name) const {
  for (const auto& t : layout_) {
    if (t.name == name) return t;
  }
  throw InvalidConfig("unknown tensor: " + std::string(name));
}

Eigen::Map<Eigen::MatrixXd> Classifier::tensor(std::string_view name) {
  const auto& t = spec(name);
  return {params_.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<const Eigen::MatrixXd> Classifier::tensor(
    std::string_view name) const {
  const auto& t = spec(name);
  return {params_.data() + t.offset, t.rows, t.cols};
}

Eigen::Map<Eigen::MatrixXd> Classifier::grad_tensor(
    Eigen::VectorXd& grad, std::string_view name) const {
  const auto& t = spec(name);
  return {grad.data() + t.offset, t.rows, t.cols};
}

void Classifier::check_encoding(const SequenceEncoding& enc) const {
  if (enc.n_real > 0 && enc.dim() != input_dim_) {
    throw DimensionMismatch("encoding dim " + std::to_string(enc.dim()) +
                            " does not match classifier input dim " +
                            std::to_string(input_dim_));
  }
}

namespace {

Eigen::Vector2d softmax2(const Eigen::Vector2d& z) {
  const double m = z.maxCoeff();
  Eigen::Vector2d e = (z.array() - m).exp();
  return e / e.sum();
}

}  // namespace

std::pair<double, double> Classifier::predict(
    const SequenceEncoding& enc) const {
  check_encoding(enc);
  const Eigen::VectorXd h = features(enc, nullptr);
  const Eigen::Vector2d z =
      tensor("dense.weight") * h + tensor("dense.bias").col(0);
  const Eigen::Vector2d p = softmax2(z);
  return {p[static_cast<int>(Polarity::Negative)],
          p[static_cast<int>(Polarity::Positive)]};
}

double Classifier::loss_and_grad(
    std::span<const SequenceEncoding* const> batch,
    std::span<const Polarity> labels, Eigen::VectorXd& grad,
    std::mt19937_64* dropout_rng) const {
  if (batch.size() != labels.size()) {
    throw LengthMismatch("batch and labels differ in size");
  }
  if (batch.empty()) throw EmptyInput("empty batch");
  grad.setZero(params_.size());

  const auto dense_w = tensor("dense.weight");
  auto d_dense_w = grad_tensor(grad, "dense.weight");
  auto d_dense_b = grad_tensor(grad, "dense.bias");
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const double keep = 1.0 - dropout_rate_;

  double total_loss = 0.0;
  Eigen::VectorXd mask(feature_dim_);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const SequenceEncoding& enc = *batch[i];
    check_encoding(enc);
    FeatureCache* cache = nullptr;
    Eigen::VectorXd h = features(enc, &cache);
    std::unique_ptr<FeatureCache> cache_owner(cache);

    if (dropout_rng != nullptr && dropout_rate_ > 0.0) {
      for (Eigen::Index k = 0; k < mask.size(); ++k) {
        mask[k] = uniform_unit(*dropout_rng) < keep ? 1.0 / keep : 0.0;
      }
    } else {
      mask.setOnes();
    }
    const Eigen::VectorXd h_dropped = h.cwiseProduct(mask);

    const Eigen::Vector2d z =
        dense_w * h_dropped + tensor("dense.bias").col(0);
    const double zmax = z.maxCoeff();
    const double log_partition =
        zmax + std::log(std::exp(z[0] - zmax) + std::exp(z[1] - zmax));
    const int y = static_cast<int>(labels[i]);
    total_loss += (log_partition - z[y]) * inv_batch;

    Eigen::Vector2d dz = softmax2(z) * inv_batch;
    dz[y] -= inv_batch;

    d_dense_w.noalias() += dz * h_dropped.transpose();
    d_dense_b.col(0) += dz;
    const Eigen::VectorXd dh =
        (dense_w.transpose() * dz).cwiseProduct(mask);
    backward_features(*cache_owner, dh, grad);
  }
  return total_loss;
}

AdamOptimizer::AdamOptimizer(std::size_t n, double lr, double beta1,
                             double beta2, double eps)
    : m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
      lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw DimensionMismatch("optimizer state does not match parameters");
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_.array().matrix() +
       (1.0 - beta2_) * grad.array().square().matrix();
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / bias1) /
                    ((v_.array() / bias2).sqrt() + eps_);
}

}  // namespace tunisent
