#include <json.hpp>

#include "tunisent/classifier.hpp"
#include "tunisent/errors.hpp"

namespace tunisent {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Per-direction activations recorded over the processed steps, in
// processing order. Gate rows in the stacked 4H layout: i, f, g, o.
struct DirectionTrace {
  Eigen::MatrixXd i, f, g, o, c, tanh_c, h;  // (steps, H) each
  std::vector<int> source;                   // processed step -> input row
};

class BiLstmClassifier final : public Classifier {
 public:
  BiLstmClassifier(const BiLstmConfig& config, int input_dim,
                   std::uint64_t seed)
      : Classifier(input_dim, config.dropout_rate, seed), config_(config) {
    if (config.hidden_size < 1) {
      throw InvalidConfig("hidden_size must be >= 1");
    }
    const Eigen::Index h4 = 4LL * config.hidden_size;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string base(dir);
      register_tensor(base + ".w_input", h4, input_dim);
      register_tensor(base + ".w_recur", h4, config.hidden_size);
      register_tensor(base + ".bias", h4, 1);
    }
    finalize_layout(2 * config.hidden_size);
    // Forget-gate bias starts at 1 so early gradients pass through.
    for (const char* dir : {"fwd", "bwd"}) {
      tensor(std::string(dir) + ".bias")
          .block(config.hidden_size, 0, config.hidden_size, 1)
          .setOnes();
    }
  }

  Architecture architecture() const override { return Architecture::BiLstm; }
  const BiLstmConfig& config() const { return config_; }

  std::string config_json() const override {
    nlohmann::ordered_json j;
    j["hidden_size"] = config_.hidden_size;
    j["merge"] = "concat_final_states";
    j["dropout_rate"] = config_.dropout_rate;
    return j.dump();
  }

 protected:
  struct Cache final : FeatureCache {
    DirectionTrace fwd, bwd;
    Eigen::MatrixXd inputs;  // (n_real, dim) in double precision
  };

  Eigen::VectorXd features(const SequenceEncoding& enc,
                           FeatureCache** cache) const override {
    const int hidden = config_.hidden_size;
    const int real = std::min<int>(enc.n_real,
                                   static_cast<int>(enc.vectors.rows()));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * hidden);

    Cache* c = cache != nullptr ? new Cache() : nullptr;
    if (cache != nullptr) *cache = c;
    if (real < 1) {
      if (c != nullptr) c->inputs.resize(0, input_dim());
      return out;
    }

    Eigen::MatrixXd inputs = enc.vectors.topRows(real).cast<double>();

    std::vector<int> order_fwd(static_cast<std::size_t>(real));
    std::vector<int> order_bwd(static_cast<std::size_t>(real));
    for (int t = 0; t < real; ++t) {
      order_fwd[static_cast<std::size_t>(t)] = t;
      order_bwd[static_cast<std::size_t>(t)] = real - 1 - t;
    }
    DirectionTrace local_fwd, local_bwd;
    DirectionTrace& fwd = c != nullptr ? c->fwd : local_fwd;
    DirectionTrace& bwd = c != nullptr ? c->bwd : local_bwd;
    out.head(hidden) = run_direction("fwd", inputs, order_fwd, fwd);
    out.tail(hidden) = run_direction("bwd", inputs, order_bwd, bwd);
    if (c != nullptr) c->inputs = std::move(inputs);
    return out;
  }

  void backward_features(const FeatureCache& cache,
                         const Eigen::VectorXd& d_features,
                         Eigen::VectorXd& grad) const override {
    const auto& c = static_cast<const Cache&>(cache);
    if (c.inputs.rows() == 0) return;
    const int hidden = config_.hidden_size;
    backprop_direction("fwd", c.inputs, c.fwd, d_features.head(hidden), grad);
    backprop_direction("bwd", c.inputs, c.bwd, d_features.tail(hidden), grad);
  }

 private:
  Eigen::VectorXd run_direction(const std::string& dir,
                                const Eigen::MatrixXd& inputs,
                                const std::vector<int>& order,
                                DirectionTrace& trace) const {
    const int hidden = config_.hidden_size;
    const int steps = static_cast<int>(order.size());
    const auto w_input = tensor(dir + ".w_input");
    const auto w_recur = tensor(dir + ".w_recur");
    const auto bias = tensor(dir + ".bias");

    trace.i.resize(steps, hidden);
    trace.f.resize(steps, hidden);
    trace.g.resize(steps, hidden);
    trace.o.resize(steps, hidden);
    trace.c.resize(steps, hidden);
    trace.tanh_c.resize(steps, hidden);
    trace.h.resize(steps, hidden);
    trace.source = order;

    Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden);
    Eigen::VectorXd c_state = Eigen::VectorXd::Zero(hidden);
    Eigen::VectorXd gates(4 * hidden);
    for (int t = 0; t < steps; ++t) {
      gates.noalias() = w_input * inputs.row(order[t]).transpose();
      gates.noalias() += w_recur * h;
      gates += bias.col(0);
      for (int k = 0; k < hidden; ++k) {
        const double i_g = sigmoid(gates[k]);
        const double f_g = sigmoid(gates[hidden + k]);
        const double g_g = std::tanh(gates[2 * hidden + k]);
        const double o_g = sigmoid(gates[3 * hidden + k]);
        const double c_new = f_g * c_state[k] + i_g * g_g;
        const double tc = std::tanh(c_new);
        trace.i(t, k) = i_g;
        trace.f(t, k) = f_g;
        trace.g(t, k) = g_g;
        trace.o(t, k) = o_g;
        trace.c(t, k) = c_new;
        trace.tanh_c(t, k) = tc;
        c_state[k] = c_new;
        h[k] = o_g * tc;
        trace.h(t, k) = h[k];
      }
    }
    return h;
  }

  void backprop_direction(const std::string& dir,
                          const Eigen::MatrixXd& inputs,
                          const DirectionTrace& trace,
                          const Eigen::VectorXd& d_final, Eigen::VectorXd& grad)
      const {
    const int hidden = config_.hidden_size;
    const int steps = static_cast<int>(trace.source.size());
    const auto w_recur = tensor(dir + ".w_recur");
    auto d_w_input = grad_tensor(grad, dir + ".w_input");
    auto d_w_recur = grad_tensor(grad, dir + ".w_recur");
    auto d_bias = grad_tensor(grad, dir + ".bias");

    Eigen::VectorXd dh = d_final;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(hidden);
    Eigen::VectorXd d_gates(4 * hidden);
    for (int t = steps - 1; t >= 0; --t) {
      for (int k = 0; k < hidden; ++k) {
        const double i_g = trace.i(t, k), f_g = trace.f(t, k);
        const double g_g = trace.g(t, k), o_g = trace.o(t, k);
        const double tc = trace.tanh_c(t, k);
        const double c_prev = t > 0 ? trace.c(t - 1, k) : 0.0;

        const double d_out = dh[k] * tc;
        double d_cell = dc[k] + dh[k] * o_g * (1.0 - tc * tc);

        d_gates[k] = d_cell * g_g * i_g * (1.0 - i_g);
        d_gates[hidden + k] = d_cell * c_prev * f_g * (1.0 - f_g);
        d_gates[2 * hidden + k] = d_cell * i_g * (1.0 - g_g * g_g);
        d_gates[3 * hidden + k] = d_out * o_g * (1.0 - o_g);
        dc[k] = d_cell * f_g;
      }
      d_w_input.noalias() +=
          d_gates * inputs.row(trace.source[static_cast<std::size_t>(t)]);
      if (t > 0) d_w_recur.noalias() += d_gates * trace.h.row(t - 1);
      d_bias.col(0) += d_gates;
      dh.noalias() = w_recur.transpose() * d_gates;
    }
  }

  BiLstmConfig config_;
};

}  // namespace

std::unique_ptr<Classifier> build_bilstm(const BiLstmConfig& config,
                                         int input_dim, std::uint64_t seed) {
  return std::make_unique<BiLstmClassifier>(config, input_dim, seed);
}

}  // namespace tunisent
