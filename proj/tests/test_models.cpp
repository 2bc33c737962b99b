#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "tunisent/classifier.hpp"
#include "tunisent/errors.hpp"
#include "tunisent/rng.hpp"

using namespace tunisent;
using test_support::random_encoding;

namespace {

// Central finite differences over every parameter against the analytic
// gradient. Loss must be a deterministic function of the parameters, so
// dropout is either off or driven by a freshly re-seeded rng per call.
double max_relative_gradient_error(Classifier& c,
                                   const std::vector<SequenceEncoding>& batch,
                                   const std::vector<Polarity>& labels,
                                   std::uint64_t dropout_seed = 0,
                                   bool use_dropout = false) {
  std::vector<const SequenceEncoding*> ptrs;
  for (const auto& e : batch) ptrs.push_back(&e);

  const auto loss_at = [&]() {
    if (use_dropout) {
      std::mt19937_64 rng(dropout_seed);
      Eigen::VectorXd scratch;
      return c.loss_and_grad(ptrs, labels, scratch, &rng);
    }
    Eigen::VectorXd scratch;
    return c.loss_and_grad(ptrs, labels, scratch, nullptr);
  };

  Eigen::VectorXd analytic;
  if (use_dropout) {
    std::mt19937_64 rng(dropout_seed);
    c.loss_and_grad(ptrs, labels, analytic, &rng);
  } else {
    c.loss_and_grad(ptrs, labels, analytic, nullptr);
  }

  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < c.params().size(); ++i) {
    const double saved = c.params()[i];
    c.params()[i] = saved + h;
    const double up = loss_at();
    c.params()[i] = saved - h;
    const double down = loss_at();
    c.params()[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double err = std::abs(analytic[i] - fd) /
                       std::max(std::abs(analytic[i]) + std::abs(fd), 1e-6);
    worst = std::max(worst, err);
  }
  return worst;
}

CnnConfig tiny_cnn_config() {
  CnnConfig c;
  c.filter_widths = {2};
  c.filters_per_width = 3;
  c.dropout_rate = 0.0;
  return c;
}

}  // namespace

TEST_CASE("feature widths follow the pooled-concat arithmetic") {
  CnnConfig c200;
  c200.filter_widths = {3, 4, 5};
  c200.filters_per_width = 200;
  const auto cnn200 = build_cnn(c200, 300, 64, 1);
  CHECK(cnn200->feature_dim() == 600);

  CnnConfig c100 = c200;
  c100.filters_per_width = 100;
  const auto cnn100 = build_cnn(c100, 300, 64, 1);
  CHECK(cnn100->feature_dim() == 300);

  BiLstmConfig b;
  b.hidden_size = 128;
  const auto lstm = build_bilstm(b, 300, 1);
  CHECK(lstm->feature_dim() == 256);

  // exact parameter counts
  std::size_t cnn_expected = 0;
  for (int w : c200.filter_widths) {
    cnn_expected += 200u * (static_cast<std::size_t>(w) * 300u + 1u);
  }
  cnn_expected += 2u * (600u + 1u);
  CHECK(cnn200->param_count() == cnn_expected);

  const std::size_t h = 128;
  const std::size_t lstm_expected =
      2u * (4u * h * (300u + h + 1u)) + 2u * (2u * h + 1u);
  CHECK(lstm->param_count() == lstm_expected);
}

TEST_CASE("invalid configurations are rejected") {
  CnnConfig c;
  c.filter_widths = {};
  CHECK_THROWS_AS(build_cnn(c, 10, 16, 1), InvalidConfig);
  c.filter_widths = {0};
  CHECK_THROWS_AS(build_cnn(c, 10, 16, 1), InvalidConfig);
  c.filter_widths = {20};
  CHECK_THROWS_AS(build_cnn(c, 10, 16, 1), InvalidConfig);  // width > max_len
  c.filter_widths = {3};
  c.filters_per_width = 0;
  CHECK_THROWS_AS(build_cnn(c, 10, 16, 1), InvalidConfig);
  c.filters_per_width = 4;
  c.dropout_rate = 1.0;
  CHECK_THROWS_AS(build_cnn(c, 10, 16, 1), InvalidConfig);

  BiLstmConfig b;
  b.hidden_size = 0;
  CHECK_THROWS_AS(build_bilstm(b, 10, 1), InvalidConfig);
}

TEST_CASE("initialization is a pure function of (config, seed)") {
  const auto a1 = build_cnn(tiny_cnn_config(), 4, 8, 42);
  const auto a2 = build_cnn(tiny_cnn_config(), 4, 8, 42);
  const auto a3 = build_cnn(tiny_cnn_config(), 4, 8, 43);
  CHECK(test_support::same_matrix(a1->params(), a2->params()));
  CHECK_FALSE(test_support::same_matrix(a1->params(), a3->params()));

  BiLstmConfig b;
  b.hidden_size = 4;
  const auto l1 = build_bilstm(b, 4, 7);
  const auto l2 = build_bilstm(b, 4, 7);
  CHECK(test_support::same_matrix(l1->params(), l2->params()));
}

TEST_CASE("an all-zero dense layer predicts exactly (0.5, 0.5)") {
  std::mt19937_64 rng(5);
  const auto enc = random_encoding(rng, 5, 8, 4);
  for (int arch = 0; arch < 2; ++arch) {
    std::unique_ptr<Classifier> c;
    if (arch == 0) {
      c = build_cnn(tiny_cnn_config(), 4, 8, 2);
    } else {
      BiLstmConfig b;
      b.hidden_size = 4;
      c = build_bilstm(b, 4, 2);
    }
    c->tensor("dense.weight").setZero();
    c->tensor("dense.bias").setZero();
    const auto [p_neg, p_pos] = c->predict(enc);
    CHECK(p_neg == 0.5);
    CHECK(p_pos == 0.5);
  }
}

TEST_CASE("softmax outputs normalize on every forward pass") {
  std::mt19937_64 rng(6);
  BiLstmConfig b;
  b.hidden_size = 5;
  const auto lstm = build_bilstm(b, 6, 3);
  const auto cnn = build_cnn(tiny_cnn_config(), 6, 12, 3);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(bounded_rand(rng, 10));
    const auto enc = random_encoding(rng, n, 12, 6);
    for (const Classifier* c : {lstm.get(), cnn.get()}) {
      const auto [p_neg, p_pos] = c->predict(enc);
      CHECK(p_neg >= 0.0);
      CHECK(p_pos >= 0.0);
      CHECK(std::abs(p_neg + p_pos - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("appending PAD positions never changes predictions") {
  std::mt19937_64 rng(8);
  BiLstmConfig b;
  b.hidden_size = 6;
  const auto lstm = build_bilstm(b, 5, 9);
  const auto cnn = build_cnn(tiny_cnn_config(), 5, 64, 9);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(bounded_rand(rng, 8));
    auto enc = random_encoding(rng, n, n, 5);
    auto padded = enc;
    padded.max_len = n + 1 + static_cast<int>(bounded_rand(rng, 30));
    padded.indices.assign(static_cast<std::size_t>(padded.max_len), 0);
    for (int k = 0; k < n; ++k) {
      padded.indices[static_cast<std::size_t>(k)] =
          enc.indices[static_cast<std::size_t>(k)];
    }
    for (const Classifier* c : {lstm.get(), cnn.get()}) {
      const auto [n1, p1] = c->predict(enc);
      const auto [n2, p2] = c->predict(padded);
      CHECK(std::abs(n1 - n2) <= 1e-6);
      CHECK(std::abs(p1 - p2) <= 1e-6);
    }
  }
}

TEST_CASE("sequences shorter than every filter width still classify") {
  const auto cnn = build_cnn(tiny_cnn_config(), 4, 8, 3);  // width 2
  std::mt19937_64 rng(10);
  const auto enc = random_encoding(rng, 1, 8, 4);
  const auto [p_neg, p_pos] = cnn->predict(enc);
  CHECK(std::abs(p_neg + p_pos - 1.0) <= 1e-9);
}

TEST_CASE("analytic gradients match central finite differences (CNN)") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    auto cnn = build_cnn(tiny_cnn_config(), 4, 10, 100 + trial);
    std::vector<SequenceEncoding> batch;
    std::vector<Polarity> labels;
    for (int i = 0; i < 3; ++i) {
      batch.push_back(random_encoding(
          rng, 2 + static_cast<int>(bounded_rand(rng, 6)), 10, 4));
      labels.push_back((rng() & 1) != 0 ? Polarity::Positive
                                        : Polarity::Negative);
    }
    CHECK(max_relative_gradient_error(*cnn, batch, labels) <= 1e-4);
  }
}

TEST_CASE("analytic gradients match central finite differences (BiLSTM)") {
  std::mt19937_64 rng(2025);
  BiLstmConfig b;
  b.hidden_size = 4;
  b.dropout_rate = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    auto lstm = build_bilstm(b, 4, 200 + trial);
    std::vector<SequenceEncoding> batch;
    std::vector<Polarity> labels;
    for (int i = 0; i < 3; ++i) {
      batch.push_back(random_encoding(
          rng, 1 + static_cast<int>(bounded_rand(rng, 6)), 8, 4));
      labels.push_back((rng() & 1) != 0 ? Polarity::Positive
                                        : Polarity::Negative);
    }
    CHECK(max_relative_gradient_error(*lstm, batch, labels) <= 1e-4);
  }
}

TEST_CASE("gradients stay correct under a fixed dropout mask") {
  std::mt19937_64 rng(2026);
  CnnConfig c = tiny_cnn_config();
  c.dropout_rate = 0.5;
  auto cnn = build_cnn(c, 4, 10, 11);
  std::vector<SequenceEncoding> batch{random_encoding(rng, 5, 10, 4),
                                      random_encoding(rng, 3, 10, 4)};
  std::vector<Polarity> labels{Polarity::Positive, Polarity::Negative};
  CHECK(max_relative_gradient_error(*cnn, batch, labels, /*dropout_seed=*/9,
                                    /*use_dropout=*/true) <= 1e-4);
}

TEST_CASE("a classifier memorizes a single training example") {
  std::mt19937_64 rng(14);
  const auto enc = random_encoding(rng, 6, 10, 4);
  const std::vector<const SequenceEncoding*> batch{&enc};
  for (const Polarity label : {Polarity::Negative, Polarity::Positive}) {
    const std::vector<Polarity> labels{label};
    auto cnn = build_cnn(tiny_cnn_config(), 4, 10, 33);
    AdamOptimizer adam(cnn->param_count(), 1e-3);
    Eigen::VectorXd grad;
    for (int step = 0; step < 200; ++step) {
      cnn->loss_and_grad(batch, labels, grad, nullptr);
      adam.step(cnn->params(), grad);
    }
    const auto [p_neg, p_pos] = cnn->predict(enc);
    const Polarity argmax =
        p_pos >= p_neg ? Polarity::Positive : Polarity::Negative;
    CHECK(argmax == label);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const auto cnn = build_cnn(tiny_cnn_config(), 4, 8, 3);
  std::mt19937_64 rng(15);
  const auto enc = random_encoding(rng, 4, 8, 3);  // dim 3 != 4
  CHECK_THROWS_AS(cnn->predict(enc), DimensionMismatch);
}

TEST_CASE("checkpoints round trip through the manifest format") {
  test_support::TempDir tmp;
  std::mt19937_64 rng(16);

  CnnConfig c;
  c.filter_widths = {2, 3};
  c.filters_per_width = 4;
  c.dropout_rate = 0.25;
  const auto cnn = build_cnn(c, 5, 12, 99);
  save_classifier(*cnn, tmp.file("cnn_ckpt"));
  const auto loaded = load_classifier(tmp.file("cnn_ckpt"));
  CHECK(loaded->architecture() == Architecture::Cnn);
  CHECK(loaded->input_dim() == 5);
  CHECK(loaded->feature_dim() == 8);
  for (int t = 0; t < 10; ++t) {
    const auto enc = random_encoding(rng, 4, 12, 5);
    const auto [a_neg, a_pos] = cnn->predict(enc);
    const auto [b_neg, b_pos] = loaded->predict(enc);
    CHECK(a_neg == doctest::Approx(b_neg).epsilon(1e-5));  // float32 storage
    CHECK(a_pos == doctest::Approx(b_pos).epsilon(1e-5));
  }

  BiLstmConfig b;
  b.hidden_size = 3;
  const auto lstm = build_bilstm(b, 5, 7);
  save_classifier(*lstm, tmp.file("lstm_ckpt"));
  const auto lstm2 = load_classifier(tmp.file("lstm_ckpt"));
  CHECK(lstm2->architecture() == Architecture::BiLstm);
  CHECK(lstm2->feature_dim() == 6);

  CHECK_THROWS_AS(load_classifier(tmp.file("missing")), ProviderUnavailable);
}

TEST_CASE("dropout perturbs training losses but never inference") {
  std::mt19937_64 rng(17);
  CnnConfig c = tiny_cnn_config();
  c.dropout_rate = 0.5;
  const auto cnn = build_cnn(c, 4, 10, 3);
  const auto enc = random_encoding(rng, 5, 10, 4);
  const std::vector<const SequenceEncoding*> batch{&enc};
  const std::vector<Polarity> labels{Polarity::Positive};

  Eigen::VectorXd g;
  std::mt19937_64 dropout_rng(100);
  const double l1 = cnn->loss_and_grad(batch, labels, g, &dropout_rng);
  const double l2 = cnn->loss_and_grad(batch, labels, g, &dropout_rng);
  const double l_eval = cnn->loss_and_grad(batch, labels, g, nullptr);
  CHECK(l1 != l2);  // masks differ across draws
  CHECK(l_eval == cnn->loss_and_grad(batch, labels, g, nullptr));

  const auto p1 = cnn->predict(enc);
  const auto p2 = cnn->predict(enc);
  CHECK(p1 == p2);
}
