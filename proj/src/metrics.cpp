#include "tunisent/metrics.hpp"

#include "tunisent/errors.hpp"

namespace tunisent {

namespace {

void check_inputs(std::span<const Polarity> gold,
                  std::span<const Polarity> pred) {
  if (gold.size() != pred.size()) {
    throw LengthMismatch("gold has " + std::to_string(gold.size()) +
                         " labels, pred has " + std::to_string(pred.size()));
  }
  if (gold.empty()) throw EmptyInput("no instances to score");
}

double ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return 0.0;  // zero-division convention
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::uint64_t ConfusionMatrix::tp(Polarity c) const {
  const int k = static_cast<int>(c);
  return counts[k][k];
}

std::uint64_t ConfusionMatrix::fp(Polarity c) const {
  const int k = static_cast<int>(c);
  return counts[1 - k][k];
}

std::uint64_t ConfusionMatrix::fn(Polarity c) const {
  const int k = static_cast<int>(c);
  return counts[k][1 - k];
}

ConfusionMatrix confusion(std::span<const Polarity> gold,
                          std::span<const Polarity> pred) {
  check_inputs(gold, pred);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++cm.counts[static_cast<int>(gold[i])][static_cast<int>(pred[i])];
  }
  return cm;
}

ClassScores class_scores(const ConfusionMatrix& cm, Polarity c) {
  const std::uint64_t tp = cm.tp(c), fp = cm.fp(c), fn = cm.fn(c);
  ClassScores s;
  s.precision = ratio(tp, tp + fp);
  s.recall = ratio(tp, tp + fn);
  s.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  return s;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyInput("no instances to score");
  return ratio(cm.correct(), cm.total());
}

double f1_micro(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyInput("no instances to score");
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (Polarity c : {Polarity::Negative, Polarity::Positive}) {
    tp += cm.tp(c);
    fp += cm.fp(c);
    fn += cm.fn(c);
  }
  return ratio(2 * tp, 2 * tp + fp + fn);
}

double f1_macro(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EmptyInput("no instances to score");
  const double f_neg = class_scores(cm, Polarity::Negative).f1;
  const double f_pos = class_scores(cm, Polarity::Positive).f1;
  return (f_neg + f_pos) / 2.0;
}

double accuracy(std::span<const Polarity> gold,
                std::span<const Polarity> pred) {
  return accuracy(confusion(gold, pred));
}

double f1_micro(std::span<const Polarity> gold,
                std::span<const Polarity> pred) {
  return f1_micro(confusion(gold, pred));
}

double f1_macro(std::span<const Polarity> gold,
                std::span<const Polarity> pred) {
  return f1_macro(confusion(gold, pred));
}

}  // namespace tunisent
