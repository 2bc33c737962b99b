#pragma once

#include <cstdint>
#include <span>

#include "tunisent/corpus.hpp"

namespace tunisent {

// counts[gold][pred], indexed by Polarity (Negative=0, Positive=1).
struct ConfusionMatrix {
  std::uint64_t counts[2][2] = {{0, 0}, {0, 0}};

  std::uint64_t total() const {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
  }
  std::uint64_t correct() const { return counts[0][0] + counts[1][1]; }

  // One-vs-rest counts for a class.
  std::uint64_t tp(Polarity c) const;
  std::uint64_t fp(Polarity c) const;
  std::uint64_t fn(Polarity c) const;

  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ConfusionMatrix confusion(std::span<const Polarity> gold,
                          std::span<const Polarity> pred);

// Precision/recall/F1 for one class; empty denominators score 0.
ClassScores class_scores(const ConfusionMatrix& cm, Polarity c);

double accuracy(std::span<const Polarity> gold, std::span<const Polarity> pred);

// Pooled-count F1 over both classes. For single-label binary predictions
// this equals accuracy exactly.
double f1_micro(std::span<const Polarity> gold, std::span<const Polarity> pred);

// Unweighted mean of the two per-class F1 scores.
double f1_macro(std::span<const Polarity> gold, std::span<const Polarity> pred);

double accuracy(const ConfusionMatrix& cm);
double f1_micro(const ConfusionMatrix& cm);
double f1_macro(const ConfusionMatrix& cm);

}  // namespace tunisent
