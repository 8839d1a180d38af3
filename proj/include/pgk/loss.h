/**
 * loss.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Masked cross entropy over state logits. A partial state labels some
 * propositions true (s+) and some false (s-); every other entry contributes
 * neither loss nor gradient.
 */

#ifndef PGK_LOSS_H_
#define PGK_LOSS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pgk/logic.h"

namespace pgk {

// -log(sigmoid(-x)) without overflow.
double Softplus(double x);

/**
 * Per-proposition weights for positive and negative labels. Empty vectors
 * mean weight 1.
 */
struct PropWeights {
  std::vector<float> pos;
  std::vector<float> neg;

  bool uniform() const { return pos.empty() && neg.empty(); }
};

/**
 * sum_{p in s+} w+_p softplus(-y_p) + sum_{p in s-} w-_p softplus(y_p).
 * When grad is non-null the gradient is added to it. Throws
 * std::invalid_argument on size mismatch or a non-finite labeled logit.
 */
template <typename T>
double CeDnf(std::span<const T> y, const PartialState& label,
             const PropWeights* weights = nullptr, T* grad = nullptr);

// CeDnf(pre) + CeDnf(post).
template <typename T>
double PairLoss(std::span<const T> y_pre, std::span<const T> y_post,
                const PartialState& pre, const PartialState& post,
                const PropWeights* weights = nullptr, T* grad_pre = nullptr,
                T* grad_post = nullptr);

// Every proposition labeled: s+ = s, s- = complement.
PartialState FullLabel(const ClosedState& s);

/**
 * Label counts per predicate and polarity.
 */
struct ClassCounts {
  std::vector<uint64_t> pos;
  std::vector<uint64_t> neg;

  explicit ClassCounts(size_t predicates = 0) : pos(predicates, 0), neg(predicates, 0) {}
  void Add(const PartialState& label, const PropositionIndex& index);
};

struct ClassWeights {
  std::vector<double> pos;
  std::vector<double> neg;
};

/**
 * Effective-number weights (1 - beta) / (1 - beta^n) per class, scaled to
 * mean 1 over classes with n > 0. Classes with n = 0 get 0.
 */
ClassWeights CbWeights(const ClassCounts& counts, double beta);

// Spreads class weights to the propositions of each predicate.
PropWeights ExpandWeights(const ClassWeights& weights, const PropositionIndex& index);

}  // namespace pgk

#endif  // PGK_LOSS_H_
