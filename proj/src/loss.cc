/**
 * loss.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/loss.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pgk {

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

namespace {

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename T>
double LabelTerm(T y, bool positive, double w, T* grad) {
  const double v = static_cast<double>(y);
  if (!std::isfinite(v)) {
    throw std::invalid_argument("CeDnf(): non-finite logit " + std::to_string(v));
  }
  if (grad != nullptr) *grad += static_cast<T>(w * (positive ? Sigmoid(v) - 1.0 : Sigmoid(v)));
  return w * (positive ? Softplus(-v) : Softplus(v));
}

}  // namespace

template <typename T>
double CeDnf(std::span<const T> y, const PartialState& label, const PropWeights* weights,
             T* grad) {
  if (y.size() != label.size()) {
    throw std::invalid_argument("CeDnf(): " + std::to_string(y.size()) + " logits for " +
                                std::to_string(label.size()) + " propositions.");
  }
  const bool weighted = weights != nullptr && !weights->uniform();
  if (weighted && (weights->pos.size() != y.size() || weights->neg.size() != y.size())) {
    throw std::invalid_argument("CeDnf(): weight vectors have the wrong length.");
  }
  double loss = 0.0;
  label.pos().for_each([&](size_t p) {
    loss += LabelTerm(y[p], true, weighted ? weights->pos[p] : 1.0, grad ? grad + p : nullptr);
  });
  label.neg().for_each([&](size_t p) {
    loss += LabelTerm(y[p], false, weighted ? weights->neg[p] : 1.0, grad ? grad + p : nullptr);
  });
  return loss;
}

template <typename T>
double PairLoss(std::span<const T> y_pre, std::span<const T> y_post, const PartialState& pre,
                const PartialState& post, const PropWeights* weights, T* grad_pre,
                T* grad_post) {
  if (y_pre.size() != y_post.size()) {
    throw std::invalid_argument("PairLoss(): pre and post logits differ in length.");
  }
  return CeDnf(y_pre, pre, weights, grad_pre) + CeDnf(y_post, post, weights, grad_post);
}

template double CeDnf<float>(std::span<const float>, const PartialState&, const PropWeights*,
                             float*);
template double CeDnf<double>(std::span<const double>, const PartialState&,
                              const PropWeights*, double*);
template double PairLoss<float>(std::span<const float>, std::span<const float>,
                                const PartialState&, const PartialState&, const PropWeights*,
                                float*, float*);
template double PairLoss<double>(std::span<const double>, std::span<const double>,
                                 const PartialState&, const PartialState&, const PropWeights*,
                                 double*, double*);

PartialState FullLabel(const ClosedState& s) {
  return PartialState(s.bits(), ~s.bits());
}

void ClassCounts::Add(const PartialState& label, const PropositionIndex& index) {
  label.pos().for_each([&](size_t p) { ++pos[index[p].predicate]; });
  label.neg().for_each([&](size_t p) { ++neg[index[p].predicate]; });
}

ClassWeights CbWeights(const ClassCounts& counts, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("CbWeights(): beta must lie in (0, 1).");
  }
  auto raw = [beta](uint64_t n) {
    if (n == 0) return 0.0;
    return -std::expm1(std::log(beta)) / -std::expm1(static_cast<double>(n) * std::log(beta));
  };
  ClassWeights w;
  double sum = 0.0;
  size_t observed = 0;
  for (uint64_t n : counts.pos) {
    w.pos.push_back(raw(n));
    sum += w.pos.back();
    observed += n > 0;
  }
  for (uint64_t n : counts.neg) {
    w.neg.push_back(raw(n));
    sum += w.neg.back();
    observed += n > 0;
  }
  if (observed == 0) return w;
  const double scale = static_cast<double>(observed) / sum;
  for (double& x : w.pos) x *= scale;
  for (double& x : w.neg) x *= scale;
  return w;
}

PropWeights ExpandWeights(const ClassWeights& weights, const PropositionIndex& index) {
  PropWeights w;
  w.pos.resize(index.size());
  w.neg.resize(index.size());
  for (size_t p = 0; p < index.size(); ++p) {
    const int pred = index[p].predicate;
    w.pos[p] = static_cast<float>(weights.pos.at(pred));
    w.neg[p] = static_cast<float>(weights.neg.at(pred));
  }
  return w;
}

}  // namespace pgk
