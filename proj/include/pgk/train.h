/**
 * train.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * State assembly from per-tuple classifier outputs, training regimes,
 * and precision/recall/F1 evaluation against full states.
 */

#ifndef PGK_TRAIN_H_
#define PGK_TRAIN_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgk/gridworld.h"
#include "pgk/kernels.h"
#include "pgk/loss.h"
#include "pgk/model.h"

namespace pgk {

/**
 * Distinct argument tuples of the propositions, in order of first
 * appearance. Propositions that share arguments share one forward pass.
 */
struct TupleTable {
  struct Output {
    int predicate = -1;
    size_t proposition = 0;
  };
  std::vector<std::vector<ObjectId>> tuples;
  std::vector<std::vector<Output>> outputs;  // per tuple
  std::vector<size_t> tuple_of;              // per proposition

  static TupleTable Build(const PropositionIndex& index);
  size_t size() const { return tuples.size(); }
};

ModelShape ShapeFor(const gridworld::World& world, int hidden = 128);

// Single forward pass through the dense reference kernel.
std::vector<float> Forward(const Model& model, const gridworld::Observation& obs,
                           const TupleMasks& masks);

/**
 * Runs a model over whole observations of one world. Prepare() caches
 * parameter-dependent terms; call it again after every parameter update.
 * Const methods are thread-safe given one Workspace per thread.
 */
class Classifier {
 public:
  Classifier(const gridworld::World& world, const ModelShape& shape);

  const gridworld::World& world() const { return world_; }
  const TupleTable& tuples() const { return tuples_; }
  const ModelShape& shape() const { return kernel_.shape(); }

  void Prepare(const float* params) { kernel_.Prepare(params); }

  struct Workspace {
    FastKernel::Workspace kernel;
    gridworld::Observation obs;  // read again by Backward
    std::vector<std::vector<int>> footprints;
    std::vector<std::pair<size_t, size_t>> forwarded;  // (tuple, kernel slot)
    std::vector<float> tuple_logits;
  };
  Workspace MakeWorkspace() const;

  /**
   * Writes N state logits for obs. With `needed` set, only tuples whose flag
   * is nonzero are run and other entries are left untouched. Throws if an
   * argument object has neither a footprint nor an interior.
   */
  void AssembleState(Workspace& ws, const gridworld::Observation& obs, float* logits,
                     const std::vector<char>* needed = nullptr) const;

  // Adds d(loss)/d(params) for the last AssembleState call.
  void Backward(Workspace& ws, const float* dlogits, float* grad) const;

 private:
  const gridworld::World& world_;
  TupleTable tuples_;
  FastKernel kernel_;
};

// assemble_state for a loaded model.
std::vector<float> AssembleState(const Model& model, const gridworld::World& world,
                                 const gridworld::Observation& obs);

/**
 * Training or test data. Labels are per image; full states are present only
 * for simulator data generated with them.
 */
struct Dataset {
  std::vector<PartialState> pre_label;
  std::vector<PartialState> post_label;
  std::vector<ClosedState> pre_state;
  std::vector<ClosedState> post_state;
  std::function<gridworld::Observation(size_t, bool post)> observe;
  uint64_t seed = 0;

  size_t size() const { return pre_label.size(); }
  bool has_states() const { return !pre_state.empty(); }
};

// Examples rendered on demand.
Dataset SimDataset(const gridworld::World& world, std::vector<gridworld::Example> examples);
Dataset SimDataset(const gridworld::World& world, uint64_t root_seed, std::string_view split,
                   size_t count);

/**
 * Reads a directory written by GenDataset (or a manifest with "sim:" refs).
 * Labels come from the action annotations; states from pre_state/post_state
 * when present. Throws on an index hash mismatch.
 */
Dataset LoadDataset(const gridworld::World& world, const std::string& dir);

enum class Regime { kDnf, kOracle, kHalfDnf };
enum class Weighting { kUniform, kClassBalanced };

std::string RegimeName(Regime r);
Regime ParseRegime(const std::string& name);

struct TrainConfig {
  Regime regime = Regime::kDnf;
  int epochs = 20;
  int batch_size = 32;
  double lr = 1e-2;
  uint64_t seed = 7;
  Weighting weighting = Weighting::kUniform;
  double beta = 0.999;
  int hidden = 128;
  // Examples scored per epoch for the curves (0: all).
  size_t curve_limit = 2000;

  void Validate() const;
  nlohmann::ordered_json ToJson() const;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;  // mean per example
  double train_f1 = 0.0;
  double test_f1 = 0.0;  // NaN without a test set
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> curve;
};

// Thrown when the loss stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Minibatch Adam. Per-example gradients are computed in parallel and summed
 * in example order, so the result does not depend on the thread count.
 */
TrainResult Train(const gridworld::World& world, const TrainConfig& config,
                  const Dataset& train, const Dataset* test = nullptr,
                  const std::function<void(const EpochStats&)>& progress = {});

struct PredicateMetrics {
  std::string predicate;
  double dist = 0.0;  // share of true propositions
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
  double accuracy() const;
};

struct Metrics {
  std::vector<PredicateMetrics> per_predicate;
  PredicateMetrics overall;

  // predicate,dist,precision,recall,f1 rows then OVERALL; every row also
  // carries the run's seed and proposition index hash.
  std::string ToCsv(uint64_t seed, const std::string& index_hash) const;
  nlohmann::ordered_json ToJson() const;
};

// Counts over aligned truth/prediction state lists.
Metrics ScorePredictions(const PropositionIndex& index, const std::vector<ClosedState>& truth,
                         const std::vector<ClosedState>& predicted);

/**
 * Thresholds logits at 0 (probability 0.5) on both images of every example
 * (the first `limit` when nonzero). Throws on an empty or state-less set.
 */
Metrics Evaluate(const Model& model, const gridworld::World& world, const Dataset& test,
                 size_t limit = 0);

// Decoded state from thresholded logits.
ClosedState Threshold(const float* logits, size_t n);

}  // namespace pgk

#endif  // PGK_TRAIN_H_
