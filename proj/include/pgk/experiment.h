/**
 * experiment.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * End-to-end Gridworld comparison of the training regimes: data generation,
 * training, evaluation against full states, and closed-loop planning.
 */

#ifndef PGK_EXPERIMENT_H_
#define PGK_EXPERIMENT_H_

#include <cstdint>
#include <functional>
#include <string>

#include "json.hpp"
#include "pgk/train.h"

namespace pgk {

struct ExperimentConfig {
  uint64_t seed = 7;
  size_t count = 100;       // training examples for oracle and dnf
  size_t test_count = 0;    // 0: same as count
  int epochs = 2;
  int batch_size = 32;
  double lr = 1e-2;
  int hidden = 128;
  size_t curve_limit = 2000;
  int loop_episodes = 50;
  int loop_disturbed = 10;
  int loop_horizon = 100;
  std::string out;           // output directory
  bool write_manifests = true;

  static ExperimentConfig Smoke();
  static ExperimentConfig Paper();
  nlohmann::ordered_json ToJson() const;
};

struct RegimeReport {
  Regime regime = Regime::kDnf;
  size_t train_examples = 0;
  Metrics test;
  std::vector<EpochStats> curve;
};

struct LoopReport {
  int episodes = 0;
  int disturbed = 0;
  int oracle_success = 0;
  int model_success = 0;  // dnf model
  int random_success = 0;
};

struct ExperimentReport {
  std::vector<RegimeReport> regimes;  // oracle, dnf, half_dnf
  LoopReport loop;
  nlohmann::ordered_json json;

  const RegimeReport& Get(Regime r) const;
};

/**
 * Writes into config.out: comparison.csv, f1_per_predicate.csv,
 * learning_curve.csv, loop.csv and report.json (plus the generated manifests
 * under data/). Report contents depend only on the configuration. Progress
 * lines go to `log` when set. Stage failures rethrow as std::runtime_error
 * naming the stage.
 */
ExperimentReport RunExperiment(const ExperimentConfig& config,
                               const std::function<void(const std::string&)>& log = {});

}  // namespace pgk

#endif  // PGK_EXPERIMENT_H_
