/**
 * experiment_test.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include <chrono>
#include <filesystem>

#include "doctest.h"
#include "pgk/experiment.h"
#include "pgk/util.h"

namespace pgk {
namespace {

namespace fs = std::filesystem;

fs::path Fresh(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pgk_experiment_test_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST_SUITE("experiment") {

TEST_CASE("profiles") {
  const ExperimentConfig paper = ExperimentConfig::Paper();
  CHECK(paper.count == 10000);
  CHECK(paper.test_count == 10000);
  CHECK(paper.epochs == 20);
  CHECK(paper.loop_episodes == 50);
  CHECK(paper.loop_disturbed == 10);
  const ExperimentConfig smoke = ExperimentConfig::Smoke();
  CHECK(smoke.count < paper.count);
  CHECK(smoke.ToJson()["test_count"] == smoke.count);
}

TEST_CASE("smoke run: three regimes, fast, byte-identical reports") {
  ExperimentConfig c = ExperimentConfig::Smoke();
  c.out = Fresh("a").string();
  const auto start = std::chrono::steady_clock::now();
  const ExperimentReport a = RunExperiment(c);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 120.0);

  REQUIRE(a.regimes.size() == 3);
  CHECK(a.regimes[0].regime == Regime::kOracle);
  CHECK(a.regimes[1].regime == Regime::kDnf);
  CHECK(a.regimes[2].regime == Regime::kHalfDnf);
  CHECK(a.Get(Regime::kHalfDnf).train_examples == 2 * c.count);
  CHECK(a.loop.episodes == c.loop_episodes);
  CHECK(a.loop.disturbed == c.loop_disturbed);
  CHECK(a.loop.oracle_success == c.loop_episodes);

  const std::string comparison = ReadFile(c.out + "/comparison.csv");
  int rows = 0;
  for (char ch : comparison) rows += ch == '\n';
  CHECK(rows == 4);  // header + oracle, dnf, half_dnf

  ExperimentConfig again = c;
  again.out = Fresh("b").string();
  RunExperiment(again);
  for (const char* file : {"comparison.csv", "f1_per_predicate.csv", "learning_curve.csv",
                           "loop.csv", "report.json"}) {
    CHECK_MESSAGE(ReadFile(c.out + "/" + file) == ReadFile(again.out + "/" + file), file);
  }
  fs::remove_all(c.out);
  fs::remove_all(again.out);
}

}  // TEST_SUITE

}  // namespace
}  // namespace pgk
