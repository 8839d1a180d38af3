/**
 * train_test.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "pgk/train.h"
#include "test_support.h"

namespace pgk {
namespace {

using gridworld::World;

const World& Shared() {
  static const World w;
  return w;
}

std::vector<ClosedState> RandomStates(size_t n, size_t count, double p, Rng& rng) {
  std::vector<ClosedState> out;
  for (size_t i = 0; i < count; ++i) {
    ClosedState s(n);
    for (size_t k = 0; k < n; ++k) s.Set(k, UniformReal(rng) < p);
    out.push_back(s);
  }
  return out;
}

TrainConfig Small(Regime regime, int epochs) {
  TrainConfig c;
  c.regime = regime;
  c.epochs = epochs;
  c.hidden = 16;
  c.batch_size = 4;
  return c;
}

TEST_SUITE("train") {

TEST_CASE("metrics on known predictors") {
  const World& w = Shared();
  const size_t n = w.index().size();
  Rng rng(8);
  const std::vector<ClosedState> truth = RandomStates(n, 400, 0.36, rng);

  const Metrics perfect = ScorePredictions(w.index(), truth, truth);
  CHECK(perfect.overall.f1() == doctest::Approx(1.0));
  for (const PredicateMetrics& m : perfect.per_predicate) CHECK(m.accuracy() == 1.0);

  const std::vector<ClosedState> all(truth.size(), ClosedState(~Bitset(n)));
  const Metrics constant = ScorePredictions(w.index(), truth, all);
  const double rate = static_cast<double>(constant.overall.tp) /
                      static_cast<double>(constant.overall.tp + constant.overall.fp);
  CHECK(constant.overall.precision() == doctest::Approx(rate));
  CHECK(constant.overall.recall() == 1.0);

  const std::vector<ClosedState> coin = RandomStates(n, 400, 0.5, rng);
  const Metrics random = ScorePredictions(w.index(), truth, coin);
  CHECK(std::abs(random.overall.precision() - 0.36) < 0.02);
  CHECK(std::abs(random.overall.recall() - 0.5) < 0.02);

  CHECK_THROWS(ScorePredictions(w.index(), {}, {}));
  CHECK_THROWS(ScorePredictions(w.index(), truth, {coin.begin(), coin.begin() + 3}));
}

TEST_CASE("csv rows carry provenance") {
  const World& w = Shared();
  Rng rng(1);
  const std::vector<ClosedState> truth = RandomStates(w.index().size(), 10, 0.3, rng);
  const std::string csv = ScorePredictions(w.index(), truth, truth).ToCsv(7, "abc");
  CHECK(csv.rfind("predicate,dist,precision,recall,f1,seed,index_hash\n", 0) == 0);
  CHECK(csv.find("OVERALL,") != std::string::npos);
  CHECK(csv.find(",7,abc\n") != std::string::npos);
}

TEST_CASE("threshold at zero") {
  const float logits[] = {-1.0f, 0.5f, 0.0f, 3.0f};
  CHECK(Threshold(logits, 4).bits().indices() == std::vector<size_t>{1, 3});
}

TEST_CASE("config validation and regime names") {
  TrainConfig c;
  c.epochs = 0;
  CHECK_THROWS(c.Validate());
  c = TrainConfig{};
  c.lr = -1;
  CHECK_THROWS(c.Validate());
  for (Regime r : {Regime::kDnf, Regime::kOracle, Regime::kHalfDnf}) {
    CHECK(ParseRegime(RegimeName(r)) == r);
  }
  CHECK_THROWS(ParseRegime("sometimes"));
}

TEST_CASE("evaluation needs states") {
  const World& w = Shared();
  const Model m = Model::Init(ShapeFor(w, 16), 1);
  Dataset empty;
  CHECK_THROWS(Evaluate(m, w, empty));
  Dataset stateless = SimDataset(w, 1, "test", 3);
  stateless.pre_state.clear();
  stateless.post_state.clear();
  CHECK_THROWS(Evaluate(m, w, stateless));
}

TEST_CASE("one example, many steps: the loss goes down") {
  const World& w = Shared();
  const Dataset one = SimDataset(w, 3, "train", 1);
  TrainConfig c = Small(Regime::kDnf, 200);
  c.hidden = 128;
  c.batch_size = 1;
  const TrainResult r = Train(w, c, one);
  REQUIRE(r.curve.size() == 200);
  CHECK(r.curve.back().loss < 0.1 * r.curve.front().loss);
}

TEST_CASE("a fixed seed gives a bit-identical run") {
  const World& w = Shared();
  const Dataset train = SimDataset(w, 5, "train", 24);
  const Dataset test = SimDataset(w, 5, "test", 8);
  for (Regime regime : {Regime::kDnf, Regime::kOracle, Regime::kHalfDnf}) {
    const TrainResult a = Train(w, Small(regime, 2), train, &test);
    const TrainResult b = Train(w, Small(regime, 2), train, &test);
    CHECK(a.model.params == b.model.params);
    REQUIRE(a.curve.size() == b.curve.size());
    for (size_t e = 0; e < a.curve.size(); ++e) {
      CHECK(a.curve[e].loss == b.curve[e].loss);
      CHECK(a.curve[e].test_f1 == b.curve[e].test_f1);
    }
    TrainConfig other = Small(regime, 2);
    other.seed = 8;
    CHECK_FALSE(Train(w, other, train).model.params == a.model.params);
  }
}

TEST_CASE("class-balanced weighting trains") {
  const World& w = Shared();
  const Dataset train = SimDataset(w, 5, "train", 16);
  TrainConfig c = Small(Regime::kDnf, 1);
  c.weighting = Weighting::kClassBalanced;
  const TrainResult r = Train(w, c, train);
  CHECK(std::isfinite(r.curve.back().loss));
  CHECK(std::isnan(r.curve.back().test_f1));
}

TEST_CASE("datasets written to disk load back with the same labels") {
  const World& w = Shared();
  const auto dir = std::filesystem::temp_directory_path() / "pgk_train_test_data";
  std::filesystem::remove_all(dir);
  gridworld::GenDataset(w, 9, "train", 12, dir.string(), {true, true});
  const Dataset disk = LoadDataset(w, dir.string());
  const Dataset sim = SimDataset(w, 9, "train", 12);
  REQUIRE(disk.size() == 12);
  REQUIRE(disk.has_states());
  for (size_t i = 0; i < 12; ++i) {
    CHECK(disk.pre_label[i] == sim.pre_label[i]);
    CHECK(disk.post_state[i] == sim.post_state[i]);
    CHECK(disk.observe(i, true) == sim.observe(i, true));
  }
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE

}  // namespace
}  // namespace pgk
