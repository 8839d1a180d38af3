/**
 * experiment.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/experiment.h"

#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "pgk/planner.h"
#include "pgk/util.h"

namespace pgk {

using gridworld::World;

ExperimentConfig ExperimentConfig::Smoke() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::Paper() {
  ExperimentConfig c;
  c.count = 10000;
  c.test_count = 10000;
  c.epochs = 20;
  return c;
}

nlohmann::ordered_json ExperimentConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["count"] = count;
  j["test_count"] = test_count == 0 ? count : test_count;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["lr"] = lr;
  j["hidden"] = hidden;
  j["curve_limit"] = curve_limit;
  j["loop_episodes"] = loop_episodes;
  j["loop_disturbed"] = loop_disturbed;
  j["loop_horizon"] = loop_horizon;
  return j;
}

const RegimeReport& ExperimentReport::Get(Regime r) const {
  for (const RegimeReport& rr : regimes) {
    if (rr.regime == r) return rr;
  }
  throw std::out_of_range("ExperimentReport: regime not run.");
}

namespace {

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

template <typename F>
auto Stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw std::runtime_error("stage '" + name + "' failed: " + e.what());
  }
}

}  // namespace

ExperimentReport RunExperiment(const ExperimentConfig& config,
                               const std::function<void(const std::string&)>& log) {
  namespace fs = std::filesystem;
  auto say = [&](const std::string& line) {
    if (log) log(line);
  };
  if (config.out.empty()) throw std::invalid_argument("RunExperiment(): no output directory.");
  if (config.count == 0) throw std::invalid_argument("RunExperiment(): count must be positive.");
  const fs::path out(config.out);
  fs::create_directories(out);

  const World world = Stage("setup", [] { return World(); });
  const std::string hash = world.index().HashHex();
  const std::string seed = std::to_string(config.seed);
  const size_t test_count = config.test_count == 0 ? config.count : config.test_count;

  // Half-DNF sees twice the examples; its first `count` coincide with the
  // other regimes' training set.
  const struct {
    Regime regime;
    size_t examples;
  } plan[] = {{Regime::kOracle, config.count},
              {Regime::kDnf, config.count},
              {Regime::kHalfDnf, 2 * config.count}};

  Stage("generate", [&] {
    if (config.write_manifests) {
      gridworld::GenOptions opts;
      opts.full_states = true;
      opts.write_observations = false;
      gridworld::GenDataset(world, config.seed, "train", 2 * config.count,
                            (out / "data" / "train").string(), opts);
      gridworld::GenDataset(world, config.seed, "test", test_count,
                            (out / "data" / "test").string(), opts);
    }
    return 0;
  });
  say("generated " + std::to_string(2 * config.count) + " train and " +
      std::to_string(test_count) + " test examples");
  const Dataset train = Stage("generate", [&] {
    return SimDataset(world, config.seed, "train", 2 * config.count);
  });
  const Dataset test =
      Stage("generate", [&] { return SimDataset(world, config.seed, "test", test_count); });

  ExperimentReport report;
  std::vector<Model> models;
  for (const auto& [regime, examples] : plan) {
    const std::string name = RegimeName(regime);
    TrainConfig tc;
    tc.regime = regime;
    tc.epochs = config.epochs;
    tc.batch_size = config.batch_size;
    tc.lr = config.lr;
    tc.hidden = config.hidden;
    tc.curve_limit = config.curve_limit;
    tc.seed = DeriveSeed(config.seed, "experiment/train/" + name);

    // Views of the first `examples` training rows.
    Dataset subset = train;
    subset.pre_label.resize(examples);
    subset.post_label.resize(examples);
    subset.pre_state.resize(examples);
    subset.post_state.resize(examples);

    RegimeReport rr;
    rr.regime = regime;
    rr.train_examples = examples;
    TrainResult result = Stage("train " + name, [&] {
      return Train(world, tc, subset, &test, [&](const EpochStats& s) {
        say(name + " epoch " + std::to_string(s.epoch) + " loss " + Fixed(s.loss) +
            " train_f1 " + Fixed(s.train_f1) + " test_f1 " + Fixed(s.test_f1));
      });
    });
    rr.curve = result.curve;
    rr.test = Stage("evaluate " + name, [&] { return Evaluate(result.model, world, test); });
    say(name + " test F1 " + Fixed(rr.test.overall.f1()));
    Stage("save " + name, [&] {
      fs::create_directories(out / "models");
      nlohmann::ordered_json meta;
      meta["seed"] = config.seed;
      meta["train"] = tc.ToJson();
      meta["train_examples"] = examples;
      SaveModel((out / "models" / (name + ".pgkm")).string(), result.model, world.index(), meta);
      return 0;
    });
    models.push_back(std::move(result.model));
    report.regimes.push_back(std::move(rr));
  }

  // Closed loop on shared instances: oracle perception, the dnf model, and
  // uniformly random actions.
  Stage("loop", [&] {
    const Dnf goal = CompileGoal(world.problem().goal, world.index());
    const Model& dnf = models[1];
    Classifier clf(world, dnf.shape);
    clf.Prepare(dnf.params.data());
    Classifier::Workspace ws = clf.MakeWorkspace();
    std::vector<float> logits(world.index().size());
    const Perception model_perception = [&](const gridworld::Observation& o) {
      clf.AssembleState(ws, o, logits.data());
      return Threshold(logits.data(), logits.size());
    };
    const Perception oracle = [&](const gridworld::Observation& o) { return world.Decode(o); };
    LoopReport& lr = report.loop;
    lr.episodes = config.loop_episodes;
    std::string trace;
    for (int e = 0; e < config.loop_episodes; ++e) {
      const bool disturbed = e < config.loop_disturbed;
      Rng inst(DeriveSeed(config.seed, "experiment/loop/instance", e));
      const ClosedState init = RandomInstance(world, goal, inst, disturbed);
      LoopOptions opts;
      opts.horizon = config.loop_horizon;
      opts.disturb_at = disturbed ? 1 : -1;
      Rng r1(DeriveSeed(config.seed, "experiment/loop/oracle", e));
      Rng r2(DeriveSeed(config.seed, "experiment/loop/model", e));
      Rng r3(DeriveSeed(config.seed, "experiment/loop/random", e));
      const LoopTrace t_oracle = ClosedLoop(world, init, goal, oracle, opts, r1);
      const LoopTrace t_model = ClosedLoop(world, init, goal, model_perception, opts, r2);
      const LoopTrace t_random = RandomLoop(world, init, goal, opts, r3);
      for (const LoopStep& s : t_oracle.steps) lr.disturbed += s.disturbed;
      lr.oracle_success += t_oracle.satisfied;
      lr.model_success += t_model.satisfied;
      lr.random_success += t_random.satisfied;
      nlohmann::ordered_json row = t_model.ToJson(world, e);
      row["perception"] = "dnf";
      row["seed"] = config.seed;
      row["index_hash"] = hash;
      trace += row.dump() + "\n";
    }
    WriteFile((out / "loop_trace.jsonl").string(), trace);
    say("loop success: oracle " + std::to_string(lr.oracle_success) + "/" +
        std::to_string(lr.episodes) + ", dnf " + std::to_string(lr.model_success) +
        ", random " + std::to_string(lr.random_success));
    return 0;
  });

  Stage("report", [&] {
    std::string comparison = "regime,train_examples,test_examples,epochs,precision,recall,f1,seed,index_hash\n";
    std::string per_predicate = "regime,predicate,dist,precision,recall,f1,seed,index_hash\n";
    std::string curve = "regime,epoch,loss,train_f1,test_f1,seed,index_hash\n";
    for (const RegimeReport& rr : report.regimes) {
      const std::string name = RegimeName(rr.regime);
      const PredicateMetrics& o = rr.test.overall;
      comparison += name + "," + std::to_string(rr.train_examples) + "," +
                    std::to_string(test_count) + "," + std::to_string(config.epochs) + "," +
                    Fixed(o.precision()) + "," + Fixed(o.recall()) + "," + Fixed(o.f1()) + "," +
                    seed + "," + hash + "\n";
      std::vector<PredicateMetrics> rows = rr.test.per_predicate;
      rows.push_back(o);
      for (const PredicateMetrics& m : rows) {
        per_predicate += name + "," + m.predicate + "," + Fixed(m.dist) + "," +
                         Fixed(m.precision()) + "," + Fixed(m.recall()) + "," + Fixed(m.f1()) +
                         "," + seed + "," + hash + "\n";
      }
      for (const EpochStats& s : rr.curve) {
        curve += name + "," + std::to_string(s.epoch) + "," + Fixed(s.loss) + "," +
                 Fixed(s.train_f1) + "," + Fixed(s.test_f1) + "," + seed + "," + hash + "\n";
      }
    }
    const LoopReport& lr = report.loop;
    std::string loop = "perception,episodes,disturbed,success,seed,index_hash\n";
    loop += "oracle," + std::to_string(lr.episodes) + "," + std::to_string(lr.disturbed) + "," +
            std::to_string(lr.oracle_success) + "," + seed + "," + hash + "\n";
    loop += "dnf," + std::to_string(lr.episodes) + ",," + std::to_string(lr.model_success) +
            "," + seed + "," + hash + "\n";
    loop += "random," + std::to_string(lr.episodes) + ",," + std::to_string(lr.random_success) +
            "," + seed + "," + hash + "\n";
    WriteFile((out / "comparison.csv").string(), comparison);
    WriteFile((out / "f1_per_predicate.csv").string(), per_predicate);
    WriteFile((out / "learning_curve.csv").string(), curve);
    WriteFile((out / "loop.csv").string(), loop);

    nlohmann::ordered_json& j = report.json;
    j["seed"] = config.seed;
    j["index_hash"] = hash;
    j["num_propositions"] = world.index().size();
    j["config"] = config.ToJson();
    j["regimes"] = nlohmann::ordered_json::array();
    for (const RegimeReport& rr : report.regimes) {
      nlohmann::ordered_json r;
      r["regime"] = RegimeName(rr.regime);
      r["train_examples"] = rr.train_examples;
      r["test"] = rr.test.ToJson();
      r["curve"] = nlohmann::ordered_json::array();
      for (const EpochStats& s : rr.curve) {
        r["curve"].push_back({{"epoch", s.epoch},
                              {"loss", s.loss},
                              {"train_f1", s.train_f1},
                              {"test_f1", s.test_f1}});
      }
      j["regimes"].push_back(std::move(r));
    }
    const double f_oracle = report.Get(Regime::kOracle).test.overall.f1();
    const double f_dnf = report.Get(Regime::kDnf).test.overall.f1();
    const double f_half = report.Get(Regime::kHalfDnf).test.overall.f1();
    j["ordering"] = {{"oracle_ge_dnf", f_oracle >= f_dnf},
                     {"dnf_gt_half_dnf", f_dnf > f_half}};
    j["loop"] = {{"episodes", lr.episodes},
                 {"disturbed", lr.disturbed},
                 {"oracle_success", lr.oracle_success},
                 {"dnf_success", lr.model_success},
                 {"random_success", lr.random_success}};
    WriteFile((out / "report.json").string(), j.dump(2) + "\n");
    return 0;
  });
  return report;
}

}  // namespace pgk
