/**
 * pgk.cc
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Command-line entry point.
 */

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgk/experiment.h"
#include "pgk/gridworld.h"
#include "pgk/grounding.h"
#include "pgk/labeler.h"
#include "pgk/model.h"
#include "pgk/pddl.h"
#include "pgk/planner.h"
#include "pgk/train.h"
#include "pgk/util.h"

namespace {

using nlohmann::ordered_json;
using namespace pgk;

struct Globals {
  uint64_t seed = 7;
  std::string out;
  bool quiet = false;
};

// Raised for user errors whose message is already complete.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Globals g;

void Info(const std::string& line) {
  if (!g.quiet) std::cerr << line << "\n";
}

Domain LoadDomain(const std::string& path) {
  const std::string text = ReadFile(path);
  try {
    return ParseDomain(text);
  } catch (const ParseError& e) {
    throw UsageError(path + ": error: " + e.what());
  }
}

Problem LoadProblem(const std::string& path, const Domain& domain) {
  const std::string text = ReadFile(path);
  try {
    return ParseProblem(text, domain);
  } catch (const ParseError& e) {
    throw UsageError(path + ": error: " + e.what());
  }
}

// Writes to --out when given, stdout otherwise.
void Emit(const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
  } else {
    WriteFile(g.out, text);
  }
}

ordered_json Provenance(const PropositionIndex& index) {
  return {{"seed", g.seed}, {"index_hash", index.HashHex()}};
}

int CmdValidate(const std::string& domain_path, const std::string& problem_path) {
  const Domain domain = LoadDomain(domain_path);
  ordered_json j;
  j["domain"] = domain.name;
  j["predicates"] = domain.predicates.size();
  j["actions"] = domain.actions.size();
  if (!problem_path.empty()) {
    const Problem problem = LoadProblem(problem_path, domain);
    j["problem"] = problem.name;
    j["objects"] = problem.objects.size();
    j["propositions"] = problem.index.size();
    j["index_hash"] = problem.index.HashHex();
  }
  j["seed"] = g.seed;
  Emit(j.dump() + "\n");
  return 0;
}

int CmdGround(const std::string& domain_path, const std::string& problem_path) {
  const Domain domain = LoadDomain(domain_path);
  const Problem problem = LoadProblem(problem_path, domain);
  const PropositionIndex& index = problem.index;
  const std::vector<GroundAction> actions = GroundAll(domain, index);
  std::string out;
  size_t advisories = 0;
  for (const GroundAction& a : actions) {
    ordered_json j;
    j["name"] = a.Name(index);
    j["schema"] = a.schema;
    std::vector<std::string> args;
    for (ObjectId o : a.args) args.push_back(index.objects()[o].name);
    j["args"] = args;
    j["pre_pos"] = SortedNames(a.pre_label.pos(), index);
    j["pre_neg"] = SortedNames(a.pre_label.neg(), index);
    j["post_pos"] = SortedNames(a.post_label.pos(), index);
    j["post_neg"] = SortedNames(a.post_label.neg(), index);
    j["warnings"] = a.warnings;
    j["seed"] = g.seed;
    j["index_hash"] = index.HashHex();
    advisories += a.warnings.size();
    out += j.dump() + "\n";
  }
  Emit(out);
  Info("grounded " + std::to_string(actions.size()) + " actions over " +
       std::to_string(index.size()) + " propositions (" + std::to_string(advisories) +
       " advisories, index " + index.HashHex() + ")");
  return 0;
}

int CmdLabel(const std::string& domain_path, const std::string& problem_path,
             const std::string& manifest_path) {
  Domain domain;
  Problem problem;
  if (domain_path.empty() != problem_path.empty()) {
    throw UsageError("--domain and --problem go together");
  }
  if (domain_path.empty()) {
    domain = ParseDomain(gridworld::DomainText());
    problem = ParseProblem(gridworld::ProblemText(), domain);
  } else {
    domain = LoadDomain(domain_path);
    problem = LoadProblem(problem_path, domain);
  }
  std::ifstream in(manifest_path);
  if (!in) throw UsageError("cannot read manifest " + manifest_path);
  std::ostringstream rows;
  const LabelSummary summary =
      LabelDataset(in, domain, problem.index, rows, Provenance(problem.index));
  Emit(rows.str());
  ordered_json s = summary.ToJson(problem.index);
  s["seed"] = g.seed;
  if (!g.out.empty()) WriteFile(g.out + ".summary.json", s.dump(2) + "\n");
  for (const std::string& reason : summary.skip_reasons) std::cerr << "skipped " << reason << "\n";
  Info("labeled " + std::to_string(summary.rows) + " rows, skipped " +
       std::to_string(summary.skipped) + ", labeled fraction " +
       std::to_string(summary.labeled_fraction));
  if (summary.failed()) {
    std::cerr << "pgk: error: too many malformed records (" << summary.skipped << " of "
              << summary.rows + summary.skipped << ")\n";
    return 1;
  }
  return 0;
}

int CmdGen(size_t count, const std::string& split, double prior, bool full_states,
           bool no_observations) {
  if (g.out.empty()) throw UsageError("gridworld gen needs --out <dir>");
  gridworld::GridConfig config;
  config.prior = prior;
  const gridworld::World world(config);
  gridworld::GenOptions opts;
  opts.full_states = full_states;
  opts.write_observations = !no_observations;
  gridworld::GenDataset(world, g.seed, split, count, g.out, opts);
  Info("wrote " + std::to_string(count) + " " + split + " examples to " + g.out + " (index " +
       world.index().HashHex() + ", seed " + std::to_string(g.seed) + ")");
  return 0;
}

int CmdTrain(const TrainConfig& base, const std::string& data, const std::string& test_dir) {
  if (g.out.empty()) throw UsageError("train needs --out <model file>");
  const gridworld::World world;
  TrainConfig config = base;
  config.seed = g.seed;
  const Dataset train = LoadDataset(world, data);
  std::optional<Dataset> test;
  if (!test_dir.empty()) test = LoadDataset(world, test_dir);
  Info("training " + RegimeName(config.regime) + " on " + std::to_string(train.size()) +
       " examples");
  const TrainResult result =
      Train(world, config, train, test ? &*test : nullptr, [](const EpochStats& s) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "epoch %d loss %.4f train_f1 %.4f test_f1 %.4f",
                      s.epoch, s.loss, s.train_f1, s.test_f1);
        Info(buf);
      });
  ordered_json meta;
  meta["seed"] = g.seed;
  meta["train"] = config.ToJson();
  meta["data"] = data;
  meta["train_examples"] = train.size();
  SaveModel(g.out, result.model, world.index(), meta);
  std::string curve = "epoch,loss,train_f1,test_f1,seed,index_hash\n";
  for (const EpochStats& s : result.curve) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%.4f,%.4f,%.4f,", s.epoch, s.loss, s.train_f1,
                  s.test_f1);
    curve += buf + std::to_string(g.seed) + "," + world.index().HashHex() + "\n";
  }
  WriteFile(g.out + ".curve.csv", curve);
  Info("saved " + g.out);
  return 0;
}

int CmdEval(const std::string& model_path, const std::string& data) {
  const gridworld::World world;
  const Model model = LoadModel(model_path, world.index());
  const Dataset test = LoadDataset(world, data);
  const Metrics m = Evaluate(model, world, test);
  Emit(m.ToCsv(g.seed, world.index().HashHex()));
  return 0;
}

int CmdPlan(const std::string& domain_path, const std::string& problem_path, bool bfs,
            size_t budget) {
  const Domain domain = LoadDomain(domain_path);
  const Problem problem = LoadProblem(problem_path, domain);
  const std::vector<GroundAction> actions = GroundAll(domain, problem.index);
  const Dnf goal = CompileGoal(problem.goal, problem.index);
  const Plan plan = bfs ? PlanBfs(problem.init, goal, actions, budget)
                        : PlanGbfs(problem.init, goal, actions, budget);
  if (!plan.solved()) {
    std::cerr << "pgk: no plan: " << StatusName(plan.status) << " after " << plan.expanded
              << " expansions\n";
    return 1;
  }
  if (!ValidatePlan(problem.init, goal, actions, plan.actions)) {
    std::cerr << "pgk: internal error: plan does not validate\n";
    return 1;
  }
  std::string text;
  for (const std::string& name : PlanNames(actions, plan.actions, problem.index)) {
    text += name + "\n";
  }
  Emit(text);
  Info("plan length " + std::to_string(plan.depth()) + ", expanded " +
       std::to_string(plan.expanded) + ", index " + problem.index.HashHex() + ", seed " +
       std::to_string(g.seed));
  return 0;
}

int CmdLoop(const std::string& model_path, const std::string& perception, int episodes,
            int horizon, int disturbed) {
  const gridworld::World world;
  const Dnf goal = CompileGoal(world.problem().goal, world.index());
  std::optional<Model> model;
  std::optional<Classifier> clf;
  std::optional<Classifier::Workspace> ws;
  std::vector<float> logits(world.index().size());
  const std::string mode = perception.empty() ? (model_path.empty() ? "oracle" : "model")
                                              : perception;
  if (mode == "model") {
    if (model_path.empty()) throw UsageError("--perception model needs --model");
    model = LoadModel(model_path, world.index());
    clf.emplace(world, model->shape);
    clf->Prepare(model->params.data());
    ws = clf->MakeWorkspace();
  } else if (mode != "oracle" && mode != "random") {
    throw UsageError("--perception must be model, oracle or random");
  }
  const Perception perceive = [&](const gridworld::Observation& o) {
    if (mode == "oracle") return world.Decode(o);
    clf->AssembleState(*ws, o, logits.data());
    return Threshold(logits.data(), logits.size());
  };
  std::string trace;
  int success = 0;
  for (int e = 0; e < episodes; ++e) {
    Rng inst(DeriveSeed(g.seed, "loop/instance", e));
    const ClosedState init = RandomInstance(world, goal, inst, e < disturbed);
    LoopOptions opts;
    opts.horizon = horizon;
    opts.disturb_at = e < disturbed ? 1 : -1;
    Rng rng(DeriveSeed(g.seed, "loop/" + mode, e));
    const LoopTrace t = mode == "random" ? RandomLoop(world, init, goal, opts, rng)
                                         : ClosedLoop(world, init, goal, perceive, opts, rng);
    success += t.satisfied;
    ordered_json row = t.ToJson(world, e);
    row["perception"] = mode;
    row["seed"] = g.seed;
    row["index_hash"] = world.index().HashHex();
    trace += row.dump() + "\n";
  }
  if (!g.out.empty()) WriteFile(g.out, trace);
  ordered_json summary;
  summary["perception"] = mode;
  summary["episodes"] = episodes;
  summary["disturbed"] = std::min(disturbed, episodes);
  summary["horizon"] = horizon;
  summary["success"] = success;
  summary["success_rate"] = episodes > 0 ? static_cast<double>(success) / episodes : 0.0;
  summary["seed"] = g.seed;
  summary["index_hash"] = world.index().HashHex();
  std::cout << summary.dump() << "\n";
  return 0;
}

int CmdExperiment(ExperimentConfig config, const std::string& profile) {
  if (profile == "paper") {
    const ExperimentConfig paper = ExperimentConfig::Paper();
    config.count = paper.count;
    config.test_count = paper.test_count;
    config.epochs = paper.epochs;
  } else if (profile != "smoke" && !profile.empty()) {
    throw UsageError("--profile must be smoke or paper");
  }
  config.seed = g.seed;
  config.out = g.out.empty() ? "experiment_out" : g.out;
  const ExperimentReport report = RunExperiment(config, [](const std::string& s) { Info(s); });
  std::cout << ReadFile(config.out + "/comparison.csv");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  ApplyThreadLimit();
  CLI::App app{"Partial-label grounding toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "Root seed");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_flag("--quiet", g.quiet, "Suppress progress on stderr");

  std::function<int()> run;

  auto* pddl = app.add_subcommand("pddl", "PDDL utilities");
  pddl->require_subcommand(1);
  auto* validate = pddl->add_subcommand("validate", "Parse and check a domain and problem");
  std::string v_domain, v_problem;
  validate->add_option("domain", v_domain)->required()->check(CLI::ExistingFile);
  validate->add_option("problem", v_problem)->check(CLI::ExistingFile);
  validate->callback([&] { run = [&] { return CmdValidate(v_domain, v_problem); }; });

  auto* ground = app.add_subcommand("ground", "Ground actions and print their labels as JSONL");
  std::string gr_domain, gr_problem;
  ground->add_option("domain", gr_domain)->required()->check(CLI::ExistingFile);
  ground->add_option("problem", gr_problem)->required()->check(CLI::ExistingFile);
  ground->callback([&] { run = [&] { return CmdGround(gr_domain, gr_problem); }; });

  auto* label = app.add_subcommand("label", "Label an action manifest");
  std::string l_domain, l_problem, l_manifest;
  label->add_option("--domain", l_domain)->check(CLI::ExistingFile);
  label->add_option("--problem", l_problem)->check(CLI::ExistingFile);
  label->add_option("--manifest", l_manifest)->required()->check(CLI::ExistingFile);
  label->callback([&] { run = [&] { return CmdLabel(l_domain, l_problem, l_manifest); }; });

  auto* grid = app.add_subcommand("gridworld", "Gridworld simulator");
  grid->require_subcommand(1);
  auto* gen = grid->add_subcommand("gen", "Generate a dataset directory");
  size_t gen_count = 1000;
  std::string gen_split = "train";
  double gen_prior = 0.05;
  bool gen_full = false, gen_no_obs = false;
  gen->add_option("--count", gen_count)->check(CLI::PositiveNumber);
  gen->add_option("--split", gen_split);
  gen->add_option("--prior", gen_prior);
  gen->add_flag("--full-states", gen_full, "Store ground-truth states per row");
  gen->add_flag("--no-observations", gen_no_obs, "Reference renders by seed instead of storing them");
  gen->callback([&] {
    run = [&] { return CmdGen(gen_count, gen_split, gen_prior, gen_full, gen_no_obs); };
  });

  auto* train = app.add_subcommand("train", "Train a predicate classifier");
  TrainConfig tc;
  std::string t_regime = "dnf", t_data, t_test, t_weighting = "uniform";
  train->add_option("--regime", t_regime)->check(CLI::IsMember({"dnf", "oracle", "half_dnf"}));
  train->add_option("--data", t_data)->required()->check(CLI::ExistingDirectory);
  train->add_option("--test", t_test)->check(CLI::ExistingDirectory);
  train->add_option("--epochs", tc.epochs)->check(CLI::PositiveNumber);
  train->add_option("--batch", tc.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--lr", tc.lr)->check(CLI::PositiveNumber);
  train->add_option("--hidden", tc.hidden)->check(CLI::PositiveNumber);
  train->add_option("--weighting", t_weighting)
      ->check(CLI::IsMember({"uniform", "class_balanced"}));
  train->add_option("--beta", tc.beta);
  train->callback([&] {
    run = [&] {
      tc.regime = ParseRegime(t_regime);
      tc.weighting =
          t_weighting == "uniform" ? Weighting::kUniform : Weighting::kClassBalanced;
      return CmdTrain(tc, t_data, t_test);
    };
  });

  auto* eval = app.add_subcommand("eval", "Score a model against full states");
  std::string e_model, e_data;
  eval->add_option("--model", e_model)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", e_data)->required()->check(CLI::ExistingDirectory);
  eval->callback([&] { run = [&] { return CmdEval(e_model, e_data); }; });

  auto* plan = app.add_subcommand("plan", "Plan for a problem and print the actions");
  std::string p_domain, p_problem;
  bool p_bfs = false;
  size_t p_budget = kDefaultPlanBudget;
  plan->add_option("--domain", p_domain)->required()->check(CLI::ExistingFile);
  plan->add_option("--problem", p_problem)->required()->check(CLI::ExistingFile);
  plan->add_flag("--bfs", p_bfs, "Breadth-first search (shortest plan)");
  plan->add_option("--budget", p_budget, "Node expansion budget");
  plan->callback([&] { run = [&] { return CmdPlan(p_domain, p_problem, p_bfs, p_budget); }; });

  auto* loop = app.add_subcommand("loop", "Closed-loop perceive, plan, act episodes");
  std::string lp_model, lp_perception;
  int lp_episodes = 50, lp_horizon = 100, lp_disturbed = 10;
  loop->add_option("--model", lp_model)->check(CLI::ExistingFile);
  loop->add_option("--perception", lp_perception, "model, oracle or random");
  loop->add_option("--episodes", lp_episodes)->check(CLI::NonNegativeNumber);
  loop->add_option("--horizon", lp_horizon)->check(CLI::NonNegativeNumber);
  loop->add_option("--disturbed", lp_disturbed, "Episodes with a re-locked door")
      ->check(CLI::NonNegativeNumber);
  loop->callback([&] {
    run = [&] { return CmdLoop(lp_model, lp_perception, lp_episodes, lp_horizon, lp_disturbed); };
  });

  auto* experiment = app.add_subcommand("experiment", "Compare the training regimes end to end");
  ExperimentConfig ec = ExperimentConfig::Smoke();
  std::string x_profile = "smoke";
  experiment->add_option("--profile", x_profile, "smoke or paper");
  experiment->add_option("--count", ec.count)->check(CLI::PositiveNumber);
  experiment->add_option("--test-count", ec.test_count);
  experiment->add_option("--epochs", ec.epochs)->check(CLI::PositiveNumber);
  experiment->add_option("--lr", ec.lr)->check(CLI::PositiveNumber);
  experiment->add_option("--episodes", ec.loop_episodes)->check(CLI::NonNegativeNumber);
  experiment->callback([&] { run = [&] { return CmdExperiment(ec, x_profile); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return run();
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pgk: error: " << e.what() << "\n";
    return 1;
  }
}
