/**
 * acceptance_test.cc
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Prints one PASS/FAIL line per acceptance criterion. Exit status is 0 once
 * every criterion has been evaluated; with --strict it is 1 if any failed.
 *
 *   acceptance_test [--strict] [--only 1,2,...] [--work DIR]
 */

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgk/experiment.h"
#include "pgk/gridworld.h"
#include "pgk/grounding.h"
#include "pgk/loss.h"
#include "pgk/planner.h"
#include "pgk/train.h"
#include "pgk/util.h"
#include "test_support.h"

namespace pgk {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

// The shared formula corpus for criteria 1 to 3: N cycles through 1..12.
struct Case {
  size_t n;
  Formula f;
};

const std::vector<Case>& Corpus() {
  static const std::vector<Case> corpus = [] {
    std::vector<Case> out;
    Rng rng(DeriveSeed(7, "acceptance/formulas"));
    for (int i = 0; i < 1000; ++i) {
      const size_t n = 1 + static_cast<size_t>(i % 12);
      out.push_back({n, testing::RandomFormula(rng, n, 5)});
    }
    return out;
  }();
  return corpus;
}

Outcome CollapseEqualsDeterminedSet() {
  const auto start = Clock::now();
  int mismatches = 0, unsat = 0;
  for (const Case& c : Corpus()) {
    const Dnf d = ToDnf(c.f, c.n);
    if (d.unsatisfiable()) {
      ++unsat;
      continue;
    }
    mismatches += !(Collapse(d) == DeterminedSet(d));
  }
  const double secs = Seconds(start);
  return {mismatches == 0 && secs < 60.0,
          Fmt("%.0f mismatches over 1000 formulas (%.0f unsatisfiable), %.2f s", mismatches,
              unsat, secs)};
}

Outcome CollapseLemmas() {
  int sound_violations = 0, maximal_violations = 0, checked = 0;
  for (const Case& c : Corpus()) {
    const Dnf d = ToDnf(c.f, c.n);
    if (d.unsatisfiable()) continue;
    ++checked;
    const PartialState collapsed = Collapse(d);
    std::vector<int> seen_true(c.n, 0), seen_false(c.n, 0);
    for (uint64_t code = 0; code < (uint64_t{1} << c.n); ++code) {
      const ClosedState s = testing::StateFromCode(c.n, code);
      if (!d.SatisfiedBy(s)) continue;
      sound_violations += !collapsed.SatisfiedBy(s);
      for (size_t p = 0; p < c.n; ++p) (s.Contains(p) ? seen_true : seen_false)[p] = 1;
    }
    for (size_t p = 0; p < c.n; ++p) {
      const bool in_collapse = collapsed.pos().test(p) || collapsed.neg().test(p);
      if (!in_collapse && !(seen_true[p] && seen_false[p])) ++maximal_violations;
    }
  }
  return {sound_violations == 0 && maximal_violations == 0,
          Fmt("%.0f satisfiable formulas; %.0f satisfying states outside the collapse, "
              "%.0f undetermined propositions with a single value",
              checked, sound_violations, maximal_violations)};
}

Outcome DnfPreservesTruth() {
  uint64_t assignments = 0, wrong = 0;
  for (const Case& c : Corpus()) {
    const Dnf d = ToDnf(c.f, c.n);
    for (uint64_t code = 0; code < (uint64_t{1} << c.n); ++code) {
      const ClosedState s = testing::StateFromCode(c.n, code);
      wrong += d.SatisfiedBy(s) != Evaluate(c.f, s);
      ++assignments;
    }
  }
  return {wrong == 0, Fmt("%.0f of %.0f assignments disagree", static_cast<double>(wrong),
                          static_cast<double>(assignments))};
}

Outcome LossGradients() {
  Rng rng(DeriveSeed(7, "acceptance/loss"));
  double worst = 0.0;
  bool unlabeled_zero = true;
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + UniformInt(rng, 16);
    std::vector<double> a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = 12.0 * UniformReal(rng) - 6.0;
      b[i] = 12.0 * UniformReal(rng) - 6.0;
    }
    auto random_label = [&] {
      PartialState l(n);
      for (size_t p = 0; p < n; ++p) {
        const uint64_t r = UniformInt(rng, 3);
        if (r == 1) l.AddPositive(p);
        if (r == 2) l.AddNegative(p);
      }
      return l;
    };
    const PartialState la = random_label(), lb = random_label();
    std::vector<double> ga(n, 0.0), gb(n, 0.0);
    PairLoss<double>(a, b, la, lb, nullptr, ga.data(), gb.data());
    for (int side = 0; side < 2; ++side) {
      std::vector<double>& y = side == 0 ? a : b;
      const std::vector<double>& g = side == 0 ? ga : gb;
      const PartialState& l = side == 0 ? la : lb;
      for (size_t p = 0; p < n; ++p) {
        const double h = 1e-5, keep = y[p];
        y[p] = keep + h;
        const double up = PairLoss<double>(a, b, la, lb);
        y[p] = keep - h;
        const double down = PairLoss<double>(a, b, la, lb);
        y[p] = keep;
        const double fd = (up - down) / (2 * h);
        if (!l.pos().test(p) && !l.neg().test(p)) {
          unlabeled_zero = unlabeled_zero && g[p] == 0.0;
        } else {
          worst = std::max(worst, std::abs(fd - g[p]) / std::max(std::abs(fd), 1e-8));
        }
      }
    }
  }
  PartialState one(1);
  one.AddPositive(0);
  const double ln2_error = std::abs(CeDnf<double>(std::vector<double>{0.0}, one) - std::log(2.0));
  return {worst <= 1e-4 && unlabeled_zero && ln2_error <= 1e-9,
          Fmt("max relative gradient error %.2e, |loss - ln 2| = %.1e", worst, ln2_error) +
              (unlabeled_zero ? ", unlabeled gradients exactly 0" : ", nonzero unlabeled gradient")};
}

Outcome PaperProfile(const ExperimentReport& r, double seconds) {
  const double oracle = r.Get(Regime::kOracle).test.overall.f1();
  const double dnf = r.Get(Regime::kDnf).test.overall.f1();
  const double half = r.Get(Regime::kHalfDnf).test.overall.f1();
  const bool ordering = oracle >= dnf && dnf >= half;
  const bool pass = ordering && oracle >= 0.99 && dnf >= 0.90 && half < dnf && seconds <= 7200;
  return {pass, Fmt("test F1 oracle %.4f, dnf %.4f, half_dnf %.4f; %.0f s", oracle, dnf, half,
                    seconds)};
}

Outcome ScalingCheck(const fs::path& work) {
  const gridworld::World world;
  const auto start = Clock::now();
  const Dataset train = SimDataset(world, 7, "train", 100000);
  const Dataset test = SimDataset(world, 7, "test", 10000);
  TrainConfig config;
  config.regime = Regime::kDnf;
  config.epochs = 20;
  const TrainResult result = Train(world, config, train, nullptr);
  const Metrics m = Evaluate(result.model, world, test);
  WriteFile((work / "scaling_f1.csv").string(), m.ToCsv(config.seed, world.index().HashHex()));
  const double f1 = m.overall.f1();
  return {f1 >= 0.99, Fmt("dnf with 100000 examples: test F1 %.4f (precision %.4f, recall %.4f); %.0f s",
                          f1, m.overall.precision(), m.overall.recall(), Seconds(start))};
}

Outcome LabelSoundness() {
  const gridworld::World world;
  const std::vector<gridworld::Example> examples =
      gridworld::GenerateExamples(world, 7, "acceptance", 10000);
  size_t bad_pre = 0, bad_post = 0, bad_decode = 0;
  for (const gridworld::Example& e : examples) {
    const GroundAction& a = world.actions()[e.action];
    const ClosedState pre = world.Decode(world.Render(e.pre, e.placement_seed));
    const ClosedState post = world.Decode(world.Render(e.post, e.placement_seed));
    bad_decode += !(pre == e.pre) || !(post == e.post);
    bad_pre += !a.pre_label.SatisfiedBy(pre);
    bad_post += !a.post_label.SatisfiedBy(post);
  }
  return {bad_pre == 0 && bad_post == 0 && bad_decode == 0,
          Fmt("10000 examples: %.0f pre and %.0f post violations, %.0f decode mismatches",
              static_cast<double>(bad_pre), static_cast<double>(bad_post),
              static_cast<double>(bad_decode))};
}

Outcome SamplerStatistics() {
  const gridworld::World world;
  Rng rng(DeriveSeed(7, "acceptance/sampler"));
  const int samples = 10000;
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) sum += static_cast<double>(world.SampleState(rng).Count());
  const double n = static_cast<double>(world.index().size());
  const double p = world.config().prior;
  const double mean = sum / samples;
  const double sigma = std::sqrt(n * p * (1 - p) / samples);
  return {std::abs(mean - p * n) <= 3 * sigma,
          Fmt("mean %.4f true bits, expected %.4f, sigma %.4f", mean, p * n, sigma)};
}

Outcome Planner() {
  const gridworld::World world;
  const Dnf goal = CompileGoal(world.problem().goal, world.index());
  Rng rng(DeriveSeed(7, "acceptance/planner"));
  int solved = 0;
  size_t max_expanded = 0;
  for (int i = 0; i < 100; ++i) {
    const ClosedState s = RandomInstance(world, goal, rng, i % 5 == 0);
    const Plan p = PlanGbfs(s, goal, world.actions(), kDefaultPlanBudget);
    solved += p.solved() && ValidatePlan(s, goal, world.actions(), p.actions);
    max_expanded = std::max(max_expanded, p.expanded);
  }
  std::ifstream in(testing::SourcePath("tests/fixtures/plan_lengths.json"));
  const nlohmann::json fixture = nlohmann::json::parse(in);
  int optimal = 0, total = 0;
  for (const auto& inst : fixture["instances"]) {
    ClosedState s(world.index().size());
    for (const auto& name : inst["init"]) s.Set(*world.index().FindByName(name.get<std::string>()));
    const Plan p = PlanGbfs(s, goal, world.actions(), kDefaultPlanBudget);
    optimal += p.solved() && p.depth() == inst["bfs_length"].get<size_t>() &&
               ValidatePlan(s, goal, world.actions(), p.actions);
    ++total;
  }
  return {solved == 100 && optimal == total,
          Fmt("%.0f/100 solved and validated (max %.0f expansions); %.0f/%.0f fixture plans optimal",
              solved, static_cast<double>(max_expanded), optimal, total)};
}

Outcome ClosedLoop(const LoopReport& l) {
  const bool pass = l.oracle_success == l.episodes && l.episodes == 50 && l.disturbed == 10 &&
                    l.model_success > l.random_success;
  return {pass, Fmt("oracle %.0f/50 (%.0f disturbed), dnf model %.0f/50, random %.0f/50",
                    l.oracle_success, l.disturbed, l.model_success, l.random_success)};
}

Outcome Determinism(const fs::path& work) {
  ExperimentConfig a = ExperimentConfig::Smoke();
  a.out = (work / "determinism_a").string();
  ExperimentConfig b = a;
  b.out = (work / "determinism_b").string();
  RunExperiment(a);
  RunExperiment(b);
  int differ = 0, files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a.out)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a.out);
    ++files;
    const fs::path other = fs::path(b.out) / rel;
    differ += !fs::exists(other) || ReadFile(entry.path().string()) != ReadFile(other.string());
  }
  return {differ == 0 && files > 0,
          Fmt("%.0f of %.0f output files differ between two smoke runs", differ, files)};
}

int Main(int argc, char** argv) {
  bool strict = false;
  std::set<int> only;
  fs::path work = fs::temp_directory_path() / "pgk_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--strict") {
      strict = true;
    } else if (arg == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
    } else if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::fprintf(stderr, "usage: acceptance_test [--strict] [--only 1,2,...] [--work DIR]\n");
      return 2;
    }
  }
  ApplyThreadLimit();
  fs::remove_all(work);
  fs::create_directories(work);
  auto wanted = [&](int k) { return only.empty() || only.count(k) > 0; };

  // Criteria 5 and 10 share one run of the paper profile.
  std::optional<ExperimentReport> paper;
  double paper_seconds = 0.0;
  auto run_paper = [&]() -> const ExperimentReport& {
    if (!paper) {
      ExperimentConfig config = ExperimentConfig::Paper();
      config.out = (work / "paper").string();
      const auto start = Clock::now();
      paper = RunExperiment(config, [](const std::string& line) {
        std::fprintf(stderr, "  %s\n", line.c_str());
      });
      paper_seconds = Seconds(start);
    }
    return *paper;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"collapse equals determined set", CollapseEqualsDeterminedSet},
      {"collapse soundness and maximality", CollapseLemmas},
      {"dnf preserves truth", DnfPreservesTruth},
      {"loss gradients", LossGradients},
      {"paper-profile F1", [&] { const auto& r = run_paper(); return PaperProfile(r, paper_seconds); }},
      {"dnf scaling to 100k", [&] { return ScalingCheck(work); }},
      {"label soundness", LabelSoundness},
      {"sampler statistics", SamplerStatistics},
      {"planner", Planner},
      {"closed loop", [&] { return ClosedLoop(run_paper().loop); }},
      {"determinism", [&] { return Determinism(work); }},
  };

  int failed = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!wanted(id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id,
                criteria[k].first.c_str(), o.detail.c_str(), Seconds(start));
    std::fflush(stdout);
  }
  std::printf("acceptance: %d failed\n", failed);
  return strict && failed > 0 ? 1 : 0;
}

}  // namespace
}  // namespace pgk

int main(int argc, char** argv) { return pgk::Main(argc, argv); }
