/**
 * train.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/train.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "pgk/labeler.h"
#include "pgk/util.h"

namespace pgk {

using gridworld::Observation;
using gridworld::World;

TupleTable TupleTable::Build(const PropositionIndex& index) {
  TupleTable t;
  std::map<std::vector<ObjectId>, size_t> seen;
  t.tuple_of.resize(index.size());
  for (size_t p = 0; p < index.size(); ++p) {
    const Proposition& prop = index[p];
    auto [it, inserted] = seen.emplace(prop.args, t.tuples.size());
    if (inserted) {
      t.tuples.push_back(prop.args);
      t.outputs.emplace_back();
    }
    t.outputs[it->second].push_back({prop.predicate, p});
    t.tuple_of[p] = it->second;
  }
  return t;
}

ModelShape ShapeFor(const World& world, int hidden) {
  ModelShape shape;
  shape.obs_channels = world.channels();
  shape.slots = static_cast<int>(std::max<size_t>(1, world.index().max_arity()));
  shape.hidden = hidden;
  shape.outputs = static_cast<int>(world.index().predicates().size());
  shape.cells = world.height() * world.width();
  return shape;
}

std::vector<float> Forward(const Model& model, const Observation& obs, const TupleMasks& masks) {
  const std::vector<float> x = DenseInput<float>(obs, masks, model.shape);
  std::vector<float> logits(model.shape.outputs);
  ReferenceForward(model.params.data(), model.shape, x, logits.data());
  return logits;
}

Classifier::Classifier(const World& world, const ModelShape& shape)
    : world_(world), tuples_(TupleTable::Build(world.index())),
      kernel_(shape, world.Background()) {
  if (!(shape == ShapeFor(world, shape.hidden))) {
    throw std::invalid_argument("Classifier: model shape does not fit the world.");
  }
}

Classifier::Workspace Classifier::MakeWorkspace() const {
  Workspace ws;
  ws.kernel = kernel_.MakeWorkspace();
  ws.footprints.resize(world_.index().objects().size());
  ws.tuple_logits.resize(tuples_.size() * shape().outputs);
  return ws;
}

void Classifier::AssembleState(Workspace& ws, const Observation& obs, float* logits,
                               const std::vector<char>* needed) const {
  ws.obs = obs;
  kernel_.Load(ws.obs, ws.kernel);
  for (size_t o = 0; o < ws.footprints.size(); ++o) {
    ws.footprints[o] = world_.Footprint(obs, static_cast<ObjectId>(o));
  }
  ws.forwarded.clear();
  const int outputs = shape().outputs;
  TupleMasks masks(shape().slots);
  for (size_t t = 0; t < tuples_.size(); ++t) {
    if (needed != nullptr && !(*needed)[t]) continue;
    std::fill(masks.begin(), masks.end(), ArgMask{});
    const std::vector<ObjectId>& args = tuples_.tuples[t];
    for (size_t k = 0; k < args.size(); ++k) {
      const std::vector<int>& fp = ws.footprints[args[k]];
      const std::vector<int>& in = world_.Interior(args[k]);
      if (fp.empty() && in.empty()) {
        throw std::invalid_argument("AssembleState(): object '" +
                                    world_.index().objects()[args[k]].name +
                                    "' has no mask in this observation.");
      }
      masks[k] = ArgMask{fp.empty() ? nullptr : &fp, in.empty() ? nullptr : &in};
    }
    float* y = &ws.tuple_logits[t * outputs];
    const size_t slot = kernel_.Forward(ws.kernel, masks, y);
    ws.forwarded.emplace_back(t, slot);
    for (const TupleTable::Output& out : tuples_.outputs[t]) {
      logits[out.proposition] = y[out.predicate];
    }
  }
}

void Classifier::Backward(Workspace& ws, const float* dlogits, float* grad) const {
  std::vector<float> dy(shape().outputs);
  for (const auto& [t, slot] : ws.forwarded) {
    std::fill(dy.begin(), dy.end(), 0.0f);
    bool any = false;
    for (const TupleTable::Output& out : tuples_.outputs[t]) {
      dy[out.predicate] = dlogits[out.proposition];
      any = any || dy[out.predicate] != 0.0f;
    }
    if (any) kernel_.Backward(ws.kernel, slot, dy.data(), grad);
  }
  kernel_.Finish(ws.kernel, grad);
}

std::vector<float> AssembleState(const Model& model, const World& world,
                                 const Observation& obs) {
  Classifier clf(world, model.shape);
  clf.Prepare(model.params.data());
  Classifier::Workspace ws = clf.MakeWorkspace();
  std::vector<float> logits(world.index().size(), 0.0f);
  clf.AssembleState(ws, obs, logits.data());
  return logits;
}

Dataset SimDataset(const World& world, std::vector<gridworld::Example> examples) {
  Dataset d;
  for (const gridworld::Example& e : examples) {
    const GroundAction& a = world.actions()[e.action];
    d.pre_label.push_back(a.pre_label);
    d.post_label.push_back(a.post_label);
    d.pre_state.push_back(e.pre);
    d.post_state.push_back(e.post);
  }
  auto shared = std::make_shared<std::vector<gridworld::Example>>(std::move(examples));
  d.observe = [&world, shared](size_t i, bool post) {
    const gridworld::Example& e = shared->at(i);
    return world.Render(post ? e.post : e.pre, e.placement_seed);
  };
  return d;
}

Dataset SimDataset(const World& world, uint64_t root_seed, std::string_view split,
                   size_t count) {
  Dataset d = SimDataset(world, gridworld::GenerateExamples(world, root_seed, split, count));
  d.seed = root_seed;
  return d;
}

namespace {

ClosedState StateFromNames(const nlohmann::json& names, const PropositionIndex& index) {
  ClosedState s(index.size());
  for (const auto& n : names) {
    const auto p = index.FindByName(n.get<std::string>());
    if (!p) throw std::runtime_error("unknown proposition '" + n.get<std::string>() + "'");
    s.Set(*p);
  }
  return s;
}

// Resolves "observations.f32#i" or "sim:<seed>#pre|post".
struct ObsRef {
  bool sim = false;
  uint64_t value = 0;
  bool post = false;
};

ObsRef ParseRef(const std::string& ref) {
  const size_t hash = ref.find('#');
  if (hash == std::string::npos) throw std::runtime_error("bad observation ref '" + ref + "'");
  const std::string head = ref.substr(0, hash);
  const std::string tail = ref.substr(hash + 1);
  ObsRef r;
  if (head.rfind("sim:", 0) == 0) {
    r.sim = true;
    r.value = std::stoull(head.substr(4));
    if (tail != "pre" && tail != "post") {
      throw std::runtime_error("bad observation ref '" + ref + "'");
    }
    r.post = tail == "post";
  } else if (head == "observations.f32") {
    r.value = std::stoull(tail);
  } else {
    throw std::runtime_error("unsupported observation ref '" + ref + "'");
  }
  return r;
}

}  // namespace

Dataset LoadDataset(const World& world, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  const PropositionIndex& index = world.index();
  Dataset d;
  if (fs::exists(base / "dataset.json")) {
    const nlohmann::json info = nlohmann::json::parse(ReadFile((base / "dataset.json").string()));
    if (info.value("index_hash", "") != index.HashHex()) {
      throw std::runtime_error("LoadDataset(): " + dir +
                               " was generated for a different proposition index.");
    }
    d.seed = info.value("seed", uint64_t{0});
  }
  std::ifstream in(base / "manifest.jsonl");
  if (!in) throw std::runtime_error("LoadDataset(): cannot read " + (base / "manifest.jsonl").string());

  ActionCache cache(world.domain(), index);
  std::vector<std::pair<ObsRef, ObsRef>> refs;
  bool states = true;
  bool any_store = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      const ExampleManifest m = ExampleManifest::FromJson(j);
      const GroundAction& a = cache.Get(m.action, m.args);
      d.pre_label.push_back(a.pre_label);
      d.post_label.push_back(a.post_label);
      refs.emplace_back(ParseRef(m.pre_obs), ParseRef(m.post_obs));
      any_store = any_store || !refs.back().first.sim || !refs.back().second.sim;
      if (states && j.contains("pre_state") && j.contains("post_state")) {
        d.pre_state.push_back(StateFromNames(j["pre_state"], index));
        d.post_state.push_back(StateFromNames(j["post_state"], index));
      } else {
        states = false;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("LoadDataset(): manifest line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  if (!states) {
    d.pre_state.clear();
    d.post_state.clear();
  }
  std::shared_ptr<gridworld::ObservationStore> store;
  if (any_store) {
    store = std::make_shared<gridworld::ObservationStore>(gridworld::ObservationStore::Open(dir));
  }
  auto shared_refs = std::make_shared<std::vector<std::pair<ObsRef, ObsRef>>>(std::move(refs));
  d.observe = [&world, store, shared_refs](size_t i, bool post) {
    const auto& pair = shared_refs->at(i);
    const ObsRef& r = post ? pair.second : pair.first;
    if (!r.sim) return store->Get(r.value);
    const gridworld::Example e = gridworld::ExampleFromSeed(world, r.value);
    return world.Render(r.post ? e.post : e.pre, e.placement_seed);
  };
  return d;
}

std::string RegimeName(Regime r) {
  switch (r) {
    case Regime::kDnf:
      return "dnf";
    case Regime::kOracle:
      return "oracle";
    case Regime::kHalfDnf:
      return "half_dnf";
  }
  return "?";
}

Regime ParseRegime(const std::string& name) {
  if (name == "dnf") return Regime::kDnf;
  if (name == "oracle") return Regime::kOracle;
  if (name == "half_dnf") return Regime::kHalfDnf;
  throw std::invalid_argument("unknown regime '" + name + "' (dnf, oracle, half_dnf)");
}

void TrainConfig::Validate() const {
  if (epochs <= 0 || batch_size <= 0 || !(lr > 0.0) || hidden <= 0) {
    throw std::invalid_argument("TrainConfig: epochs, batch size, step size and width must be positive.");
  }
  if (weighting == Weighting::kClassBalanced && !(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("TrainConfig: beta must lie in (0, 1).");
  }
}

nlohmann::ordered_json TrainConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["regime"] = RegimeName(regime);
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["lr"] = lr;
  j["seed"] = seed;
  j["weighting"] = weighting == Weighting::kUniform ? "uniform" : "class_balanced";
  j["beta"] = beta;
  j["hidden"] = hidden;
  return j;
}

double PredicateMetrics::precision() const {
  if (tp + fp == 0) return fn == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double PredicateMetrics::recall() const {
  if (tp + fn == 0) return fp == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double PredicateMetrics::f1() const {
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

double PredicateMetrics::accuracy() const {
  const uint64_t n = tp + fp + fn + tn;
  return n == 0 ? 1.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

std::string Metrics::ToCsv(uint64_t seed, const std::string& index_hash) const {
  std::string out = "predicate,dist,precision,recall,f1,seed,index_hash\n";
  char buf[256];
  auto row = [&](const PredicateMetrics& m) {
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%.4f,%.4f,%.4f,%llu,%s\n", m.predicate.c_str(),
                  m.dist, m.precision(), m.recall(), m.f1(),
                  static_cast<unsigned long long>(seed), index_hash.c_str());
    out += buf;
  };
  for (const PredicateMetrics& m : per_predicate) row(m);
  row(overall);
  return out;
}

nlohmann::ordered_json Metrics::ToJson() const {
  auto one = [](const PredicateMetrics& m) {
    nlohmann::ordered_json j;
    j["predicate"] = m.predicate;
    j["dist"] = m.dist;
    j["precision"] = m.precision();
    j["recall"] = m.recall();
    j["f1"] = m.f1();
    j["accuracy"] = m.accuracy();
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["fn"] = m.fn;
    j["tn"] = m.tn;
    return j;
  };
  nlohmann::ordered_json j;
  j["per_predicate"] = nlohmann::ordered_json::array();
  for (const PredicateMetrics& m : per_predicate) j["per_predicate"].push_back(one(m));
  j["overall"] = one(overall);
  return j;
}

namespace {

// Counts layout: per predicate tp, fp, fn, tn.
void Count(const PropositionIndex& index, const ClosedState& truth, const ClosedState& pred,
           std::vector<uint64_t>& counts) {
  for (size_t p = 0; p < index.size(); ++p) {
    const size_t base = 4 * static_cast<size_t>(index[p].predicate);
    const bool t = truth.Contains(p);
    const bool y = pred.Contains(p);
    ++counts[base + (t ? (y ? 0 : 2) : (y ? 1 : 3))];
  }
}

Metrics FromCounts(const PropositionIndex& index, const std::vector<uint64_t>& counts) {
  Metrics m;
  m.overall.predicate = "OVERALL";
  uint64_t positives = 0;
  for (size_t k = 0; k < index.predicates().size(); ++k) {
    PredicateMetrics pm;
    pm.predicate = index.predicates()[k].name;
    pm.tp = counts[4 * k];
    pm.fp = counts[4 * k + 1];
    pm.fn = counts[4 * k + 2];
    pm.tn = counts[4 * k + 3];
    positives += pm.tp + pm.fn;
    m.overall.tp += pm.tp;
    m.overall.fp += pm.fp;
    m.overall.fn += pm.fn;
    m.overall.tn += pm.tn;
    m.per_predicate.push_back(pm);
  }
  for (PredicateMetrics& pm : m.per_predicate) {
    pm.dist = positives == 0 ? 0.0
                             : static_cast<double>(pm.tp + pm.fn) / static_cast<double>(positives);
  }
  m.overall.dist = positives == 0 ? 0.0 : 1.0;
  return m;
}

Metrics EvaluateWith(const Classifier& clf, const Dataset& test, size_t limit) {
  if (test.size() == 0) throw std::invalid_argument("Evaluate(): empty test set.");
  if (!test.has_states()) {
    throw std::invalid_argument("Evaluate(): the test set carries no full states.");
  }
  const PropositionIndex& index = clf.world().index();
  const size_t n = limit == 0 ? test.size() : std::min(limit, test.size());
  const size_t stride = 4 * index.predicates().size();
  std::vector<std::vector<uint64_t>> partial(ConfiguredThreads(),
                                             std::vector<uint64_t>(stride, 0));
#pragma omp parallel num_threads(static_cast<int>(partial.size()))
  {
    Classifier::Workspace ws = clf.MakeWorkspace();
    std::vector<float> logits(index.size());
    std::vector<uint64_t>& counts = partial[omp_get_thread_num()];
#pragma omp for schedule(dynamic, 16)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      for (int half = 0; half < 2; ++half) {
        clf.AssembleState(ws, test.observe(i, half == 1), logits.data());
        const ClosedState& truth = half == 1 ? test.post_state[i] : test.pre_state[i];
        Count(index, truth, Threshold(logits.data(), logits.size()), counts);
      }
    }
  }
  std::vector<uint64_t> total(stride, 0);
  for (const auto& c : partial) {
    for (size_t k = 0; k < stride; ++k) total[k] += c[k];
  }
  return FromCounts(index, total);
}

struct Adam {
  std::vector<float> m, v;
  uint64_t t = 0;
  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

  explicit Adam(size_t n) : m(n, 0.0f), v(n, 0.0f) {}

  void Step(std::vector<float>& params, const std::vector<float>& grad, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    const float step = static_cast<float>(lr * std::sqrt(c2) / c1);
    const float eps = static_cast<float>(kEps * std::sqrt(c2));
    for (size_t k = 0; k < params.size(); ++k) {
      const float g = grad[k];
      m[k] = static_cast<float>(kBeta1) * m[k] + static_cast<float>(1.0 - kBeta1) * g;
      v[k] = static_cast<float>(kBeta2) * v[k] + static_cast<float>(1.0 - kBeta2) * g * g;
      params[k] -= step * m[k] / (std::sqrt(v[k]) + eps);
    }
  }
};

}  // namespace

ClosedState Threshold(const float* logits, size_t n) {
  ClosedState s(n);
  for (size_t p = 0; p < n; ++p) {
    if (logits[p] > 0.0f) s.Set(p);
  }
  return s;
}

Metrics ScorePredictions(const PropositionIndex& index, const std::vector<ClosedState>& truth,
                         const std::vector<ClosedState>& predicted) {
  if (truth.empty()) throw std::invalid_argument("ScorePredictions(): empty test set.");
  if (truth.size() != predicted.size()) {
    throw std::invalid_argument("ScorePredictions(): truth and predictions differ in count.");
  }
  std::vector<uint64_t> counts(4 * index.predicates().size(), 0);
  for (size_t i = 0; i < truth.size(); ++i) Count(index, truth[i], predicted[i], counts);
  return FromCounts(index, counts);
}

Metrics Evaluate(const Model& model, const World& world, const Dataset& test, size_t limit) {
  Classifier clf(world, model.shape);
  clf.Prepare(model.params.data());
  return EvaluateWith(clf, test, limit);
}

TrainResult Train(const World& world, const TrainConfig& config, const Dataset& train,
                  const Dataset* test, const std::function<void(const EpochStats&)>& progress) {
  config.Validate();
  const size_t n = train.size();
  if (n == 0) throw std::invalid_argument("Train(): empty training set.");
  if (config.regime == Regime::kOracle && !train.has_states()) {
    throw std::invalid_argument("Train(): the oracle regime needs full training states.");
  }
  const PropositionIndex& index = world.index();
  const size_t num_props = index.size();

  TrainResult result;
  result.model = Model::Init(ShapeFor(world, config.hidden), DeriveSeed(config.seed, "train/init"));
  Model& model = result.model;
  Classifier clf(world, model.shape);
  const size_t num_tuples = clf.tuples().size();

  // Which halves of each example contribute: bit 0 pre, bit 1 post.
  std::vector<uint8_t> halves(n, 3);
  if (config.regime == Regime::kHalfDnf) {
    for (size_t i = 0; i < n; ++i) {
      Rng coin(DeriveSeed(config.seed, "train/half_dnf", i));
      halves[i] = (coin() & 1) ? 2 : 1;
    }
  }
  auto label_of = [&](size_t i, bool post) {
    if (config.regime == Regime::kOracle) {
      return FullLabel(post ? train.post_state[i] : train.pre_state[i]);
    }
    return post ? train.post_label[i] : train.pre_label[i];
  };

  PropWeights weights;
  if (config.weighting == Weighting::kClassBalanced) {
    ClassCounts counts(index.predicates().size());
    for (size_t i = 0; i < n; ++i) {
      for (int half = 0; half < 2; ++half) {
        if (halves[i] & (1 << half)) counts.Add(label_of(i, half == 1), index);
      }
    }
    weights = ExpandWeights(CbWeights(counts, config.beta), index);
  }

  // Tuples to run for a label: those owning a labeled proposition.
  auto needed_for = [&](const PartialState& label, std::vector<char>& needed) {
    std::fill(needed.begin(), needed.end(), 0);
    label.pos().for_each([&](size_t p) { needed[clf.tuples().tuple_of[p]] = 1; });
    label.neg().for_each([&](size_t p) { needed[clf.tuples().tuple_of[p]] = 1; });
  };

  const size_t num_params = model.shape.num_params();
  const size_t batch = static_cast<size_t>(config.batch_size);
  std::vector<std::vector<float>> grads(batch, std::vector<float>(num_params));
  std::vector<double> losses(batch);
  std::vector<float> total(num_params);
  Adam adam(num_params);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  const int threads = ConfiguredThreads();
  std::vector<Classifier::Workspace> workspaces;
  for (int t = 0; t < threads; ++t) workspaces.push_back(clf.MakeWorkspace());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle(DeriveSeed(config.seed, "train/shuffle", static_cast<uint64_t>(epoch)));
    for (size_t k = n; k > 1; --k) std::swap(order[k - 1], order[UniformInt(shuffle, k)]);

    double epoch_loss = 0.0;
    for (size_t begin = 0; begin < n; begin += batch) {
      const size_t size = std::min(batch, n - begin);
      clf.Prepare(model.params.data());
#pragma omp parallel num_threads(threads)
      {
        Classifier::Workspace& ws = workspaces[omp_get_thread_num()];
        std::vector<float> logits(num_props), dlogits(num_props);
        std::vector<char> needed(num_tuples);
#pragma omp for schedule(dynamic, 1)
        for (long long k = 0; k < static_cast<long long>(size); ++k) {
          const size_t i = order[begin + k];
          std::vector<float>& g = grads[k];
          std::fill(g.begin(), g.end(), 0.0f);
          double loss = 0.0;
          for (int half = 0; half < 2; ++half) {
            if (!(halves[i] & (1 << half))) continue;
            const PartialState label = label_of(i, half == 1);
            if (label.empty()) continue;
            needed_for(label, needed);
            clf.AssembleState(ws, train.observe(i, half == 1), logits.data(), &needed);
            std::fill(dlogits.begin(), dlogits.end(), 0.0f);
            loss += CeDnf<float>(logits, label, weights.uniform() ? nullptr : &weights,
                                 dlogits.data());
            clf.Backward(ws, dlogits.data(), g.data());
          }
          losses[k] = loss;
        }
      }
      std::fill(total.begin(), total.end(), 0.0f);
      double batch_loss = 0.0;
      for (size_t k = 0; k < size; ++k) {
        batch_loss += losses[k];
        for (size_t q = 0; q < num_params; ++q) total[q] += grads[k][q];
      }
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("Train(): non-finite loss in epoch " + std::to_string(epoch) +
                              " at example " + std::to_string(begin) + ".");
      }
      const float scale = 1.0f / static_cast<float>(size);
      for (float& g : total) g *= scale;
      adam.Step(model.params, total, config.lr);
      epoch_loss += batch_loss;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = epoch_loss / static_cast<double>(n);
    clf.Prepare(model.params.data());
    stats.train_f1 = train.has_states() ? EvaluateWith(clf, train, config.curve_limit).overall.f1()
                                        : std::numeric_limits<double>::quiet_NaN();
    stats.test_f1 = test != nullptr ? EvaluateWith(clf, *test, config.curve_limit).overall.f1()
                                    : std::numeric_limits<double>::quiet_NaN();
    result.curve.push_back(stats);
    if (progress) progress(stats);
  }
  return result;
}

}  // namespace pgk
