/**
 * model_test.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pgk/kernels.h"
#include "pgk/model.h"
#include "pgk/train.h"
#include "test_support.h"

namespace pgk {
namespace {

using gridworld::Observation;
using gridworld::World;

const World& Shared() {
  static const World w;
  return w;
}

// Dense masks for one tuple, built the same way the classifier does.
struct OwnedMasks {
  std::vector<std::vector<int>> footprints, interiors;
  TupleMasks masks;
};

OwnedMasks MasksFor(const World& w, const Observation& obs, const std::vector<ObjectId>& args,
                    int slots) {
  OwnedMasks m;
  m.masks.assign(slots, ArgMask{});
  m.footprints.reserve(args.size());
  m.interiors.reserve(args.size());
  for (size_t k = 0; k < args.size(); ++k) {
    m.footprints.push_back(w.Footprint(obs, args[k]));
    m.interiors.push_back(w.Interior(args[k]));
    m.masks[k] = ArgMask{m.footprints.back().empty() ? nullptr : &m.footprints.back(),
                         m.interiors.back().empty() ? nullptr : &m.interiors.back()};
  }
  return m;
}

bool Close(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= rel * std::max(abs_floor, std::max(std::abs(a), std::abs(b)));
}

TEST_SUITE("model") {

TEST_CASE("shape layout and checks") {
  const ModelShape s{3, 2, 4, 2, 16};
  CHECK(s.in_dim() == 7);
  CHECK(s.num_params() == 7 * 4 + 4 + 4 * 4 + 4 + 4 * 2 + 2);
  CHECK(ModelShape::FromJson(s.ToJson()) == s);
  CHECK_THROWS_AS(Model::Zero(ModelShape{0, 1, 1, 1, 1}), std::invalid_argument);
  CHECK(Model::Init(s, 3).params == Model::Init(s, 3).params);
  CHECK_FALSE(Model::Init(s, 3).params == Model::Init(s, 4).params);
}

TEST_CASE("zero parameters give zero logits") {
  const World& w = Shared();
  const Model m = Model::Zero(ShapeFor(w, 16));
  const Observation obs(w.height(), w.width(), w.channels());
  TupleMasks masks(m.shape.slots);
  for (float y : Forward(m, obs, masks)) CHECK(y == 0.0f);
  for (float y : AssembleState(m, w, w.Render(ClosedState(w.index().size()), 1))) CHECK(y == 0.0f);
}

TEST_CASE("swapping argument masks changes the logits") {
  const World& w = Shared();
  const Model m = Model::Init(ShapeFor(w, 32), 5);
  Rng rng(2);
  const Observation obs = w.Render(w.SampleState(rng), 9);
  const ObjectId key = *w.index().FindObject("door_key");
  const ObjectId door = *w.index().FindObject("door");
  const OwnedMasks ab = MasksFor(w, obs, {key, door}, m.shape.slots);
  const OwnedMasks ba = MasksFor(w, obs, {door, key}, m.shape.slots);
  CHECK_FALSE(Forward(m, obs, ab.masks) == Forward(m, obs, ba.masks));
}

TEST_CASE("one pass per argument tuple, each logit traceable to one output") {
  std::vector<ObjectSym> objs = {{0, "a", "object"}, {1, "b", "object"}, {2, "c", "object"}};
  const PropositionIndex unary = EnumeratePropositions({{"p", {{"?x", TypeRef()}}}}, objs);
  CHECK(TupleTable::Build(unary).size() == 3);

  const World& w = Shared();
  const TupleTable t = TupleTable::Build(w.index());
  std::vector<int> seen(w.index().size(), 0);
  for (size_t i = 0; i < t.size(); ++i) {
    for (const TupleTable::Output& o : t.outputs[i]) {
      ++seen[o.proposition];
      CHECK(w.index()[o.proposition].predicate == o.predicate);
      CHECK(w.index()[o.proposition].args == t.tuples[i]);
      CHECK(t.tuple_of[o.proposition] == i);
    }
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("reference gradient matches central differences") {
  const ModelShape shape{3, 2, 5, 3, 12};
  const Model init = Model::Init(shape, 11);
  std::vector<double> params(init.params.begin(), init.params.end());
  Rng rng(6);
  for (size_t b = shape.b_in(); b < shape.w_h(); ++b) params[b] = 0.3 * UniformReal(rng);
  std::vector<double> x(static_cast<size_t>(shape.cells) * shape.in_dim());
  for (double& v : x) v = UniformInt(rng, 3) * 0.5;
  const std::vector<double> c = {0.7, -1.3, 0.4};

  auto loss = [&](const std::vector<double>& p) {
    std::vector<double> y(shape.outputs);
    ReferenceForward(p.data(), shape, x, y.data());
    double l = 0.0;
    for (int k = 0; k < shape.outputs; ++k) l += c[k] * y[k];
    return l;
  };
  ReferenceCache<double> cache;
  std::vector<double> y(shape.outputs), grad(params.size(), 0.0);
  ReferenceForward(params.data(), shape, x, y.data(), &cache);
  ReferenceBackward(params.data(), shape, x, cache, c.data(), grad.data());

  int checked = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    const double h = 1e-6;
    std::vector<double> up = params, down = params;
    up[i] += h;
    down[i] -= h;
    const double fd = (loss(up) - loss(down)) / (2 * h);
    CHECK_MESSAGE(Close(fd, grad[i], 1e-4, 1e-6), "param " << i << " fd " << fd << " grad " << grad[i]);
    checked += grad[i] != 0.0;
  }
  CHECK(checked > static_cast<int>(params.size()) / 2);
}

TEST_CASE("fast kernel agrees with the reference") {
  const World& w = Shared();
  const ModelShape shape = ShapeFor(w, 24);
  Model m = Model::Init(shape, 21);
  Rng rng(13);
  for (size_t b = shape.b_in(); b < shape.w_h(); ++b) m.params[b] = 0.2f * static_cast<float>(UniformReal(rng) - 0.5);

  Classifier clf(w, shape);
  clf.Prepare(m.params.data());
  Classifier::Workspace ws = clf.MakeWorkspace();
  const TupleTable& table = clf.tuples();
  const size_t n = w.index().size();

  for (int trial = 0; trial < 6; ++trial) {
    const ClosedState s = w.SampleState(rng);
    const Observation obs = w.Render(s, rng());
    std::vector<float> logits(n, 0.0f), dlogits(n);
    for (float& d : dlogits) d = static_cast<float>(UniformReal(rng) - 0.5);
    clf.AssembleState(ws, obs, logits.data());
    std::vector<float> fast_grad(shape.num_params(), 0.0f);
    clf.Backward(ws, dlogits.data(), fast_grad.data());

    std::vector<double> ref_grad(shape.num_params(), 0.0);
    const std::vector<double> params(m.params.begin(), m.params.end());
    for (size_t t = 0; t < table.size(); ++t) {
      const OwnedMasks om = MasksFor(w, obs, table.tuples[t], shape.slots);
      const std::vector<double> x = DenseInput<double>(obs, om.masks, shape);
      std::vector<double> y(shape.outputs), dy(shape.outputs, 0.0);
      ReferenceCache<double> cache;
      ReferenceForward(params.data(), shape, x, y.data(), &cache);
      for (const TupleTable::Output& o : table.outputs[t]) {
        REQUIRE(Close(logits[o.proposition], y[o.predicate], 1e-4, 1e-3));
        dy[o.predicate] = dlogits[o.proposition];
      }
      ReferenceBackward(params.data(), shape, x, cache, dy.data(), ref_grad.data());
    }
    double max_ref = 0.0;
    for (double g : ref_grad) max_ref = std::max(max_ref, std::abs(g));
    for (size_t i = 0; i < ref_grad.size(); ++i) {
      REQUIRE_MESSAGE(std::abs(fast_grad[i] - ref_grad[i]) <= 1e-4 * max_ref + 1e-6,
                      "param " << i);
    }
  }
}

TEST_CASE("checkpoints round-trip and check the index") {
  const World& w = Shared();
  const Model m = Model::Init(ShapeFor(w, 16), 1);
  const auto path = std::filesystem::temp_directory_path() / "pgk_model_test.pgkm";
  SaveModel(path.string(), m, w.index(), {{"regime", "dnf"}});
  nlohmann::json header;
  const Model back = LoadModel(path.string(), w.index(), &header);
  CHECK(back.shape == m.shape);
  CHECK(back.params == m.params);
  CHECK(header["metadata"]["regime"] == "dnf");
  CHECK(header["index_hash"] == w.index().HashHex());

  std::vector<ObjectSym> objs = {{0, "a", "object"}};
  const PropositionIndex other = EnumeratePropositions({{"p", {{"?x", TypeRef()}}}}, objs);
  CHECK_THROWS_AS(LoadModel(path.string(), other), std::runtime_error);

  {
    std::ofstream truncate(path, std::ios::binary | std::ios::trunc);
    truncate << "PGKM";
  }
  CHECK_THROWS_AS(LoadModel(path.string(), w.index()), std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(LoadModel(path.string(), w.index()), std::runtime_error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace pgk
