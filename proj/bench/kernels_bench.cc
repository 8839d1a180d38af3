/**
 * kernels_bench.cc
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Dense serial reference against the sparse kernel, and batched evaluation
 * at one thread against the OpenMP default.
 */

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "pgk/kernels.h"
#include "pgk/train.h"

namespace pgk {
namespace {

using gridworld::Observation;
using gridworld::World;

const World& Shared() {
  static const World w;
  return w;
}

struct Setup {
  Model model;
  Observation obs;
  std::vector<std::vector<int>> footprints;
  std::vector<TupleMasks> masks;  // per tuple

  explicit Setup(int hidden) : model(Model::Init(ShapeFor(Shared(), hidden), 3)) {
    const World& w = Shared();
    Rng rng(5);
    obs = w.Render(w.SampleState(rng), 11);
    for (ObjectId o = 0; o < static_cast<ObjectId>(w.index().objects().size()); ++o) {
      footprints.push_back(w.Footprint(obs, o));
    }
    const TupleTable table = TupleTable::Build(w.index());
    for (const auto& args : table.tuples) {
      TupleMasks m(model.shape.slots);
      for (size_t k = 0; k < args.size(); ++k) {
        const auto& fp = footprints[args[k]];
        const auto& in = w.Interior(args[k]);
        m[k] = ArgMask{fp.empty() ? nullptr : &fp, in.empty() ? nullptr : &in};
      }
      masks.push_back(m);
    }
  }
};

void BM_ReferenceForward(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  std::vector<float> y(s.model.shape.outputs);
  for (auto _ : state) {
    for (const TupleMasks& m : s.masks) {
      const std::vector<float> x = DenseInput<float>(s.obs, m, s.model.shape);
      ReferenceForward(s.model.params.data(), s.model.shape, x, y.data());
      benchmark::DoNotOptimize(y.data());
    }
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_FastForward(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  Classifier clf(Shared(), s.model.shape);
  clf.Prepare(s.model.params.data());
  Classifier::Workspace ws = clf.MakeWorkspace();
  std::vector<float> logits(Shared().index().size());
  for (auto _ : state) {
    clf.AssembleState(ws, s.obs, logits.data());
    benchmark::DoNotOptimize(logits.data());
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_ReferenceForwardBackward(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  std::vector<float> y(s.model.shape.outputs), dy(s.model.shape.outputs, 0.1f);
  std::vector<float> grad(s.model.params.size());
  ReferenceCache<float> cache;
  for (auto _ : state) {
    for (const TupleMasks& m : s.masks) {
      const std::vector<float> x = DenseInput<float>(s.obs, m, s.model.shape);
      ReferenceForward(s.model.params.data(), s.model.shape, x, y.data(), &cache);
      ReferenceBackward(s.model.params.data(), s.model.shape, x, cache, dy.data(), grad.data());
    }
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_FastForwardBackward(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  Classifier clf(Shared(), s.model.shape);
  clf.Prepare(s.model.params.data());
  Classifier::Workspace ws = clf.MakeWorkspace();
  std::vector<float> logits(Shared().index().size());
  std::vector<float> dlogits(logits.size(), 0.1f);
  std::vector<float> grad(s.model.params.size());
  for (auto _ : state) {
    clf.AssembleState(ws, s.obs, logits.data());
    clf.Backward(ws, dlogits.data(), grad.data());
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations());
}

// Argument: worker count (0: OpenMP default).
void BM_Evaluate(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  if (threads > 0) {
    setenv("PGK_THREADS", std::to_string(threads).c_str(), 1);
  } else {
    unsetenv("PGK_THREADS");
  }
  const World& w = Shared();
  const Model model = Model::Init(ShapeFor(w, 128), 3);
  const Dataset test = SimDataset(w, 7, "bench", 256);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Evaluate(model, w, test).overall.tp);
  }
  state.counters["threads"] = threads > 0 ? threads : omp_get_max_threads();
  state.SetItemsProcessed(state.iterations() * 2 * static_cast<int64_t>(test.size()));
  unsetenv("PGK_THREADS");
}

BENCHMARK(BM_ReferenceForward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FastForward)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ReferenceForwardBackward)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FastForwardBackward)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Evaluate)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
}  // namespace pgk

BENCHMARK_MAIN();
