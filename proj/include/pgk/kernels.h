/**
 * kernels.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Forward and backward passes of the predicate classifier. The reference
 * kernel is a direct dense transcription used as a test oracle; the fast
 * kernel exploits that observations differ from a fixed background in a few
 * cells and that argument masks cover a small part of the grid.
 */

#ifndef PGK_KERNELS_H_
#define PGK_KERNELS_H_

#include <cstdint>
#include <vector>

#include "pgk/gridworld.h"
#include "pgk/model.h"

namespace pgk {

// Cells covered by one argument slot. Null pointers mean an empty mask.
struct ArgMask {
  const std::vector<int>* footprint = nullptr;
  const std::vector<int>* interior = nullptr;
};

// One mask per slot; slots past the predicate arity stay empty.
using TupleMasks = std::vector<ArgMask>;

// Per-cell input rows [cells][in_dim]: observation channels then, per slot,
// footprint and interior planes.
template <typename T>
std::vector<T> DenseInput(const gridworld::Observation& obs, const TupleMasks& masks,
                          const ModelShape& shape);

template <typename T>
struct ReferenceCache {
  std::vector<T> pre;     // [cells][hidden] before the rectifier
  std::vector<T> pooled;  // [hidden]
  std::vector<T> z;       // [hidden] before the rectifier
  std::vector<T> h;       // [hidden]
};

template <typename T>
void ReferenceForward(const T* params, const ModelShape& shape, const std::vector<T>& x,
                      T* logits, ReferenceCache<T>* cache = nullptr);

// Accumulates d(loss)/d(params) into grad given d(loss)/d(logits).
template <typename T>
void ReferenceBackward(const T* params, const ModelShape& shape, const std::vector<T>& x,
                       const ReferenceCache<T>& cache, const T* dlogits, T* grad);

/**
 * Sparse kernel. Prepare() once per parameter update; then per image:
 * Load(), Forward() for each argument tuple, optionally Backward() for each of
 * those tuples (in any order), and Finish() to flush the embedding gradients.
 */
class FastKernel {
 public:
  FastKernel(const ModelShape& shape, const gridworld::Observation& background);

  const ModelShape& shape() const { return shape_; }

  void Prepare(const float* params);

  struct Workspace {
    struct Tuple {
      std::vector<int> support;
      std::vector<uint32_t> bits;
      std::vector<float> pooled, z, h;
    };
    const gridworld::Observation* obs = nullptr;
    std::vector<int> delta_cells;
    std::vector<int> delta_slot;  // cell -> row of delta_a, or -1
    std::vector<float> delta_a;
    std::vector<float> relu_sum;
    std::vector<Tuple> tuples;
    size_t num_tuples = 0;
    std::vector<uint32_t> stamp;
    uint32_t generation = 0;
    std::vector<uint32_t> cell_bits;
    std::vector<float> coef;
    std::vector<float> corr;  // [cells][hidden]
    std::vector<char> touched_flag;
    std::vector<int> touched;
    std::vector<float> mterm;
  };

  Workspace MakeWorkspace() const;

  // `obs` is referenced, not copied, and must outlive Finish.
  void Load(const gridworld::Observation& obs, Workspace& ws) const;

  // Returns the tuple's slot in the workspace for Backward().
  size_t Forward(Workspace& ws, const TupleMasks& masks, float* logits) const;
  void Backward(Workspace& ws, size_t tuple, const float* dlogits, float* grad) const;
  void Finish(Workspace& ws, float* grad) const;

 private:
  const float* A(const Workspace& ws, int cell) const {
    const int slot = ws.delta_slot[cell];
    return slot >= 0 ? &ws.delta_a[static_cast<size_t>(slot) * shape_.hidden]
                     : &a_bg_[static_cast<size_t>(cell) * shape_.hidden];
  }
  void Embed(const gridworld::Observation& obs, int cell, float* out) const;

  ModelShape shape_;
  gridworld::Observation background_;
  const float* params_ = nullptr;
  std::vector<float> a_bg_;     // [cells][hidden]
  std::vector<float> relu_bg_;  // [hidden]
  std::vector<float> count_bg_; // [hidden] cells with positive pre-activation
  std::vector<float> g_bg_;     // [obs_channels][hidden]
};

}  // namespace pgk

#endif  // PGK_KERNELS_H_
