/**
 * kernels_reference.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include <stdexcept>

#include "pgk/kernels.h"

namespace pgk {

template <typename T>
std::vector<T> DenseInput(const gridworld::Observation& obs, const TupleMasks& masks,
                          const ModelShape& shape) {
  if (obs.channels != shape.obs_channels || obs.cells() != shape.cells) {
    throw std::invalid_argument("DenseInput(): observation does not match the model.");
  }
  if (static_cast<int>(masks.size()) > shape.slots) {
    throw std::invalid_argument("DenseInput(): more masks than argument slots.");
  }
  const int in = shape.in_dim();
  std::vector<T> x(static_cast<size_t>(shape.cells) * in, T(0));
  for (int c = 0; c < shape.cells; ++c) {
    for (int ch = 0; ch < shape.obs_channels; ++ch) {
      x[static_cast<size_t>(c) * in + ch] = static_cast<T>(obs.at(c, ch));
    }
  }
  for (size_t k = 0; k < masks.size(); ++k) {
    const std::vector<int>* planes[2] = {masks[k].footprint, masks[k].interior};
    for (int plane = 0; plane < 2; ++plane) {
      if (planes[plane] == nullptr) continue;
      for (int c : *planes[plane]) {
        if (c < 0 || c >= shape.cells) {
          throw std::invalid_argument("DenseInput(): mask cell out of range.");
        }
        x[static_cast<size_t>(c) * in + shape.obs_channels + 2 * k + plane] = T(1);
      }
    }
  }
  return x;
}

template <typename T>
void ReferenceForward(const T* params, const ModelShape& shape, const std::vector<T>& x,
                      T* logits, ReferenceCache<T>* cache) {
  const int in = shape.in_dim();
  const int hid = shape.hidden;
  if (x.size() != static_cast<size_t>(shape.cells) * in) {
    throw std::invalid_argument("ReferenceForward(): input has the wrong shape.");
  }
  const T* w_in = params + shape.w_in();
  const T* b_in = params + shape.b_in();
  const T* w_h = params + shape.w_h();
  const T* b_h = params + shape.b_h();
  const T* w_out = params + shape.w_out();
  const T* b_out = params + shape.b_out();

  ReferenceCache<T> local;
  ReferenceCache<T>& c = cache ? *cache : local;
  c.pre.assign(static_cast<size_t>(shape.cells) * hid, T(0));
  c.pooled.assign(hid, T(0));
  for (int cell = 0; cell < shape.cells; ++cell) {
    for (int j = 0; j < hid; ++j) {
      T a = b_in[j];
      for (int i = 0; i < in; ++i) {
        a += x[static_cast<size_t>(cell) * in + i] * w_in[static_cast<size_t>(i) * hid + j];
      }
      c.pre[static_cast<size_t>(cell) * hid + j] = a;
      c.pooled[j] += a > T(0) ? a : T(0);
    }
  }
  for (int j = 0; j < hid; ++j) c.pooled[j] /= static_cast<T>(shape.cells);

  c.z.assign(hid, T(0));
  c.h.assign(hid, T(0));
  for (int j = 0; j < hid; ++j) {
    T z = b_h[j];
    for (int i = 0; i < hid; ++i) z += c.pooled[i] * w_h[static_cast<size_t>(i) * hid + j];
    c.z[j] = z;
    c.h[j] = z > T(0) ? z : T(0);
  }
  for (int k = 0; k < shape.outputs; ++k) {
    T y = b_out[k];
    for (int j = 0; j < hid; ++j) y += c.h[j] * w_out[static_cast<size_t>(j) * shape.outputs + k];
    logits[k] = y;
  }
}

template <typename T>
void ReferenceBackward(const T* params, const ModelShape& shape, const std::vector<T>& x,
                       const ReferenceCache<T>& c, const T* dlogits, T* grad) {
  const int in = shape.in_dim();
  const int hid = shape.hidden;
  const T* w_h = params + shape.w_h();
  const T* w_out = params + shape.w_out();

  std::vector<T> dz(hid, T(0));
  for (int j = 0; j < hid; ++j) {
    T dh = T(0);
    for (int k = 0; k < shape.outputs; ++k) {
      grad[shape.w_out() + static_cast<size_t>(j) * shape.outputs + k] += c.h[j] * dlogits[k];
      dh += w_out[static_cast<size_t>(j) * shape.outputs + k] * dlogits[k];
    }
    dz[j] = c.z[j] > T(0) ? dh : T(0);
  }
  for (int k = 0; k < shape.outputs; ++k) grad[shape.b_out() + k] += dlogits[k];

  std::vector<T> dpool(hid, T(0));
  for (int i = 0; i < hid; ++i) {
    for (int j = 0; j < hid; ++j) {
      grad[shape.w_h() + static_cast<size_t>(i) * hid + j] += c.pooled[i] * dz[j];
      dpool[i] += w_h[static_cast<size_t>(i) * hid + j] * dz[j];
    }
  }
  for (int j = 0; j < hid; ++j) grad[shape.b_h() + j] += dz[j];

  const T scale = T(1) / static_cast<T>(shape.cells);
  for (int cell = 0; cell < shape.cells; ++cell) {
    for (int j = 0; j < hid; ++j) {
      if (c.pre[static_cast<size_t>(cell) * hid + j] <= T(0)) continue;
      const T g = dpool[j] * scale;
      grad[shape.b_in() + j] += g;
      for (int i = 0; i < in; ++i) {
        grad[shape.w_in() + static_cast<size_t>(i) * hid + j] +=
            x[static_cast<size_t>(cell) * in + i] * g;
      }
    }
  }
}

#define PGK_INSTANTIATE(T)                                                            \
  template std::vector<T> DenseInput<T>(const gridworld::Observation&,                \
                                        const TupleMasks&, const ModelShape&);        \
  template void ReferenceForward<T>(const T*, const ModelShape&,                      \
                                    const std::vector<T>&, T*, ReferenceCache<T>*);   \
  template void ReferenceBackward<T>(const T*, const ModelShape&,                     \
                                     const std::vector<T>&, const ReferenceCache<T>&, \
                                     const T*, T*);

PGK_INSTANTIATE(float)
PGK_INSTANTIATE(double)

#undef PGK_INSTANTIATE

}  // namespace pgk
