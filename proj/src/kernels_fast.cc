/**
 * kernels_fast.cc
 *
 * Copyright 2026. All Rights Reserved.
 *
 * With A(c) = W_obs^T obs(c) + b the mask-free pre-activation of cell c and
 * M_t(c) the mask contribution of tuple t, the pooled embedding is
 *
 *   pool_t = (sum_c relu(A(c)) - sum_{c in S_t} relu(A(c))
 *             + sum_{c in S_t} relu(A(c) + M_t(c))) / cells
 *
 * where S_t is the union of the tuple's masks. The first sum is shared by all
 * tuples of an image and differs from the background's only on cells where
 * the image differs from the background.
 */

#include <algorithm>
#include <stdexcept>

#include "pgk/kernels.h"

namespace pgk {

namespace {

inline float Relu(float x) { return x > 0.0f ? x : 0.0f; }

}  // namespace

FastKernel::FastKernel(const ModelShape& shape, const gridworld::Observation& background)
    : shape_(shape), background_(background) {
  if (background.channels != shape.obs_channels || background.cells() != shape.cells) {
    throw std::invalid_argument("FastKernel: background does not match the model.");
  }
  if (2 * shape.slots > 32) throw std::invalid_argument("FastKernel: too many slots.");
}

void FastKernel::Embed(const gridworld::Observation& obs, int cell, float* out) const {
  const int hid = shape_.hidden;
  const float* b_in = params_ + shape_.b_in();
  std::copy(b_in, b_in + hid, out);
  for (int ch = 0; ch < shape_.obs_channels; ++ch) {
    const float v = obs.at(cell, ch);
    if (v == 0.0f) continue;
    const float* w = params_ + shape_.w_in() + static_cast<size_t>(ch) * hid;
    for (int j = 0; j < hid; ++j) out[j] += v * w[j];
  }
}

void FastKernel::Prepare(const float* params) {
  params_ = params;
  const int hid = shape_.hidden;
  a_bg_.assign(static_cast<size_t>(shape_.cells) * hid, 0.0f);
  relu_bg_.assign(hid, 0.0f);
  count_bg_.assign(hid, 0.0f);
  g_bg_.assign(static_cast<size_t>(shape_.obs_channels) * hid, 0.0f);
  for (int c = 0; c < shape_.cells; ++c) {
    float* a = &a_bg_[static_cast<size_t>(c) * hid];
    Embed(background_, c, a);
    for (int j = 0; j < hid; ++j) {
      relu_bg_[j] += Relu(a[j]);
      if (a[j] > 0.0f) count_bg_[j] += 1.0f;
    }
    for (int ch = 0; ch < shape_.obs_channels; ++ch) {
      const float v = background_.at(c, ch);
      if (v == 0.0f) continue;
      float* g = &g_bg_[static_cast<size_t>(ch) * hid];
      for (int j = 0; j < hid; ++j) {
        if (a[j] > 0.0f) g[j] += v;
      }
    }
  }
}

FastKernel::Workspace FastKernel::MakeWorkspace() const {
  Workspace ws;
  const size_t cells = shape_.cells;
  const size_t hid = shape_.hidden;
  ws.delta_slot.assign(cells, -1);
  ws.relu_sum.assign(hid, 0.0f);
  ws.stamp.assign(cells, 0);
  ws.cell_bits.assign(cells, 0);
  ws.coef.assign(hid, 0.0f);
  ws.corr.assign(cells * hid, 0.0f);
  ws.touched_flag.assign(cells, 0);
  ws.mterm.assign(hid, 0.0f);
  return ws;
}

void FastKernel::Load(const gridworld::Observation& obs, Workspace& ws) const {
  if (obs.channels != shape_.obs_channels || obs.cells() != shape_.cells) {
    throw std::invalid_argument("FastKernel::Load(): observation does not match the model.");
  }
  const int hid = shape_.hidden;
  for (int c : ws.delta_cells) ws.delta_slot[c] = -1;
  ws.delta_cells.clear();
  ws.obs = &obs;
  for (int c = 0; c < shape_.cells; ++c) {
    for (int ch = 0; ch < shape_.obs_channels; ++ch) {
      if (obs.at(c, ch) != background_.at(c, ch)) {
        ws.delta_slot[c] = static_cast<int>(ws.delta_cells.size());
        ws.delta_cells.push_back(c);
        break;
      }
    }
  }
  ws.delta_a.resize(ws.delta_cells.size() * hid);
  ws.relu_sum = relu_bg_;
  for (size_t k = 0; k < ws.delta_cells.size(); ++k) {
    const int c = ws.delta_cells[k];
    float* a = &ws.delta_a[k * hid];
    Embed(obs, c, a);
    const float* bg = &a_bg_[static_cast<size_t>(c) * hid];
    for (int j = 0; j < hid; ++j) ws.relu_sum[j] += Relu(a[j]) - Relu(bg[j]);
  }
  ws.num_tuples = 0;
  std::fill(ws.coef.begin(), ws.coef.end(), 0.0f);
}

size_t FastKernel::Forward(Workspace& ws, const TupleMasks& masks, float* logits) const {
  if (static_cast<int>(masks.size()) > shape_.slots) {
    throw std::invalid_argument("FastKernel::Forward(): more masks than slots.");
  }
  const int hid = shape_.hidden;
  const size_t t = ws.num_tuples++;
  if (ws.tuples.size() <= t) ws.tuples.resize(t + 1);
  Workspace::Tuple& tup = ws.tuples[t];
  tup.support.clear();
  tup.bits.clear();

  if (++ws.generation == 0) {
    std::fill(ws.stamp.begin(), ws.stamp.end(), 0);
    ws.generation = 1;
  }
  for (size_t k = 0; k < masks.size(); ++k) {
    const std::vector<int>* planes[2] = {masks[k].footprint, masks[k].interior};
    for (int plane = 0; plane < 2; ++plane) {
      if (planes[plane] == nullptr) continue;
      for (int c : *planes[plane]) {
        if (ws.stamp[c] != ws.generation) {
          ws.stamp[c] = ws.generation;
          ws.cell_bits[c] = 0;
          tup.support.push_back(c);
        }
        ws.cell_bits[c] |= 1u << (2 * k + plane);
      }
    }
  }

  tup.pooled = ws.relu_sum;
  const float* w_in = params_ + shape_.w_in();
  for (int c : tup.support) {
    const uint32_t bits = ws.cell_bits[c];
    tup.bits.push_back(bits);
    std::fill(ws.mterm.begin(), ws.mterm.end(), 0.0f);
    for (uint32_t b = bits; b != 0; b &= b - 1) {
      const int k = __builtin_ctz(b);
      const float* w = w_in + static_cast<size_t>(shape_.obs_channels + k) * hid;
      for (int j = 0; j < hid; ++j) ws.mterm[j] += w[j];
    }
    const float* a = A(ws, c);
    for (int j = 0; j < hid; ++j) tup.pooled[j] += Relu(a[j] + ws.mterm[j]) - Relu(a[j]);
  }
  const float inv = 1.0f / static_cast<float>(shape_.cells);
  for (int j = 0; j < hid; ++j) tup.pooled[j] *= inv;

  const float* w_h = params_ + shape_.w_h();
  const float* b_h = params_ + shape_.b_h();
  tup.z.assign(b_h, b_h + hid);
  for (int i = 0; i < hid; ++i) {
    const float p = tup.pooled[i];
    if (p == 0.0f) continue;
    const float* w = w_h + static_cast<size_t>(i) * hid;
    for (int j = 0; j < hid; ++j) tup.z[j] += p * w[j];
  }
  tup.h.resize(hid);
  for (int j = 0; j < hid; ++j) tup.h[j] = Relu(tup.z[j]);

  const float* w_out = params_ + shape_.w_out();
  const float* b_out = params_ + shape_.b_out();
  for (int k = 0; k < shape_.outputs; ++k) logits[k] = b_out[k];
  for (int j = 0; j < hid; ++j) {
    const float hj = tup.h[j];
    if (hj == 0.0f) continue;
    const float* w = w_out + static_cast<size_t>(j) * shape_.outputs;
    for (int k = 0; k < shape_.outputs; ++k) logits[k] += hj * w[k];
  }
  return t;
}

void FastKernel::Backward(Workspace& ws, size_t t, const float* dlogits, float* grad) const {
  const int hid = shape_.hidden;
  const int out = shape_.outputs;
  const Workspace::Tuple& tup = ws.tuples.at(t);
  const float* w_h = params_ + shape_.w_h();
  const float* w_out = params_ + shape_.w_out();

  std::vector<float> dz(hid, 0.0f);
  for (int j = 0; j < hid; ++j) {
    const float* w = w_out + static_cast<size_t>(j) * out;
    float* g = grad + shape_.w_out() + static_cast<size_t>(j) * out;
    float dh = 0.0f;
    for (int k = 0; k < out; ++k) {
      g[k] += tup.h[j] * dlogits[k];
      dh += w[k] * dlogits[k];
    }
    dz[j] = tup.z[j] > 0.0f ? dh : 0.0f;
  }
  for (int k = 0; k < out; ++k) grad[shape_.b_out() + k] += dlogits[k];

  const float inv = 1.0f / static_cast<float>(shape_.cells);
  std::vector<float> gp(hid, 0.0f);
  for (int i = 0; i < hid; ++i) {
    const float* w = w_h + static_cast<size_t>(i) * hid;
    float* g = grad + shape_.w_h() + static_cast<size_t>(i) * hid;
    const float p = tup.pooled[i];
    float d = 0.0f;
    for (int j = 0; j < hid; ++j) {
      g[j] += p * dz[j];
      d += w[j] * dz[j];
    }
    gp[i] = d * inv;
  }
  for (int j = 0; j < hid; ++j) {
    grad[shape_.b_h() + j] += dz[j];
    ws.coef[j] += gp[j];
  }

  const float* w_in = params_ + shape_.w_in();
  for (size_t s = 0; s < tup.support.size(); ++s) {
    const int c = tup.support[s];
    const uint32_t bits = tup.bits[s];
    std::fill(ws.mterm.begin(), ws.mterm.end(), 0.0f);
    for (uint32_t b = bits; b != 0; b &= b - 1) {
      const float* w = w_in + static_cast<size_t>(shape_.obs_channels + __builtin_ctz(b)) * hid;
      for (int j = 0; j < hid; ++j) ws.mterm[j] += w[j];
    }
    const float* a = A(ws, c);
    float* corr = &ws.corr[static_cast<size_t>(c) * hid];
    bool changed = false;
    for (int j = 0; j < hid; ++j) {
      const bool on = a[j] + ws.mterm[j] > 0.0f;
      const bool off = a[j] > 0.0f;
      if (on != off) {
        corr[j] += on ? gp[j] : -gp[j];
        changed = true;
      }
      if (on) ws.mterm[j] = gp[j];
      else ws.mterm[j] = 0.0f;
    }
    if (changed && !ws.touched_flag[c]) {
      ws.touched_flag[c] = 1;
      ws.touched.push_back(c);
    }
    for (uint32_t b = bits; b != 0; b &= b - 1) {
      float* g = grad + shape_.w_in() +
                 static_cast<size_t>(shape_.obs_channels + __builtin_ctz(b)) * hid;
      for (int j = 0; j < hid; ++j) g[j] += ws.mterm[j];
    }
  }
}

void FastKernel::Finish(Workspace& ws, float* grad) const {
  const int hid = shape_.hidden;
  const int chans = shape_.obs_channels;
  const gridworld::Observation& obs = *ws.obs;

  std::vector<float> count = count_bg_;
  std::vector<float> g = g_bg_;
  for (size_t k = 0; k < ws.delta_cells.size(); ++k) {
    const int c = ws.delta_cells[k];
    const float* a = &ws.delta_a[k * hid];
    const float* bg = &a_bg_[static_cast<size_t>(c) * hid];
    for (int j = 0; j < hid; ++j) {
      count[j] += (a[j] > 0.0f ? 1.0f : 0.0f) - (bg[j] > 0.0f ? 1.0f : 0.0f);
    }
    for (int ch = 0; ch < chans; ++ch) {
      const float v = obs.at(c, ch);
      const float v_bg = background_.at(c, ch);
      if (v == 0.0f && v_bg == 0.0f) continue;
      float* row = &g[static_cast<size_t>(ch) * hid];
      for (int j = 0; j < hid; ++j) {
        row[j] += (a[j] > 0.0f ? v : 0.0f) - (bg[j] > 0.0f ? v_bg : 0.0f);
      }
    }
  }

  float* gb = grad + shape_.b_in();
  for (int j = 0; j < hid; ++j) gb[j] += ws.coef[j] * count[j];
  for (int ch = 0; ch < chans; ++ch) {
    float* gw = grad + shape_.w_in() + static_cast<size_t>(ch) * hid;
    const float* row = &g[static_cast<size_t>(ch) * hid];
    for (int j = 0; j < hid; ++j) gw[j] += ws.coef[j] * row[j];
  }
  for (int c : ws.touched) {
    float* corr = &ws.corr[static_cast<size_t>(c) * hid];
    for (int j = 0; j < hid; ++j) gb[j] += corr[j];
    for (int ch = 0; ch < chans; ++ch) {
      const float v = obs.at(c, ch);
      if (v == 0.0f) continue;
      float* gw = grad + shape_.w_in() + static_cast<size_t>(ch) * hid;
      for (int j = 0; j < hid; ++j) gw[j] += corr[j] * v;
    }
    std::fill(corr, corr + hid, 0.0f);
    ws.touched_flag[c] = 0;
  }
  ws.touched.clear();
  std::fill(ws.coef.begin(), ws.coef.end(), 0.0f);
}

}  // namespace pgk
