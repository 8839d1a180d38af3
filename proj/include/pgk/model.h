/**
 * model.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Predicate classifier f(I, b_1..b_M) -> P logits. Each grid cell carries the
 * observation channels plus two binary planes per argument slot: the object's
 * footprint (cells drawn solid) and its interior region (empty for objects
 * that contain nothing). Cells are embedded linearly with a rectifier,
 * mean-pooled, passed through one hidden layer, and mapped to one logit per
 * predicate.
 */

#ifndef PGK_MODEL_H_
#define PGK_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgk/logic.h"

namespace pgk {

struct ModelShape {
  int obs_channels = 14;
  int slots = 3;
  int hidden = 128;
  int outputs = 6;
  int cells = 256;

  int in_dim() const { return obs_channels + 2 * slots; }

  // Flat parameter layout, in order.
  size_t w_in() const { return 0; }  // [in_dim][hidden]
  size_t b_in() const { return w_in() + static_cast<size_t>(in_dim()) * hidden; }
  size_t w_h() const { return b_in() + hidden; }  // [hidden][hidden]
  size_t b_h() const { return w_h() + static_cast<size_t>(hidden) * hidden; }
  size_t w_out() const { return b_h() + hidden; }  // [hidden][outputs]
  size_t b_out() const { return w_out() + static_cast<size_t>(hidden) * outputs; }
  size_t num_params() const { return b_out() + outputs; }

  nlohmann::ordered_json ToJson() const;
  static ModelShape FromJson(const nlohmann::json& j);
  bool operator==(const ModelShape&) const = default;
};

struct Model {
  ModelShape shape;
  std::vector<float> params;

  // Uniform fan-in initialization from a seeded stream; biases start at 0.
  static Model Init(const ModelShape& shape, uint64_t seed);
  static Model Zero(const ModelShape& shape);
};

/**
 * Checkpoint: "PGKM", little-endian uint32 header length, JSON header
 * (shape, index hash, caller metadata), then float32 parameters.
 */
void SaveModel(const std::string& path, const Model& model,
               const PropositionIndex& index,
               const nlohmann::ordered_json& metadata = {});
// Throws std::runtime_error on format errors or an index hash mismatch.
Model LoadModel(const std::string& path, const PropositionIndex& index,
                nlohmann::json* header = nullptr);

}  // namespace pgk

#endif  // PGK_MODEL_H_
