/**
 * model.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/model.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pgk/util.h"

namespace pgk {

namespace {

constexpr char kMagic[4] = {'P', 'G', 'K', 'M'};

void FillUniform(float* begin, size_t n, double bound, Rng& rng) {
  for (size_t i = 0; i < n; ++i) {
    begin[i] = static_cast<float>((2.0 * UniformReal(rng) - 1.0) * bound);
  }
}

}  // namespace

nlohmann::ordered_json ModelShape::ToJson() const {
  return {{"obs_channels", obs_channels}, {"slots", slots}, {"hidden", hidden},
          {"outputs", outputs},           {"cells", cells}};
}

ModelShape ModelShape::FromJson(const nlohmann::json& j) {
  ModelShape s;
  s.obs_channels = j.at("obs_channels").get<int>();
  s.slots = j.at("slots").get<int>();
  s.hidden = j.at("hidden").get<int>();
  s.outputs = j.at("outputs").get<int>();
  s.cells = j.at("cells").get<int>();
  return s;
}

Model Model::Init(const ModelShape& shape, uint64_t seed) {
  Model m = Zero(shape);
  Rng rng(seed);
  float* p = m.params.data();
  FillUniform(p + shape.w_in(), static_cast<size_t>(shape.in_dim()) * shape.hidden,
              std::sqrt(6.0 / shape.in_dim()), rng);
  FillUniform(p + shape.w_h(), static_cast<size_t>(shape.hidden) * shape.hidden,
              std::sqrt(6.0 / shape.hidden), rng);
  FillUniform(p + shape.w_out(), static_cast<size_t>(shape.hidden) * shape.outputs,
              std::sqrt(6.0 / (shape.hidden + shape.outputs)), rng);
  return m;
}

Model Model::Zero(const ModelShape& shape) {
  if (shape.obs_channels <= 0 || shape.slots < 0 || shape.hidden <= 0 ||
      shape.outputs <= 0 || shape.cells <= 0) {
    throw std::invalid_argument("Model: shape entries must be positive.");
  }
  return Model{shape, std::vector<float>(shape.num_params(), 0.0f)};
}

void SaveModel(const std::string& path, const Model& model,
               const PropositionIndex& index,
               const nlohmann::ordered_json& metadata) {
  nlohmann::ordered_json header;
  header["format"] = "pgk-model-1";
  header["shape"] = model.shape.ToJson();
  header["num_params"] = model.params.size();
  header["index_hash"] = index.HashHex();
  if (!metadata.is_null()) header["metadata"] = metadata;
  const std::string text = header.dump();
  const uint32_t length = static_cast<uint32_t>(text.size());

  std::string bytes(kMagic, 4);
  bytes.append(reinterpret_cast<const char*>(&length), sizeof(length));
  bytes += text;
  bytes.append(reinterpret_cast<const char*>(model.params.data()),
               model.params.size() * sizeof(float));
  WriteFile(path, bytes);
}

Model LoadModel(const std::string& path, const PropositionIndex& index,
                nlohmann::json* header_out) {
  const std::string bytes = ReadFile(path);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("LoadModel(): " + path + " is not a model checkpoint.");
  }
  uint32_t length = 0;
  std::memcpy(&length, bytes.data() + 4, sizeof(length));
  if (bytes.size() < 8 + static_cast<size_t>(length)) {
    throw std::runtime_error("LoadModel(): truncated header in " + path);
  }
  const nlohmann::json header = nlohmann::json::parse(bytes.substr(8, length));
  if (header.at("index_hash").get<std::string>() != index.HashHex()) {
    throw std::runtime_error("LoadModel(): checkpoint was trained on a different "
                             "proposition index (hash " +
                             header.at("index_hash").get<std::string>() + ", expected " +
                             index.HashHex() + ").");
  }
  Model m = Model::Zero(ModelShape::FromJson(header.at("shape")));
  const size_t blob = m.params.size() * sizeof(float);
  if (bytes.size() != 8 + static_cast<size_t>(length) + blob) {
    throw std::runtime_error("LoadModel(): parameter blob has the wrong size in " + path);
  }
  std::memcpy(m.params.data(), bytes.data() + 8 + length, blob);
  if (header_out != nullptr) *header_out = header;
  return m;
}

}  // namespace pgk
