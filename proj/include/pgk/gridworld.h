/**
 * gridworld.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * The Gridworld simulator: shipped PDDL fixture, random state sampler,
 * pre/post pair construction, renderer and its exact inverse.
 */

#ifndef PGK_GRIDWORLD_H_
#define PGK_GRIDWORLD_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pgk/grounding.h"
#include "pgk/logic.h"
#include "pgk/pddl.h"
#include "pgk/util.h"

namespace pgk::gridworld {

// Shipped fixture text (data/gridworld/*.pddl, embedded at build time).
std::string_view DomainText();
std::string_view ProblemText();

struct GridConfig {
  int height = 16;
  int width = 16;
  double prior = 0.05;
  uint64_t seed = 7;

  // Throws std::invalid_argument unless H, W >= 8 and 0 <= prior < 1.
  void Validate() const;
};

// Overlay channels follow one glyph channel per object.
enum Overlay : int {
  kClosed = 0,
  kLocked,
  kReach,
  kLinkSrc,
  kLinkDst,
  kMatch,
  kNumOverlays,
};

inline constexpr float kSolid = 1.0f;
inline constexpr float kFill = 0.5f;

/**
 * Dense H x W x C tensor, channel-minor. Values are 0, 0.5 or 1.
 */
struct Observation {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Observation() = default;
  Observation(int h, int w, int c)
      : height(h), width(w), channels(c), data(static_cast<size_t>(h) * w * c, 0.0f) {}

  int cells() const { return height * width; }
  float& at(int cell, int channel) { return data[static_cast<size_t>(cell) * channels + channel]; }
  float at(int cell, int channel) const {
    return data[static_cast<size_t>(cell) * channels + channel];
  }
  bool operator==(const Observation&) const = default;
};

// Malformed observation passed to the decoder.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Simulator for the shipped domain and problem. Immutable after construction
 * and safe to share across threads.
 *
 * Layout: container rooms split the top band left to right; the other
 * containers (agent, chest) get pockets in a middle band; the last two rows
 * are a margin holding objects that are in nothing ("limbo") and key/lock
 * match cells.
 */
class World {
 public:
  explicit World(GridConfig config = {});

  const GridConfig& config() const { return config_; }
  const Domain& domain() const { return domain_; }
  const Problem& problem() const { return problem_; }
  const PropositionIndex& index() const { return problem_.index; }
  const std::vector<GroundAction>& actions() const { return actions_; }

  int height() const { return config_.height; }
  int width() const { return config_.width; }
  int channels() const { return num_objects_ + kNumOverlays; }
  int glyph(ObjectId o) const { return o; }
  int overlay(Overlay k) const { return num_objects_ + k; }
  std::vector<std::string> ChannelNames() const;

  // Each bit independently true with probability config.prior.
  ClosedState SampleState(Rng& rng) const;

  // Pure function of (state, placement seed).
  Observation Render(const ClosedState& s, uint64_t placement_seed) const;
  Observation Render(const ClosedState& s, Rng& rng) const { return Render(s, rng()); }

  // Channels of an observation of the empty layout: container fills only.
  Observation Background() const;

  // Exact inverse of Render. Throws DecodeError on malformed tensors.
  ClosedState Decode(const Observation& o) const;

  // Cells drawn solid in o's glyph channel.
  std::vector<int> Footprint(const Observation& obs, ObjectId o) const;
  // Region a container's contents are drawn in (empty for non-containers).
  const std::vector<int>& Interior(ObjectId o) const { return interior_[o]; }

  bool IsContainer(ObjectId o) const { return !interior_[o].empty(); }
  bool IsRoom(ObjectId o) const { return is_room_[o]; }

 private:
  struct Region {
    ObjectId owner = -1;  // -1 for the margin
    int row0 = 0, col0 = 0, rows = 0, cols = 0;
    std::vector<int> cells;
  };

  void BuildLayout();
  int RegionOf(int cell) const { return region_of_cell_[cell]; }

  GridConfig config_;
  Domain domain_;
  Problem problem_;
  std::vector<GroundAction> actions_;
  int num_objects_ = 0;
  int pred_in_ = -1, pred_reachable_ = -1, pred_closed_ = -1, pred_locked_ = -1,
      pred_connects_ = -1, pred_matches_ = -1;
  std::vector<bool> is_room_;
  std::vector<Region> regions_;  // rooms, pockets, then margin (last)
  std::vector<int> region_of_cell_;
  std::vector<int> region_of_object_;
  std::vector<std::vector<int>> interior_;
};

// s_pre = apply_partial(s0, pre_label); s_post = apply_partial(s_pre, post_label).
std::pair<ClosedState, ClosedState> MakePair(const ClosedState& s0,
                                             const GroundAction& a);

/**
 * One generated training pair. Observations are a pure function of the
 * states and `placement_seed`, so they can be rendered on demand.
 */
struct Example {
  size_t action = 0;  // into World::actions()
  ClosedState s0;
  ClosedState pre;
  ClosedState post;
  uint64_t seed = 0;  // per-example stream seed
  uint64_t placement_seed = 0;
};

// Example i of `split` derives everything from DeriveSeed(root, split, i).
Example GenerateExample(const World& world, uint64_t root_seed,
                        std::string_view split, size_t i);
// The example a "sim:<seed>" manifest reference names.
Example ExampleFromSeed(const World& world, uint64_t seed);
std::vector<Example> GenerateExamples(const World& world, uint64_t root_seed,
                                      std::string_view split, size_t count);

struct GenOptions {
  bool full_states = false;         // store ground-truth states per row
  bool write_observations = true;   // observations.f32 + sidecar
};

/**
 * Writes manifest.jsonl, dataset.json and (optionally) the observation store
 * into `dir`. Observation i of example k is at 2k (pre) and 2k + 1 (post).
 */
void GenDataset(const World& world, uint64_t root_seed, std::string_view split,
                size_t count, const std::string& dir, const GenOptions& options);

// Manifest row for an example; observation refs point at the store when
// `store` is set, otherwise at "sim:<seed>#pre|post".
nlohmann::ordered_json ManifestRow(const World& world, const Example& e,
                                   std::string_view split, size_t i, bool store,
                                   bool full_states);

/**
 * Read-only view of an observations.f32 store.
 */
class ObservationStore {
 public:
  static ObservationStore Open(const std::string& dir);

  size_t size() const { return count_; }
  Observation Get(size_t i) const;
  // Resolves "observations.f32#i".
  Observation Resolve(const std::string& ref) const;

 private:
  int height_ = 0, width_ = 0, channels_ = 0;
  size_t count_ = 0;
  std::vector<float> data_;
};

}  // namespace pgk::gridworld

#endif  // PGK_GRIDWORLD_H_
