/**
 * gridworld.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/gridworld.h"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>

namespace pgk::gridworld {

static_assert(std::endian::native == std::endian::little,
              "observation stores are little-endian");

namespace {

constexpr int kMarginRows = 2;

const char* const kOverlayNames[kNumOverlays] = {"closed", "locked", "reach",
                                                 "link_src", "link_dst", "match"};

int RequirePredicate(const PropositionIndex& index, std::string_view name) {
  const auto p = index.FindPredicate(name);
  if (!p) {
    throw std::invalid_argument("gridworld: domain lacks predicate '" +
                                std::string(name) + "'.");
  }
  return *p;
}

uint64_t RequestHash(uint64_t seed, uint64_t tag, uint64_t id) {
  return SplitMix64(seed ^ SplitMix64(tag * 0x100000001b3ULL + id));
}

}  // namespace

void GridConfig::Validate() const {
  if (height < 8 || width < 8) {
    throw std::invalid_argument("GridConfig: grid must be at least 8x8.");
  }
  if (!(prior >= 0.0 && prior < 1.0)) {
    throw std::invalid_argument("GridConfig: prior must lie in [0, 1).");
  }
}

World::World(GridConfig config)
    : config_(config),
      domain_(ParseDomain(DomainText())),
      problem_(ParseProblem(ProblemText(), domain_)) {
  config_.Validate();
  actions_ = GroundAll(domain_, problem_.index);
  const PropositionIndex& idx = problem_.index;
  num_objects_ = static_cast<int>(idx.objects().size());
  pred_in_ = RequirePredicate(idx, "in");
  pred_reachable_ = RequirePredicate(idx, "reachable");
  pred_closed_ = RequirePredicate(idx, "closed");
  pred_locked_ = RequirePredicate(idx, "locked");
  pred_connects_ = RequirePredicate(idx, "connects");
  pred_matches_ = RequirePredicate(idx, "matches");
  is_room_.assign(num_objects_, false);
  for (ObjectId o : idx.ObjectsOfType(TypeRef("room"))) is_room_[o] = true;
  BuildLayout();
}

void World::BuildLayout() {
  const PropositionIndex& idx = index();
  const int h = config_.height;
  const int w = config_.width;

  std::vector<bool> container(num_objects_, false);
  std::vector<int> in_capacity(num_objects_, 0);
  const auto [in_begin, in_end] = idx.PredicateRange(pred_in_);
  for (size_t p = in_begin; p < in_end; ++p) {
    container[idx[p].args[1]] = true;
    ++in_capacity[idx[p].args[1]];
  }
  std::vector<ObjectId> rooms, pockets;
  for (ObjectId o = 0; o < num_objects_; ++o) {
    if (is_room_[o]) {
      rooms.push_back(o);
    } else if (container[o]) {
      pockets.push_back(o);
    }
  }
  if (rooms.empty()) throw std::invalid_argument("gridworld: no rooms.");

  const int pocket_rows = pockets.empty() ? 0 : std::max(2, h / 4);
  const int room_rows = h - kMarginRows - pocket_rows;
  auto split = [&](const std::vector<ObjectId>& owners, int row0, int rows) {
    const int k = static_cast<int>(owners.size());
    for (int i = 0; i < k; ++i) {
      Region r;
      r.owner = owners[i];
      r.row0 = row0;
      r.rows = rows;
      r.col0 = i * w / k;
      r.cols = (i + 1) * w / k - r.col0;
      regions_.push_back(r);
    }
  };
  split(rooms, 0, room_rows);
  split(pockets, room_rows, pocket_rows);
  Region margin;
  margin.row0 = h - kMarginRows;
  margin.rows = kMarginRows;
  margin.cols = w;
  regions_.push_back(margin);

  region_of_cell_.assign(h * w, -1);
  region_of_object_.assign(num_objects_, -1);
  interior_.assign(num_objects_, {});
  for (size_t r = 0; r < regions_.size(); ++r) {
    Region& reg = regions_[r];
    if (reg.rows <= 0 || reg.cols <= 0) {
      throw std::invalid_argument("gridworld: grid too small for the layout.");
    }
    for (int y = reg.row0; y < reg.row0 + reg.rows; ++y) {
      for (int x = reg.col0; x < reg.col0 + reg.cols; ++x) {
        reg.cells.push_back(y * w + x);
        region_of_cell_[y * w + x] = static_cast<int>(r);
      }
    }
    if (reg.owner >= 0) {
      region_of_object_[reg.owner] = static_cast<int>(r);
      interior_[reg.owner] = reg.cells;
    }
  }

  // Worst-case demand per region, so rendering can never run out of cells.
  const auto [c_begin, c_end] = idx.PredicateRange(pred_connects_);
  std::map<ObjectId, int> pairs_per_door;
  std::vector<int> demand(regions_.size(), 0);
  for (ObjectId o = 0; o < num_objects_; ++o) {
    if (container[o]) demand[region_of_object_[o]] += in_capacity[o];
  }
  for (size_t p = c_begin; p < c_end; ++p) {
    const auto& args = idx[p].args;
    if (!is_room_[args[1]] || !is_room_[args[2]]) {
      throw std::invalid_argument("gridworld: connects must link rooms.");
    }
    ++demand[region_of_object_[args[1]]];
    if (args[1] != args[2]) {
      ++demand[region_of_object_[args[2]]];
      ++pairs_per_door[args[0]];
    }
  }
  const auto [m_begin, m_end] = idx.PredicateRange(pred_matches_);
  demand.back() = static_cast<int>(m_end - m_begin);
  for (ObjectId o = 0; o < num_objects_; ++o) {
    if (!is_room_[o]) ++demand.back();
  }
  for (size_t r = 0; r < regions_.size(); ++r) {
    if (demand[r] > static_cast<int>(regions_[r].cells.size())) {
      throw std::invalid_argument("gridworld: grid too small; a region needs " +
                                  std::to_string(demand[r]) + " cells.");
    }
  }
  for (const auto& [door, pairs] : pairs_per_door) {
    // Each linked pair of one door takes its own row.
    if (pairs > room_rows) {
      throw std::invalid_argument("gridworld: room band has too few rows.");
    }
  }
}

std::vector<std::string> World::ChannelNames() const {
  std::vector<std::string> names;
  for (const ObjectSym& o : index().objects()) names.push_back("glyph:" + o.name);
  for (const char* n : kOverlayNames) names.emplace_back(n);
  return names;
}

ClosedState World::SampleState(Rng& rng) const {
  ClosedState s(index().size());
  for (size_t p = 0; p < s.size(); ++p) {
    if (UniformReal(rng) < config_.prior) s.Set(p);
  }
  return s;
}

Observation World::Background() const {
  Observation o(height(), width(), channels());
  for (const Region& r : regions_) {
    if (r.owner < 0) continue;
    for (int cell : r.cells) o.at(cell, glyph(r.owner)) = kFill;
  }
  return o;
}

Observation World::Render(const ClosedState& s, uint64_t seed) const {
  const PropositionIndex& idx = index();
  if (s.size() != idx.size()) {
    throw std::invalid_argument("Render(): state has the wrong length.");
  }
  Observation o = Background();
  std::vector<bool> used(o.cells(), false);

  // Linear probing from a hashed start keeps a request's cell stable across
  // renders that share a seed.
  auto take = [&](const Region& r, uint64_t tag, uint64_t id) {
    const size_t n = r.cells.size();
    const size_t start = RequestHash(seed, tag, id) % n;
    for (size_t k = 0; k < n; ++k) {
      const int cell = r.cells[(start + k) % n];
      if (!used[cell]) {
        used[cell] = true;
        return cell;
      }
    }
    throw std::logic_error("Render(): region is full.");
  };
  auto free_in_row = [&](const Region& r, int row, uint64_t hash) {
    for (int k = 0; k < r.cols; ++k) {
      const int col = r.col0 + static_cast<int>((hash + k) % r.cols);
      const int cell = row * width() + col;
      if (!used[cell]) return cell;
    }
    return -1;
  };

  const auto [c_begin, c_end] = idx.PredicateRange(pred_connects_);
  std::map<ObjectId, std::vector<bool>> rows_taken;
  for (size_t p = c_begin; p < c_end; ++p) {
    if (!s.Contains(p)) continue;
    const ObjectId door = idx[p].args[0];
    const Region& r1 = regions_[region_of_object_[idx[p].args[1]]];
    const Region& r2 = regions_[region_of_object_[idx[p].args[2]]];
    if (&r1 == &r2) {
      const int cell = take(r1, 1, p);
      o.at(cell, glyph(door)) = kSolid;
      o.at(cell, overlay(kLinkSrc)) = 1.0f;
      o.at(cell, overlay(kLinkDst)) = 1.0f;
      continue;
    }
    auto& taken = rows_taken[door];
    taken.resize(r1.rows, false);
    const uint64_t hash = RequestHash(seed, 2, p);
    bool placed = false;
    for (int k = 0; k < r1.rows && !placed; ++k) {
      const int offset = static_cast<int>((hash + k) % r1.rows);
      if (taken[offset]) continue;
      const int row = r1.row0 + offset;
      const int a = free_in_row(r1, row, hash >> 16);
      const int b = free_in_row(r2, row, hash >> 32);
      if (a < 0 || b < 0) continue;
      used[a] = used[b] = true;
      taken[offset] = true;
      o.at(a, glyph(door)) = kSolid;
      o.at(a, overlay(kLinkSrc)) = 1.0f;
      o.at(b, glyph(door)) = kSolid;
      o.at(b, overlay(kLinkDst)) = 1.0f;
      placed = true;
    }
    if (!placed) throw std::logic_error("Render(): no row for a link pair.");
  }

  std::vector<std::vector<int>> placements(num_objects_);
  const auto [in_begin, in_end] = idx.PredicateRange(pred_in_);
  for (size_t p = in_begin; p < in_end; ++p) {
    if (!s.Contains(p)) continue;
    const ObjectId x = idx[p].args[0];
    const int cell = take(regions_[region_of_object_[idx[p].args[1]]], 3, p);
    o.at(cell, glyph(x)) = kSolid;
    placements[x].push_back(cell);
  }
  for (ObjectId x = 0; x < num_objects_; ++x) {
    if (is_room_[x] || !placements[x].empty()) continue;
    const int cell = take(regions_.back(), 4, static_cast<uint64_t>(x));
    o.at(cell, glyph(x)) = kSolid;
    placements[x].push_back(cell);
  }

  const auto [m_begin, m_end] = idx.PredicateRange(pred_matches_);
  for (size_t p = m_begin; p < m_end; ++p) {
    if (!s.Contains(p)) continue;
    const int cell = take(regions_.back(), 5, p);
    o.at(cell, glyph(idx[p].args[0])) = kSolid;
    o.at(cell, glyph(idx[p].args[1])) = kSolid;
    o.at(cell, overlay(kMatch)) = 1.0f;
  }

  const std::pair<int, Overlay> attributes[] = {
      {pred_closed_, kClosed}, {pred_locked_, kLocked}, {pred_reachable_, kReach}};
  for (const auto& [pred, channel] : attributes) {
    const auto [begin, end] = idx.PredicateRange(pred);
    for (size_t p = begin; p < end; ++p) {
      if (!s.Contains(p)) continue;
      for (int cell : placements[idx[p].args[0]]) o.at(cell, overlay(channel)) = 1.0f;
    }
  }
  return o;
}

ClosedState World::Decode(const Observation& o) const {
  const PropositionIndex& idx = index();
  if (o.height != height() || o.width != width() || o.channels != channels() ||
      o.data.size() != static_cast<size_t>(o.cells()) * o.channels) {
    throw DecodeError("Decode(): tensor shape does not match the world.");
  }
  ClosedState s(idx.size());
  auto set = [&](int pred, std::vector<ObjectId> args, int cell) {
    const auto p = idx.Find(pred, args);
    if (!p) {
      throw DecodeError("Decode(): cell " + std::to_string(cell) + " draws a " +
                        idx.predicates()[pred].name +
                        " fact that is not a proposition.");
    }
    s.Set(*p);
  };
  auto fail = [](int cell, const std::string& what) -> void {
    throw DecodeError("Decode(): cell " + std::to_string(cell) + ": " + what + ".");
  };

  struct LinkEnd {
    ObjectId door;
    int row;
    ObjectId room;
    int cell;
  };
  std::vector<LinkEnd> sources, targets;

  for (int cell = 0; cell < o.cells(); ++cell) {
    const Region& region = regions_[RegionOf(cell)];
    std::vector<ObjectId> solid;
    for (ObjectId x = 0; x < num_objects_; ++x) {
      const float v = o.at(cell, glyph(x));
      if (v == kSolid) {
        solid.push_back(x);
      } else if (v == kFill) {
        if (region.owner != x) fail(cell, "fill outside the owner's region");
      } else if (v != 0.0f) {
        fail(cell, "glyph value is not 0, 0.5 or 1");
      }
    }
    bool flag[kNumOverlays];
    for (int k = 0; k < kNumOverlays; ++k) {
      const float v = o.at(cell, overlay(static_cast<Overlay>(k)));
      if (v != 0.0f && v != 1.0f) fail(cell, "overlay value is not 0 or 1");
      flag[k] = v == 1.0f;
    }
    const bool attribute = flag[kClosed] || flag[kLocked] || flag[kReach];
    for (ObjectId x : solid) {
      if (is_room_[x]) fail(cell, "rooms are never drawn solid");
    }

    if (flag[kMatch]) {
      if (attribute || flag[kLinkSrc] || flag[kLinkDst] || solid.size() != 2) {
        fail(cell, "malformed match cell");
      }
      if (region.owner >= 0) fail(cell, "match cell outside the margin");
      const bool forward = idx.Find(pred_matches_, std::vector<ObjectId>{solid[0], solid[1]}).has_value();
      const bool backward = idx.Find(pred_matches_, std::vector<ObjectId>{solid[1], solid[0]}).has_value();
      if (forward == backward) fail(cell, "match cell with ambiguous argument order");
      set(pred_matches_, forward ? solid : std::vector<ObjectId>{solid[1], solid[0]}, cell);
      continue;
    }
    if (flag[kLinkSrc] || flag[kLinkDst]) {
      if (attribute || solid.size() != 1) fail(cell, "malformed link cell");
      if (region.owner < 0 || !is_room_[region.owner]) {
        fail(cell, "link cell outside a room");
      }
      const int row = cell / width();
      if (flag[kLinkSrc] && flag[kLinkDst]) {
        set(pred_connects_, {solid[0], region.owner, region.owner}, cell);
      } else if (flag[kLinkSrc]) {
        sources.push_back({solid[0], row, region.owner, cell});
      } else {
        targets.push_back({solid[0], row, region.owner, cell});
      }
      continue;
    }
    if (solid.empty()) {
      if (attribute) fail(cell, "attribute overlay on an empty cell");
      continue;
    }
    if (solid.size() != 1) fail(cell, "more than one object on a placement cell");
    const ObjectId x = solid[0];
    if (region.owner >= 0) set(pred_in_, {x, region.owner}, cell);
    if (flag[kClosed]) set(pred_closed_, {x}, cell);
    if (flag[kLocked]) set(pred_locked_, {x}, cell);
    if (flag[kReach]) set(pred_reachable_, {x}, cell);
  }

  std::vector<bool> matched(targets.size(), false);
  for (const LinkEnd& src : sources) {
    int found = -1;
    for (size_t t = 0; t < targets.size(); ++t) {
      const LinkEnd& dst = targets[t];
      if (dst.door == src.door && dst.row == src.row && dst.room != src.room) {
        if (found >= 0) fail(src.cell, "ambiguous link pairing");
        found = static_cast<int>(t);
      }
    }
    if (found < 0 || matched[found]) fail(src.cell, "unpaired link source");
    matched[found] = true;
    set(pred_connects_, {src.door, src.room, targets[found].room}, src.cell);
  }
  for (size_t t = 0; t < targets.size(); ++t) {
    if (!matched[t]) fail(targets[t].cell, "unpaired link target");
  }
  return s;
}

std::vector<int> World::Footprint(const Observation& obs, ObjectId o) const {
  std::vector<int> cells;
  for (int cell = 0; cell < obs.cells(); ++cell) {
    if (obs.at(cell, glyph(o)) == kSolid) cells.push_back(cell);
  }
  return cells;
}

std::pair<ClosedState, ClosedState> MakePair(const ClosedState& s0,
                                             const GroundAction& a) {
  ClosedState pre = ApplyPartial(s0, a.pre_label);
  ClosedState post = ApplyPartial(pre, a.post_label);
  return {std::move(pre), std::move(post)};
}

Example GenerateExample(const World& world, uint64_t root_seed,
                        std::string_view split, size_t i) {
  return ExampleFromSeed(world, DeriveSeed(root_seed, "gridworld/" + std::string(split), i));
}

Example ExampleFromSeed(const World& world, uint64_t seed) {
  Example e;
  e.seed = seed;
  Rng rng(e.seed);
  e.action = UniformInt(rng, world.actions().size());
  e.s0 = world.SampleState(rng);
  std::tie(e.pre, e.post) = MakePair(e.s0, world.actions()[e.action]);
  e.placement_seed = rng();
  return e;
}

std::vector<Example> GenerateExamples(const World& world, uint64_t root_seed,
                                      std::string_view split, size_t count) {
  std::vector<Example> out(count);
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    out[i] = GenerateExample(world, root_seed, split, static_cast<size_t>(i));
  }
  return out;
}

nlohmann::ordered_json ManifestRow(const World& world, const Example& e,
                                   std::string_view split, size_t i, bool store,
                                   bool full_states) {
  const GroundAction& a = world.actions()[e.action];
  nlohmann::ordered_json j;
  j["id"] = std::string(split) + "-" + std::to_string(i);
  j["action"] = a.schema;
  std::vector<std::string> args;
  for (ObjectId o : a.args) args.push_back(world.index().objects()[o].name);
  j["args"] = args;
  if (store) {
    j["pre_obs"] = "observations.f32#" + std::to_string(2 * i);
    j["post_obs"] = "observations.f32#" + std::to_string(2 * i + 1);
  } else {
    j["pre_obs"] = "sim:" + std::to_string(e.seed) + "#pre";
    j["post_obs"] = "sim:" + std::to_string(e.seed) + "#post";
  }
  if (full_states) {
    j["pre_state"] = SortedNames(e.pre.bits(), world.index());
    j["post_state"] = SortedNames(e.post.bits(), world.index());
  }
  return j;
}

void GenDataset(const World& world, uint64_t root_seed, std::string_view split,
                size_t count, const std::string& dir, const GenOptions& options) {
  if (count == 0) throw std::invalid_argument("GenDataset(): count must be positive.");
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  std::ofstream manifest(base / "manifest.jsonl", std::ios::binary);
  std::ofstream store;
  if (options.write_observations) {
    store.open(base / "observations.f32", std::ios::binary);
  }
  if (!manifest || (options.write_observations && !store)) {
    throw std::runtime_error("GenDataset(): cannot write into " + dir);
  }

  constexpr size_t kChunk = 1024;
  const size_t obs_floats =
      static_cast<size_t>(world.height()) * world.width() * world.channels();
  std::vector<float> buffer;
  for (size_t begin = 0; begin < count; begin += kChunk) {
    const size_t end = std::min(count, begin + kChunk);
    const long long n = static_cast<long long>(end - begin);
    std::vector<Example> examples(end - begin);
    std::vector<std::string> rows(end - begin);
    if (options.write_observations) buffer.assign(2 * (end - begin) * obs_floats, 0.0f);
#pragma omp parallel for schedule(static)
    for (long long k = 0; k < n; ++k) {
      const size_t i = begin + static_cast<size_t>(k);
      examples[k] = GenerateExample(world, root_seed, split, i);
      rows[k] = ManifestRow(world, examples[k], split, i, options.write_observations,
                            options.full_states)
                    .dump();
      if (options.write_observations) {
        const Observation pre = world.Render(examples[k].pre, examples[k].placement_seed);
        const Observation post = world.Render(examples[k].post, examples[k].placement_seed);
        std::copy(pre.data.begin(), pre.data.end(), buffer.begin() + 2 * k * obs_floats);
        std::copy(post.data.begin(), post.data.end(),
                  buffer.begin() + (2 * k + 1) * obs_floats);
      }
    }
    for (const std::string& row : rows) manifest << row << "\n";
    if (options.write_observations) {
      store.write(reinterpret_cast<const char*>(buffer.data()),
                  static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    }
  }
  if (!manifest || (options.write_observations && !store)) {
    throw std::runtime_error("GenDataset(): write failed in " + dir);
  }

  nlohmann::ordered_json info;
  info["split"] = split;
  info["count"] = count;
  info["seed"] = root_seed;
  info["index_hash"] = world.index().HashHex();
  info["height"] = world.height();
  info["width"] = world.width();
  info["prior"] = world.config().prior;
  info["full_states"] = options.full_states;
  info["propositions"] = world.index().ToJson();
  WriteFile((base / "dataset.json").string(), info.dump(2) + "\n");
  if (options.write_observations) {
    nlohmann::ordered_json sidecar;
    sidecar["dims"] = {2 * count, world.height(), world.width(), world.channels()};
    sidecar["channel_names"] = world.ChannelNames();
    sidecar["dtype"] = "float32";
    sidecar["byte_order"] = "little";
    sidecar["seed"] = root_seed;
    sidecar["index_hash"] = world.index().HashHex();
    WriteFile((base / "observations.json").string(), sidecar.dump(2) + "\n");
  }
}

ObservationStore ObservationStore::Open(const std::string& dir) {
  const std::filesystem::path base(dir);
  const nlohmann::json sidecar =
      nlohmann::json::parse(ReadFile((base / "observations.json").string()));
  if (sidecar.at("dtype") != "float32") {
    throw std::runtime_error("ObservationStore: unsupported dtype.");
  }
  const auto dims = sidecar.at("dims").get<std::vector<size_t>>();
  if (dims.size() != 4) throw std::runtime_error("ObservationStore: bad dims.");
  ObservationStore s;
  s.count_ = dims[0];
  s.height_ = static_cast<int>(dims[1]);
  s.width_ = static_cast<int>(dims[2]);
  s.channels_ = static_cast<int>(dims[3]);
  const std::string bytes = ReadFile((base / "observations.f32").string());
  const size_t floats = s.count_ * dims[1] * dims[2] * dims[3];
  if (bytes.size() != floats * sizeof(float)) {
    throw std::runtime_error("ObservationStore: observations.f32 has the wrong size.");
  }
  s.data_.resize(floats);
  std::memcpy(s.data_.data(), bytes.data(), bytes.size());
  return s;
}

Observation ObservationStore::Get(size_t i) const {
  if (i >= count_) throw std::out_of_range("ObservationStore: index out of range.");
  Observation o(height_, width_, channels_);
  const size_t n = o.data.size();
  std::copy(data_.begin() + i * n, data_.begin() + (i + 1) * n, o.data.begin());
  return o;
}

Observation ObservationStore::Resolve(const std::string& ref) const {
  const size_t hash = ref.find('#');
  if (hash == std::string::npos || ref.substr(0, hash) != "observations.f32") {
    throw std::invalid_argument("ObservationStore: unsupported reference '" + ref + "'.");
  }
  return Get(std::stoull(ref.substr(hash + 1)));
}

}  // namespace pgk::gridworld
