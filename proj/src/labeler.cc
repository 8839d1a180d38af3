/**
 * labeler.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/labeler.h"

#include <omp.h>

#include <sstream>

namespace pgk {

namespace {

std::string RequireString(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw std::invalid_argument(std::string("missing string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

Bitset ParseNames(const nlohmann::json& j, const char* key,
                  const PropositionIndex& index) {
  Bitset bits(index.size());
  if (!j.contains(key)) return bits;
  if (!j[key].is_array()) {
    throw std::invalid_argument(std::string("field '") + key + "' is not an array");
  }
  for (const auto& name : j[key]) {
    if (!name.is_string()) {
      throw std::invalid_argument(std::string("non-string entry in '") + key + "'");
    }
    const auto p = index.FindByName(name.get<std::string>());
    if (!p) {
      throw std::invalid_argument("unknown proposition '" +
                                  name.get<std::string>() + "'");
    }
    bits.set(*p);
  }
  return bits;
}

}  // namespace

ExampleManifest ExampleManifest::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  ExampleManifest m;
  if (j.contains("id") && j["id"].is_number_integer()) {
    m.id = std::to_string(j["id"].get<long long>());
  } else {
    m.id = RequireString(j, "id");
  }
  m.action = RequireString(j, "action");
  if (!j.contains("args") || !j["args"].is_array()) {
    throw std::invalid_argument("missing array field 'args'");
  }
  for (const auto& a : j["args"]) {
    if (!a.is_string()) throw std::invalid_argument("non-string entry in 'args'");
    m.args.push_back(a.get<std::string>());
  }
  m.pre_obs = RequireString(j, "pre_obs");
  m.post_obs = RequireString(j, "post_obs");
  if (j.contains("masks")) m.masks = j["masks"];
  return m;
}

nlohmann::ordered_json ExampleManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["action"] = action;
  j["args"] = args;
  j["pre_obs"] = pre_obs;
  j["post_obs"] = post_obs;
  if (masks) j["masks"] = *masks;
  return j;
}

nlohmann::ordered_json LabeledExample::ToJson(const PropositionIndex& index) const {
  nlohmann::ordered_json j = manifest.ToJson();
  j["pre_pos"] = SortedNames(pre_label.pos(), index);
  j["pre_neg"] = SortedNames(pre_label.neg(), index);
  j["post_pos"] = SortedNames(post_label.pos(), index);
  j["post_neg"] = SortedNames(post_label.neg(), index);
  return j;
}

LabeledExample LabeledExample::FromJson(const nlohmann::json& j,
                                        const PropositionIndex& index) {
  LabeledExample e;
  e.manifest = ExampleManifest::FromJson(j);
  e.pre_label = PartialState(ParseNames(j, "pre_pos", index),
                             ParseNames(j, "pre_neg", index));
  e.post_label = PartialState(ParseNames(j, "post_pos", index),
                              ParseNames(j, "post_neg", index));
  return e;
}

const GroundAction& ActionCache::Get(const std::string& action,
                                     const std::vector<std::string>& args) {
  std::string key = action + "(";
  for (size_t i = 0; i < args.size(); ++i) key += (i ? "," : "") + args[i];
  key += ")";
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  const ActionSchema* schema = domain_.FindAction(action);
  if (schema == nullptr) {
    throw std::invalid_argument("unknown action '" + action + "'");
  }
  std::vector<ObjectId> ids;
  for (const std::string& a : args) {
    const auto id = index_.FindObject(a);
    if (!id) throw std::invalid_argument("unknown object '" + a + "'");
    ids.push_back(*id);
  }
  return cache_.emplace(key, MakeGroundAction(*schema, ids, index_)).first->second;
}

LabeledExample LabelExample(const ExampleManifest& m, ActionCache& actions) {
  const GroundAction& a = actions.Get(m.action, m.args);
  return LabeledExample{m, a.pre_label, a.post_label, a.warnings};
}

LabeledExample LabelExample(const ExampleManifest& m, const Domain& domain,
                            const PropositionIndex& index) {
  ActionCache cache(domain, index);
  return LabelExample(m, cache);
}

bool LabelSummary::failed() const {
  // A lone bad record never fails a run, however small the manifest.
  const size_t total = rows + skipped;
  return skipped > 1 && skipped * 100 > total;
}

nlohmann::ordered_json LabelSummary::ToJson(const PropositionIndex& index) const {
  nlohmann::ordered_json j;
  j["index_hash"] = index.HashHex();
  j["rows"] = rows;
  j["skipped"] = skipped;
  j["skip_reasons"] = skip_reasons;
  j["advisories"] = advisories;
  j["labeled_fraction"] = labeled_fraction;
  nlohmann::ordered_json per;
  for (size_t p = 0; p < index.predicates().size(); ++p) {
    per[index.predicates()[p].name] = {{"positive", positive[p]},
                                       {"negative", negative[p]}};
  }
  j["predicates"] = per;
  return j;
}

LabelSummary LabelDataset(std::istream& manifest, const Domain& domain,
                          const PropositionIndex& index, std::ostream& out,
                          const nlohmann::ordered_json& provenance) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(manifest, line);) lines.push_back(line);

  const long long count = static_cast<long long>(lines.size());
  std::vector<std::optional<ExampleManifest>> parsed(lines.size());
  std::vector<std::string> errors(lines.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      parsed[i] = ExampleManifest::FromJson(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  // Grounding is memoized, so this pass is cheap and stays serial.
  ActionCache cache(domain, index);
  std::vector<std::optional<LabeledExample>> labeled(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    if (!parsed[i]) continue;
    try {
      labeled[i] = LabelExample(*parsed[i], cache);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  std::vector<std::string> rows(lines.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) {
    if (!labeled[i]) continue;
    nlohmann::ordered_json row = labeled[i]->ToJson(index);
    if (provenance.is_object()) {
      for (const auto& [key, value] : provenance.items()) row[key] = value;
    }
    rows[i] = row.dump();
  }

  LabelSummary summary;
  summary.positive.assign(index.predicates().size(), 0);
  summary.negative.assign(index.predicates().size(), 0);
  double fraction_sum = 0.0;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (!errors[i].empty()) {
      ++summary.skipped;
      summary.skip_reasons.push_back("line " + std::to_string(i + 1) + ": " +
                                     errors[i]);
      continue;
    }
    if (!labeled[i]) continue;
    const LabeledExample& e = *labeled[i];
    out << rows[i] << "\n";
    ++summary.rows;
    summary.advisories += e.warnings.size();
    for (const PartialState* label : {&e.pre_label, &e.post_label}) {
      label->pos().for_each([&](size_t p) { ++summary.positive[index[p].predicate]; });
      label->neg().for_each([&](size_t p) { ++summary.negative[index[p].predicate]; });
      fraction_sum += static_cast<double>(label->NumLabeled()) / index.size();
    }
  }
  if (summary.rows > 0) summary.labeled_fraction = fraction_sum / (2.0 * summary.rows);
  return summary;
}

}  // namespace pgk
