/**
 * labeler.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Turns action-annotated manifests into partial-state labels.
 */

#ifndef PGK_LABELER_H_
#define PGK_LABELER_H_

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgk/grounding.h"
#include "pgk/logic.h"
#include "pgk/pddl.h"

namespace pgk {

struct ExampleManifest {
  std::string id;
  std::string action;
  std::vector<std::string> args;
  std::string pre_obs;
  std::string post_obs;
  // Optional per-argument region masks, passed through unchanged.
  std::optional<nlohmann::json> masks;

  static ExampleManifest FromJson(const nlohmann::json& j);
  nlohmann::ordered_json ToJson() const;
};

struct LabeledExample {
  ExampleManifest manifest;
  PartialState pre_label;
  PartialState post_label;
  std::vector<std::string> warnings;

  // Manifest fields plus pre_pos, pre_neg, post_pos, post_neg as sorted
  // proposition names.
  nlohmann::ordered_json ToJson(const PropositionIndex& index) const;
  static LabeledExample FromJson(const nlohmann::json& j,
                                 const PropositionIndex& index);
};

// Memoizes ground actions by name so a dataset grounds each instance once.
class ActionCache {
 public:
  ActionCache(const Domain& domain, const PropositionIndex& index)
      : domain_(domain), index_(index) {}

  // Throws std::invalid_argument for unknown actions or ill-typed arguments.
  const GroundAction& Get(const std::string& action,
                          const std::vector<std::string>& args);

 private:
  const Domain& domain_;
  const PropositionIndex& index_;
  std::map<std::string, GroundAction> cache_;
};

LabeledExample LabelExample(const ExampleManifest& m, ActionCache& actions);
LabeledExample LabelExample(const ExampleManifest& m, const Domain& domain,
                            const PropositionIndex& index);

struct LabelSummary {
  size_t rows = 0;
  size_t skipped = 0;
  std::vector<std::string> skip_reasons;  // "line N: reason"
  size_t advisories = 0;
  // Per predicate: label counts over both halves of every pair.
  std::vector<size_t> positive;
  std::vector<size_t> negative;
  // Mean over images of labeled propositions / N.
  double labeled_fraction = 0.0;

  bool failed() const;  // more than one and more than 1% of records skipped
  nlohmann::ordered_json ToJson(const PropositionIndex& index) const;
};

/**
 * Labels a JSONL manifest stream. Malformed records are skipped and listed in
 * the summary. Output rows keep manifest order; fields of `provenance` (an
 * object) are appended to every row.
 */
LabelSummary LabelDataset(std::istream& manifest, const Domain& domain,
                          const PropositionIndex& index, std::ostream& out,
                          const nlohmann::ordered_json& provenance = {});

}  // namespace pgk

#endif  // PGK_LABELER_H_
