/**
 * pddl.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Parser and printer for the PDDL subset used by the toolkit:
 *   :strips :typing :negative-preconditions :disjunctive-preconditions
 *   :existential-preconditions :universal-preconditions :conditional-effects
 * plus `:constants` and `(either ...)` parameter types. Any other requirement
 * flag is rejected.
 */

#ifndef PGK_PDDL_H_
#define PGK_PDDL_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pgk/logic.h"

namespace pgk {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ActionSchema {
  std::string name;
  std::vector<Parameter> params;
  Formula precondition;
  Formula effect;

  bool operator==(const ActionSchema&) const = default;
};

struct Domain {
  std::string name;
  std::vector<std::string> requirements;
  TypeHierarchy types;
  std::vector<ObjectSym> constants;
  std::vector<PredicateDef> predicates;
  std::vector<ActionSchema> actions;

  std::optional<int> FindPredicate(std::string_view name) const;
  const ActionSchema* FindAction(std::string_view name) const;

  bool operator==(const Domain&) const = default;
};

struct Problem {
  std::string name;
  std::string domain_name;
  // Domain constants first, then problem objects; ids are positions.
  std::vector<ObjectSym> objects;
  PropositionIndex index;
  ClosedState init;
  Formula goal;

  // Structural comparison (the index is derived from objects).
  bool operator==(const Problem& other) const {
    return name == other.name && domain_name == other.domain_name &&
           objects == other.objects && init == other.init && goal == other.goal;
  }
};

Domain ParseDomain(std::string_view text);
Problem ParseProblem(std::string_view text, const Domain& domain);

std::string ToPddl(const Domain& domain);
std::string ToPddl(const Problem& problem, const Domain& domain);

}  // namespace pgk

#endif  // PGK_PDDL_H_
