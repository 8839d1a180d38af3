/**
 * grounding.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Quantifier expansion, DNF compilation and collapse of action conditions into
 * partial-state labels, plus closed-world action application for simulation.
 */

#ifndef PGK_GROUNDING_H_
#define PGK_GROUNDING_H_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pgk/logic.h"
#include "pgk/pddl.h"

namespace pgk {

inline constexpr size_t kDefaultDnfCap = 4096;

// Variable assignments, innermost last.
using Binding = std::vector<std::pair<std::string, ObjectId>>;

/**
 * Disjunction of signed conjunctions. No conjunction is contradictory and no
 * two are identical. An empty list is unsatisfiable; a list containing an
 * empty conjunction is a tautology.
 */
struct Dnf {
  size_t num_propositions = 0;
  std::vector<PartialState> conjunctions;

  bool unsatisfiable() const { return conjunctions.empty(); }
  bool SatisfiedBy(const ClosedState& s) const;
  bool operator==(const Dnf&) const = default;
};

class DnfBlowup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsatisfiableFormula : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Expands quantifiers over type-conforming objects and substitutes bound
 * variables. An atom whose arguments do not conform to the predicate's
 * parameter types denotes no proposition and grounds to false. Quantifiers
 * with no conforming objects append a note to `warnings` when given.
 */
Formula Ground(const Formula& f, const PropositionIndex& index,
               const Binding& binding = {},
               std::vector<std::string>* warnings = nullptr);

/**
 * Compiles a ground formula to DNF. `(when c e)` compiles to `Dnf(e) or true`:
 * the action may change nothing. Throws DnfBlowup naming `context` if more
 * than `cap` conjunctions arise, std::invalid_argument on quantifiers.
 */
Dnf ToDnf(const Formula& f, size_t num_propositions, size_t cap = kDefaultDnfCap,
          const std::string& context = "formula");

// Intersection of all conjunctions. Throws UnsatisfiableFormula if empty.
PartialState Collapse(const Dnf& d, const std::string& context = "formula");

/**
 * Brute-force reference for Collapse: the literals shared by every satisfying
 * closed state. Requires num_propositions <= 20.
 */
PartialState DeterminedSet(const Dnf& d);

// One effect clause: when `condition` holds in the pre-state, delete then add.
struct EffectClause {
  bool conditional = false;
  Formula condition;
  Bitset add;
  Bitset del;
};

struct GroundAction {
  std::string schema;
  std::vector<ObjectId> args;
  Formula precondition;  // ground
  Formula effect;        // ground
  Dnf pre_dnf;
  Dnf eff_dnf;
  PartialState pre_label;
  PartialState post_label;
  std::vector<EffectClause> clauses;
  std::vector<std::string> warnings;

  std::string Name(const PropositionIndex& index) const;
};

/**
 * Grounds, compiles and collapses one action instance. Throws
 * std::invalid_argument on ill-typed arguments and UnsatisfiableFormula when
 * the precondition or effect cannot hold. Empty labels are reported in
 * `warnings`.
 */
GroundAction MakeGroundAction(const ActionSchema& schema,
                              const std::vector<ObjectId>& args,
                              const PropositionIndex& index,
                              size_t cap = kDefaultDnfCap);

// Every type-conforming instance of every schema whose precondition is
// satisfiable, in schema order then lexicographic argument order.
std::vector<GroundAction> GroundAll(const Domain& domain,
                                    const PropositionIndex& index,
                                    size_t cap = kDefaultDnfCap);

// Argument tuples conforming to the parameter types, lexicographic.
std::vector<std::vector<ObjectId>> ConformingTuples(
    const std::vector<Parameter>& params, const PropositionIndex& index);

bool CheckPre(const GroundAction& a, const ClosedState& s);

// Exact conditional semantics; conditions read the pre-state and all deletes
// happen before adds. Throws std::invalid_argument if the precondition fails.
ClosedState Apply(const GroundAction& a, const ClosedState& s);

}  // namespace pgk

#endif  // PGK_GROUNDING_H_
