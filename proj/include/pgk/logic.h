/**
 * logic.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Symbolic vocabulary shared by every other module: typed objects, predicates,
 * the proposition coordinate system, closed- and open-world states, and the
 * first-order formula tree.
 */

#ifndef PGK_LOGIC_H_
#define PGK_LOGIC_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "pgk/bitset.h"

namespace pgk {

using ObjectId = int;

inline constexpr std::string_view kRootType = "object";

/**
 * A declared parameter type. Usually a single name; more than one name means
 * `(either t1 t2 ...)`.
 */
struct TypeRef {
  std::vector<std::string> names;

  TypeRef() : names{std::string(kRootType)} {}
  explicit TypeRef(std::string name) : names{std::move(name)} {}
  explicit TypeRef(std::vector<std::string> either) : names(std::move(either)) {}

  bool is_either() const { return names.size() > 1; }
  std::string ToString() const;
  bool operator==(const TypeRef&) const = default;
};

/**
 * Nominal types with single inheritance. Every type ultimately derives from
 * `object`.
 */
class TypeHierarchy {
 public:
  TypeHierarchy();

  // Declares `name` as a subtype of `parent`. The parent is declared
  // implicitly (under `object`) if unseen. Redeclaring with a different
  // parent or introducing a cycle throws.
  void Add(const std::string& name, const std::string& parent);

  bool Contains(std::string_view name) const;
  bool IsSubtype(std::string_view type, std::string_view ancestor) const;
  bool Conforms(std::string_view type, const TypeRef& ref) const;

  // Declarations in order, excluding `object` itself.
  const std::vector<std::pair<std::string, std::string>>& declarations() const {
    return declarations_;
  }

  bool operator==(const TypeHierarchy& other) const {
    return parents_ == other.parents_;
  }

 private:
  std::map<std::string, std::string, std::less<>> parents_;
  std::vector<std::pair<std::string, std::string>> declarations_;
};

struct ObjectSym {
  ObjectId id = -1;
  std::string name;
  std::string type;

  bool operator==(const ObjectSym&) const = default;
};

struct Parameter {
  std::string name;
  TypeRef type;

  bool operator==(const Parameter&) const = default;
};

struct PredicateDef {
  std::string name;
  std::vector<Parameter> params;

  size_t arity() const { return params.size(); }
  bool operator==(const PredicateDef&) const = default;
};

struct Proposition {
  int predicate = -1;
  std::vector<ObjectId> args;

  bool operator==(const Proposition&) const = default;
};

/**
 * Bijection between the well-typed ground propositions and 0..N-1.
 *
 * Enumeration order is predicate declaration order, then lexicographic order
 * of argument object ids. Every state vector, label and model output in the
 * toolkit is indexed in this order.
 */
class PropositionIndex {
 public:
  PropositionIndex() = default;
  PropositionIndex(std::vector<PredicateDef> predicates,
                   std::vector<ObjectSym> objects, TypeHierarchy types);

  size_t size() const { return propositions_.size(); }

  std::optional<size_t> Find(int predicate,
                             std::span<const ObjectId> args) const;
  std::optional<size_t> Find(const Proposition& prop) const {
    return Find(prop.predicate, prop.args);
  }

  // Parses "pred(a,b)" (whitespace tolerant).
  std::optional<size_t> FindByName(std::string_view name) const;

  const Proposition& operator[](size_t i) const { return propositions_[i]; }
  std::string Name(size_t i) const;

  const std::vector<PredicateDef>& predicates() const { return predicates_; }
  const std::vector<ObjectSym>& objects() const { return objects_; }
  const TypeHierarchy& types() const { return types_; }

  std::optional<int> FindPredicate(std::string_view name) const;
  std::optional<ObjectId> FindObject(std::string_view name) const;

  // Half-open range of indices belonging to one predicate.
  std::pair<size_t, size_t> PredicateRange(int predicate) const {
    return ranges_[predicate];
  }

  size_t max_arity() const { return max_arity_; }

  bool ObjectConforms(ObjectId object, const TypeRef& type) const {
    return types_.Conforms(objects_[object].type, type);
  }

  // Objects conforming to `type`, in id order.
  std::vector<ObjectId> ObjectsOfType(const TypeRef& type) const;

  // JSON array of proposition names in enumeration order.
  nlohmann::json ToJson() const;

  // Stable digest of ToJson(); ties datasets, checkpoints and reports to the
  // coordinate system they were produced with.
  uint64_t Hash() const { return hash_; }
  std::string HashHex() const;

 private:
  uint64_t Key(int predicate, std::span<const ObjectId> args) const;

  std::vector<PredicateDef> predicates_;
  std::vector<ObjectSym> objects_;
  TypeHierarchy types_;
  std::vector<Proposition> propositions_;
  std::vector<std::pair<size_t, size_t>> ranges_;
  std::unordered_map<uint64_t, size_t> lookup_;
  size_t max_arity_ = 0;
  uint64_t hash_ = 0;
};

// Throws std::invalid_argument on empty inputs or duplicate names.
PropositionIndex EnumeratePropositions(const std::vector<PredicateDef>& predicates,
                                       const std::vector<ObjectSym>& objects,
                                       const TypeHierarchy& types = {});

/**
 * Closed-world state: every proposition not set is false.
 */
class ClosedState {
 public:
  ClosedState() = default;
  explicit ClosedState(size_t n) : bits_(n) {}
  explicit ClosedState(Bitset bits) : bits_(std::move(bits)) {}

  size_t size() const { return bits_.size(); }
  bool Contains(size_t p) const { return bits_.test(p); }
  void Set(size_t p, bool value = true) { bits_.set(p, value); }
  size_t Count() const { return bits_.count(); }

  const Bitset& bits() const { return bits_; }

  bool operator==(const ClosedState&) const = default;

 private:
  Bitset bits_;
};

struct ClosedStateHash {
  size_t operator()(const ClosedState& s) const { return s.bits().hash(); }
};

/**
 * Open-world state (s+, s-). Propositions in neither set are unknown. A
 * proposition can never be in both; construction rejects that.
 */
class PartialState {
 public:
  PartialState() = default;
  explicit PartialState(size_t n) : pos_(n), neg_(n) {}
  PartialState(Bitset pos, Bitset neg);

  size_t size() const { return pos_.size(); }
  const Bitset& pos() const { return pos_; }
  const Bitset& neg() const { return neg_; }

  bool empty() const { return pos_.none() && neg_.none(); }
  size_t NumLabeled() const { return pos_.count() + neg_.count(); }

  // True iff every positive literal holds and every negative one does not.
  bool SatisfiedBy(const ClosedState& s) const;

  // Adds a literal; throws if it contradicts an existing one.
  void AddPositive(size_t p);
  void AddNegative(size_t p);

  bool operator==(const PartialState&) const = default;

 private:
  Bitset pos_;
  Bitset neg_;
};

struct PartialStateHash {
  size_t operator()(const PartialState& s) const {
    return s.pos().hash() * 31 + s.neg().hash();
  }
};

// (s | delta.pos) & ~delta.neg
ClosedState ApplyPartial(const ClosedState& s, const PartialState& delta);

/**
 * Argument of an atom: a variable name (object < 0) or an object id.
 */
struct Term {
  std::string variable;
  ObjectId object = -1;

  static Term Var(std::string name) { return Term{std::move(name), -1}; }
  static Term Obj(ObjectId id) { return Term{{}, id}; }

  bool is_variable() const { return object < 0; }
  bool operator==(const Term&) const = default;
};

/**
 * Immutable first-order formula tree. Nodes are shared, so copies are cheap.
 *
 * `(imply a b)` has no node of its own; it is built as `(or (not a) b)`.
 * Truth constants are the empty conjunction (true) and empty disjunction
 * (false).
 */
class Formula {
 public:
  enum class Kind { kAtom, kNot, kAnd, kOr, kForall, kExists, kWhen };

  Formula();  // true

  static Formula Atom(int predicate, std::vector<Term> args);
  // Atom whose arguments are all objects, resolved to a proposition index.
  static Formula GroundAtom(int predicate, std::vector<ObjectId> args,
                            size_t proposition);
  static Formula Not(Formula f);
  static Formula And(std::vector<Formula> children);
  static Formula Or(std::vector<Formula> children);
  static Formula Imply(Formula a, Formula b);
  static Formula Forall(Parameter var, Formula body);
  static Formula Exists(Parameter var, Formula body);
  static Formula When(Formula condition, Formula effect);
  static Formula True() { return And({}); }
  static Formula False() { return Or({}); }

  Kind kind() const;

  // kAtom
  int predicate() const;
  const std::vector<Term>& args() const;
  // Proposition index for ground atoms, nullopt otherwise.
  std::optional<size_t> proposition() const;

  // kNot (one child), kAnd, kOr
  const std::vector<Formula>& children() const;

  // kForall, kExists
  const Parameter& variable() const;
  const Formula& body() const;

  // kWhen
  const Formula& condition() const;
  const Formula& effect() const;

  bool is_true() const { return kind() == Kind::kAnd && children().empty(); }
  bool is_false() const { return kind() == Kind::kOr && children().empty(); }

  // Structural equality (ground proposition indices are not compared).
  bool operator==(const Formula& other) const;

  struct Node;

 private:
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

/**
 * Truth-functional evaluation of a ground, quantifier-free formula under the
 * closed-world assumption. Throws std::invalid_argument on variables,
 * quantifiers, `when`, or atoms without a proposition index.
 */
bool Evaluate(const Formula& f, const ClosedState& s);

// Renders a formula as PDDL text. Object and predicate names come from the
// given tables.
std::string FormulaToString(const Formula& f,
                            const std::vector<PredicateDef>& predicates,
                            const std::vector<ObjectSym>& objects);

// Sorted proposition names of a bitset (lexicographic).
std::vector<std::string> SortedNames(const Bitset& bits,
                                     const PropositionIndex& index);

}  // namespace pgk

#endif  // PGK_LOGIC_H_
