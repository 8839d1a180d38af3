/**
 * logic.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/logic.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pgk/util.h"

namespace pgk {

std::string TypeRef::ToString() const {
  if (!is_either()) return names.front();
  std::string out = "(either";
  for (const std::string& n : names) out += " " + n;
  return out + ")";
}

TypeHierarchy::TypeHierarchy() { parents_.emplace(std::string(kRootType), ""); }

void TypeHierarchy::Add(const std::string& name, const std::string& parent) {
  if (name == kRootType) {
    throw std::invalid_argument("TypeHierarchy::Add(): cannot redeclare object.");
  }
  if (!Contains(parent)) Add(parent, std::string(kRootType));
  if (auto it = parents_.find(name); it != parents_.end()) {
    if (it->second == parent) return;
    throw std::invalid_argument("TypeHierarchy::Add(): type '" + name +
                                "' redeclared with parent '" + parent +
                                "' (was '" + it->second + "').");
  }
  if (IsSubtype(parent, name)) {
    throw std::invalid_argument("TypeHierarchy::Add(): cycle through '" + name +
                                "'.");
  }
  parents_.emplace(name, parent);
  declarations_.emplace_back(name, parent);
}

bool TypeHierarchy::Contains(std::string_view name) const {
  return parents_.find(name) != parents_.end();
}

bool TypeHierarchy::IsSubtype(std::string_view type,
                              std::string_view ancestor) const {
  auto it = parents_.find(type);
  while (it != parents_.end()) {
    if (it->first == ancestor) return true;
    if (it->second.empty()) return false;
    it = parents_.find(it->second);
  }
  return false;
}

bool TypeHierarchy::Conforms(std::string_view type, const TypeRef& ref) const {
  return std::any_of(ref.names.begin(), ref.names.end(),
                     [&](const std::string& n) { return IsSubtype(type, n); });
}

PropositionIndex::PropositionIndex(std::vector<PredicateDef> predicates,
                                   std::vector<ObjectSym> objects,
                                   TypeHierarchy types)
    : predicates_(std::move(predicates)),
      objects_(std::move(objects)),
      types_(std::move(types)) {
  for (size_t i = 0; i < objects_.size(); ++i) {
    if (objects_[i].id != static_cast<ObjectId>(i)) {
      throw std::invalid_argument(
          "PropositionIndex(): object ids must be dense and ordered.");
    }
  }
  for (const PredicateDef& pred : predicates_) {
    max_arity_ = std::max(max_arity_, pred.arity());
  }
  // Keys pack (predicate, args) in base |O|+1; make sure they fit.
  double bits = std::log2(static_cast<double>(predicates_.size() + 1)) +
                static_cast<double>(max_arity_) *
                    std::log2(static_cast<double>(objects_.size() + 1));
  if (bits > 60) {
    throw std::invalid_argument("PropositionIndex(): domain too large to index.");
  }

  for (size_t p = 0; p < predicates_.size(); ++p) {
    const PredicateDef& pred = predicates_[p];
    const size_t begin = propositions_.size();
    std::vector<std::vector<ObjectId>> candidates(pred.arity());
    bool feasible = true;
    for (size_t k = 0; k < pred.arity(); ++k) {
      candidates[k] = ObjectsOfType(pred.params[k].type);
      feasible &= !candidates[k].empty();
    }
    if (feasible) {
      // Odometer over candidate lists; last argument varies fastest, which
      // yields lexicographic order since each list is sorted by id.
      std::vector<size_t> pos(pred.arity(), 0);
      bool done = false;
      while (!done) {
        Proposition prop{static_cast<int>(p), {}};
        prop.args.reserve(pred.arity());
        for (size_t k = 0; k < pred.arity(); ++k) {
          prop.args.push_back(candidates[k][pos[k]]);
        }
        lookup_.emplace(Key(prop.predicate, prop.args), propositions_.size());
        propositions_.push_back(std::move(prop));
        size_t k = pred.arity();
        while (true) {
          if (k == 0) {
            done = true;
            break;
          }
          --k;
          if (++pos[k] < candidates[k].size()) break;
          pos[k] = 0;
        }
      }
    }
    ranges_.emplace_back(begin, propositions_.size());
  }
  hash_ = Fnv1a64(ToJson().dump());
}

uint64_t PropositionIndex::Key(int predicate,
                               std::span<const ObjectId> args) const {
  const uint64_t base = objects_.size() + 1;
  uint64_t key = static_cast<uint64_t>(predicate);
  for (ObjectId a : args) key = key * base + static_cast<uint64_t>(a + 1);
  // Arity disambiguates keys of predicates with different arities.
  return key * 8 + args.size();
}

std::optional<size_t> PropositionIndex::Find(int predicate,
                                             std::span<const ObjectId> args) const {
  if (predicate < 0 || predicate >= static_cast<int>(predicates_.size())) {
    return std::nullopt;
  }
  if (args.size() != predicates_[predicate].arity()) return std::nullopt;
  for (ObjectId a : args) {
    if (a < 0 || a >= static_cast<ObjectId>(objects_.size())) return std::nullopt;
  }
  auto it = lookup_.find(Key(predicate, args));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<size_t> PropositionIndex::FindByName(std::string_view name) const {
  std::string compact;
  for (char c : name) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
  }
  const size_t open = compact.find('(');
  if (open == std::string::npos || compact.back() != ')') return std::nullopt;
  const auto pred = FindPredicate(std::string_view(compact).substr(0, open));
  if (!pred) return std::nullopt;
  std::vector<ObjectId> args;
  const std::string inner = compact.substr(open + 1, compact.size() - open - 2);
  if (!inner.empty()) {
    std::stringstream ss(inner);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto obj = FindObject(tok);
      if (!obj) return std::nullopt;
      args.push_back(*obj);
    }
  }
  return Find(*pred, args);
}

std::string PropositionIndex::Name(size_t i) const {
  const Proposition& prop = propositions_.at(i);
  std::string out = predicates_[prop.predicate].name + "(";
  for (size_t k = 0; k < prop.args.size(); ++k) {
    if (k > 0) out += ",";
    out += objects_[prop.args[k]].name;
  }
  return out + ")";
}

std::optional<int> PropositionIndex::FindPredicate(std::string_view name) const {
  for (size_t i = 0; i < predicates_.size(); ++i) {
    if (predicates_[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<ObjectId> PropositionIndex::FindObject(std::string_view name) const {
  for (const ObjectSym& obj : objects_) {
    if (obj.name == name) return obj.id;
  }
  return std::nullopt;
}

std::vector<ObjectId> PropositionIndex::ObjectsOfType(const TypeRef& type) const {
  std::vector<ObjectId> out;
  for (const ObjectSym& obj : objects_) {
    if (types_.Conforms(obj.type, type)) out.push_back(obj.id);
  }
  return out;
}

nlohmann::json PropositionIndex::ToJson() const {
  nlohmann::json out = nlohmann::json::array();
  for (size_t i = 0; i < propositions_.size(); ++i) out.push_back(Name(i));
  return out;
}

std::string PropositionIndex::HashHex() const { return HexDigest(hash_); }

PropositionIndex EnumeratePropositions(const std::vector<PredicateDef>& predicates,
                                       const std::vector<ObjectSym>& objects,
                                       const TypeHierarchy& types) {
  if (predicates.empty() || objects.empty()) {
    throw std::invalid_argument(
        "EnumeratePropositions(): predicate table and object list must be "
        "non-empty.");
  }
  std::set<std::string, std::less<>> seen;
  for (const PredicateDef& pred : predicates) {
    if (!seen.insert(pred.name).second) {
      throw std::invalid_argument("EnumeratePropositions(): duplicate predicate '" +
                                  pred.name + "'.");
    }
  }
  seen.clear();
  for (const ObjectSym& obj : objects) {
    if (!seen.insert(obj.name).second) {
      throw std::invalid_argument("EnumeratePropositions(): duplicate object '" +
                                  obj.name + "'.");
    }
  }
  PropositionIndex index(predicates, objects, types);
  if (index.size() == 0) {
    throw std::invalid_argument(
        "EnumeratePropositions(): no well-typed propositions.");
  }
  return index;
}

PartialState::PartialState(Bitset pos, Bitset neg)
    : pos_(std::move(pos)), neg_(std::move(neg)) {
  if (pos_.size() != neg_.size()) {
    throw std::invalid_argument("PartialState(): size mismatch.");
  }
  if (pos_.intersects(neg_)) {
    throw std::invalid_argument(
        "PartialState(): proposition is both positive and negative.");
  }
}

bool PartialState::SatisfiedBy(const ClosedState& s) const {
  return pos_.is_subset_of(s.bits()) && !neg_.intersects(s.bits());
}

void PartialState::AddPositive(size_t p) {
  if (neg_.test(p)) {
    throw std::invalid_argument("PartialState::AddPositive(): contradiction.");
  }
  pos_.set(p);
}

void PartialState::AddNegative(size_t p) {
  if (pos_.test(p)) {
    throw std::invalid_argument("PartialState::AddNegative(): contradiction.");
  }
  neg_.set(p);
}

ClosedState ApplyPartial(const ClosedState& s, const PartialState& delta) {
  return ClosedState((s.bits() | delta.pos()) - delta.neg());
}

struct Formula::Node {
  Kind kind = Kind::kAnd;
  int predicate = -1;
  std::vector<Term> args;
  std::optional<size_t> proposition;
  std::vector<Formula> children;
  Parameter variable;
};

namespace {

const std::shared_ptr<const Formula::Node>& TrueNode() {
  static const auto node = std::make_shared<const Formula::Node>();
  return node;
}

}  // namespace

Formula::Formula() : node_(TrueNode()) {}

Formula Formula::Atom(int predicate, std::vector<Term> args) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kAtom;
  node->predicate = predicate;
  node->args = std::move(args);
  return Formula(std::move(node));
}

Formula Formula::GroundAtom(int predicate, std::vector<ObjectId> args,
                            size_t proposition) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kAtom;
  node->predicate = predicate;
  for (ObjectId a : args) node->args.push_back(Term::Obj(a));
  node->proposition = proposition;
  return Formula(std::move(node));
}

Formula Formula::Not(Formula f) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kNot;
  node->children.push_back(std::move(f));
  return Formula(std::move(node));
}

Formula Formula::And(std::vector<Formula> children) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kAnd;
  node->children = std::move(children);
  return Formula(std::move(node));
}

Formula Formula::Or(std::vector<Formula> children) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kOr;
  node->children = std::move(children);
  return Formula(std::move(node));
}

Formula Formula::Imply(Formula a, Formula b) {
  return Or({Not(std::move(a)), std::move(b)});
}

Formula Formula::Forall(Parameter var, Formula body) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kForall;
  node->variable = std::move(var);
  node->children.push_back(std::move(body));
  return Formula(std::move(node));
}

Formula Formula::Exists(Parameter var, Formula body) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kExists;
  node->variable = std::move(var);
  node->children.push_back(std::move(body));
  return Formula(std::move(node));
}

Formula Formula::When(Formula condition, Formula effect) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::kWhen;
  node->children.push_back(std::move(condition));
  node->children.push_back(std::move(effect));
  return Formula(std::move(node));
}

Formula::Kind Formula::kind() const { return node_->kind; }
int Formula::predicate() const { return node_->predicate; }
const std::vector<Term>& Formula::args() const { return node_->args; }
std::optional<size_t> Formula::proposition() const { return node_->proposition; }
const std::vector<Formula>& Formula::children() const { return node_->children; }
const Parameter& Formula::variable() const { return node_->variable; }
const Formula& Formula::body() const { return node_->children.front(); }
const Formula& Formula::condition() const { return node_->children[0]; }
const Formula& Formula::effect() const { return node_->children[1]; }

bool Formula::operator==(const Formula& other) const {
  if (node_ == other.node_) return true;
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::kAtom:
      return a.predicate == b.predicate && a.args == b.args;
    case Kind::kForall:
    case Kind::kExists:
      return a.variable == b.variable && a.children == b.children;
    default:
      return a.children == b.children;
  }
}

bool Evaluate(const Formula& f, const ClosedState& s) {
  switch (f.kind()) {
    case Formula::Kind::kAtom: {
      const auto p = f.proposition();
      if (!p) {
        throw std::invalid_argument(
            "Evaluate(): atom is not ground (unbound variable).");
      }
      return s.Contains(*p);
    }
    case Formula::Kind::kNot:
      return !Evaluate(f.children().front(), s);
    case Formula::Kind::kAnd:
      for (const Formula& c : f.children()) {
        if (!Evaluate(c, s)) return false;
      }
      return true;
    case Formula::Kind::kOr:
      for (const Formula& c : f.children()) {
        if (Evaluate(c, s)) return true;
      }
      return false;
    case Formula::Kind::kForall:
    case Formula::Kind::kExists:
      throw std::invalid_argument("Evaluate(): quantifier in ground formula.");
    case Formula::Kind::kWhen:
      throw std::invalid_argument("Evaluate(): `when` is only valid in effects.");
  }
  return false;
}

namespace {

void Print(const Formula& f, const std::vector<PredicateDef>& predicates,
           const std::vector<ObjectSym>& objects, std::ostream& os) {
  switch (f.kind()) {
    case Formula::Kind::kAtom:
      os << "(" << predicates.at(f.predicate()).name;
      for (const Term& t : f.args()) {
        os << " " << (t.is_variable() ? t.variable : objects.at(t.object).name);
      }
      os << ")";
      return;
    case Formula::Kind::kNot:
      os << "(not ";
      Print(f.children().front(), predicates, objects, os);
      os << ")";
      return;
    case Formula::Kind::kAnd:
    case Formula::Kind::kOr:
      os << (f.kind() == Formula::Kind::kAnd ? "(and" : "(or");
      for (const Formula& c : f.children()) {
        os << " ";
        Print(c, predicates, objects, os);
      }
      os << ")";
      return;
    case Formula::Kind::kForall:
    case Formula::Kind::kExists:
      os << (f.kind() == Formula::Kind::kForall ? "(forall (" : "(exists (")
         << f.variable().name << " - " << f.variable().type.ToString() << ") ";
      Print(f.body(), predicates, objects, os);
      os << ")";
      return;
    case Formula::Kind::kWhen:
      os << "(when ";
      Print(f.condition(), predicates, objects, os);
      os << " ";
      Print(f.effect(), predicates, objects, os);
      os << ")";
      return;
  }
}

}  // namespace

std::string FormulaToString(const Formula& f,
                            const std::vector<PredicateDef>& predicates,
                            const std::vector<ObjectSym>& objects) {
  std::stringstream ss;
  Print(f, predicates, objects, ss);
  return ss.str();
}

std::vector<std::string> SortedNames(const Bitset& bits,
                                     const PropositionIndex& index) {
  std::vector<std::string> out;
  bits.for_each([&](size_t i) { out.push_back(index.Name(i)); });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pgk
