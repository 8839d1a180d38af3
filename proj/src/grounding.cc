/**
 * grounding.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/grounding.h"

#include <optional>
#include <unordered_set>

namespace pgk {

bool Dnf::SatisfiedBy(const ClosedState& s) const {
  for (const PartialState& c : conjunctions) {
    if (c.SatisfiedBy(s)) return true;
  }
  return false;
}

namespace {

ObjectId Lookup(const Binding& binding, const std::string& name) {
  for (auto it = binding.rbegin(); it != binding.rend(); ++it) {
    if (it->first == name) return it->second;
  }
  throw std::invalid_argument("Ground(): unbound variable '" + name + "'.");
}

Formula GroundRec(const Formula& f, const PropositionIndex& index,
                  Binding& binding, std::vector<std::string>* warnings) {
  switch (f.kind()) {
    case Formula::Kind::kAtom: {
      std::vector<ObjectId> args;
      args.reserve(f.args().size());
      for (const Term& t : f.args()) {
        args.push_back(t.is_variable() ? Lookup(binding, t.variable) : t.object);
      }
      const auto p = index.Find(f.predicate(), args);
      if (!p) return Formula::False();
      return Formula::GroundAtom(f.predicate(), std::move(args), *p);
    }
    case Formula::Kind::kNot:
      return Formula::Not(GroundRec(f.children().front(), index, binding, warnings));
    case Formula::Kind::kAnd:
    case Formula::Kind::kOr: {
      std::vector<Formula> children;
      children.reserve(f.children().size());
      for (const Formula& c : f.children()) {
        children.push_back(GroundRec(c, index, binding, warnings));
      }
      return f.kind() == Formula::Kind::kAnd ? Formula::And(std::move(children))
                                             : Formula::Or(std::move(children));
    }
    case Formula::Kind::kForall:
    case Formula::Kind::kExists: {
      const Parameter& var = f.variable();
      const std::vector<ObjectId> domain = index.ObjectsOfType(var.type);
      if (domain.empty() && warnings != nullptr) {
        warnings->push_back("no objects of type " + var.type.ToString() +
                            " for " + var.name);
      }
      std::vector<Formula> children;
      children.reserve(domain.size());
      for (ObjectId o : domain) {
        binding.emplace_back(var.name, o);
        children.push_back(GroundRec(f.body(), index, binding, warnings));
        binding.pop_back();
      }
      return f.kind() == Formula::Kind::kForall ? Formula::And(std::move(children))
                                                : Formula::Or(std::move(children));
    }
    case Formula::Kind::kWhen:
      return Formula::When(GroundRec(f.condition(), index, binding, warnings),
                           GroundRec(f.effect(), index, binding, warnings));
  }
  return f;
}

class DnfBuilder {
 public:
  DnfBuilder(size_t n, size_t cap, const std::string& context)
      : n_(n), cap_(cap), context_(context) {}

  using Terms = std::vector<PartialState>;

  Terms Build(const Formula& f, bool negated) {
    switch (f.kind()) {
      case Formula::Kind::kAtom: {
        const auto p = f.proposition();
        if (!p) {
          throw std::invalid_argument("ToDnf(): atom in " + context_ +
                                      " is not ground.");
        }
        PartialState lit(n_);
        if (negated) {
          lit.AddNegative(*p);
        } else {
          lit.AddPositive(*p);
        }
        return {std::move(lit)};
      }
      case Formula::Kind::kNot:
        return Build(f.children().front(), !negated);
      case Formula::Kind::kAnd:
      case Formula::Kind::kOr: {
        const bool conjunctive = (f.kind() == Formula::Kind::kAnd) != negated;
        if (conjunctive) {
          Terms acc = {PartialState(n_)};
          for (const Formula& c : f.children()) {
            acc = Product(acc, Build(c, negated));
            if (acc.empty()) break;
          }
          return acc;
        }
        Terms acc;
        for (const Formula& c : f.children()) acc = Union(std::move(acc), Build(c, negated));
        return acc;
      }
      case Formula::Kind::kWhen: {
        if (negated) {
          throw std::invalid_argument("ToDnf(): negated `when` in " + context_ + ".");
        }
        return Union(Build(f.effect(), false), {PartialState(n_)});
      }
      case Formula::Kind::kForall:
      case Formula::Kind::kExists:
        break;
    }
    throw std::invalid_argument("ToDnf(): quantifier in " + context_ +
                                "; ground it first.");
  }

 private:
  Terms Product(const Terms& a, const Terms& b) {
    Terms out;
    std::unordered_set<PartialState, PartialStateHash> seen;
    for (const PartialState& x : a) {
      for (const PartialState& y : b) {
        Bitset pos = x.pos() | y.pos();
        Bitset neg = x.neg() | y.neg();
        if (pos.intersects(neg)) continue;
        PartialState merged(std::move(pos), std::move(neg));
        if (seen.insert(merged).second) {
          out.push_back(std::move(merged));
          CheckCap(out.size());
        }
      }
    }
    return out;
  }

  Terms Union(Terms a, Terms b) {
    Terms out;
    std::unordered_set<PartialState, PartialStateHash> seen;
    for (Terms* part : {&a, &b}) {
      for (PartialState& x : *part) {
        if (seen.insert(x).second) {
          out.push_back(std::move(x));
          CheckCap(out.size());
        }
      }
    }
    return out;
  }

  void CheckCap(size_t size) const {
    if (size > cap_) {
      throw DnfBlowup("DNF of " + context_ + " exceeds " + std::to_string(cap_) +
                      " conjunctions.");
    }
  }

  size_t n_;
  size_t cap_;
  const std::string& context_;
};

void CollectEffect(const Formula& f, EffectClause& clause,
                   std::vector<EffectClause>& clauses, bool top_level,
                   const std::string& context) {
  switch (f.kind()) {
    case Formula::Kind::kAnd:
      for (const Formula& c : f.children()) {
        CollectEffect(c, clause, clauses, top_level, context);
      }
      return;
    case Formula::Kind::kAtom:
      clause.add.set(*f.proposition());
      return;
    case Formula::Kind::kNot: {
      const Formula& inner = f.children().front();
      if (inner.kind() == Formula::Kind::kAtom) {
        clause.del.set(*inner.proposition());
        return;
      }
      if (inner.is_false()) return;  // deleting an ill-typed atom
      break;
    }
    case Formula::Kind::kWhen: {
      if (!top_level) break;
      EffectClause nested;
      nested.conditional = true;
      nested.condition = f.condition();
      nested.add = Bitset(clause.add.size());
      nested.del = Bitset(clause.add.size());
      CollectEffect(f.effect(), nested, clauses, false, context);
      clauses.push_back(std::move(nested));
      return;
    }
    default:
      break;
  }
  throw UnsatisfiableFormula("effect of " + context +
                             " asserts something that is not a literal over a "
                             "well-typed proposition.");
}

std::optional<GroundAction> Build(const ActionSchema& schema,
                                  const std::vector<ObjectId>& args,
                                  const PropositionIndex& index, size_t cap,
                                  bool skip_unsat_pre) {
  if (args.size() != schema.params.size()) {
    throw std::invalid_argument("action " + schema.name + " takes " +
                                std::to_string(schema.params.size()) +
                                " argument(s), got " + std::to_string(args.size()) +
                                ".");
  }
  Binding binding;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] < 0 || static_cast<size_t>(args[i]) >= index.objects().size()) {
      throw std::invalid_argument("action " + schema.name + ": unknown object id.");
    }
    if (!index.ObjectConforms(args[i], schema.params[i].type)) {
      throw std::invalid_argument(
          "action " + schema.name + ": argument '" + index.objects()[args[i]].name +
          "' does not conform to " + schema.params[i].type.ToString() + ".");
    }
    binding.emplace_back(schema.params[i].name, args[i]);
  }

  GroundAction a;
  a.schema = schema.name;
  a.args = args;
  const std::string name = a.Name(index);
  const size_t n = index.size();

  a.precondition = Ground(schema.precondition, index, binding, &a.warnings);
  a.pre_dnf = ToDnf(a.precondition, n, cap, "precondition of " + name);
  if (a.pre_dnf.unsatisfiable()) {
    if (skip_unsat_pre) return std::nullopt;
    throw UnsatisfiableFormula("precondition of " + name + " is unsatisfiable.");
  }
  a.effect = Ground(schema.effect, index, binding, &a.warnings);
  a.eff_dnf = ToDnf(a.effect, n, cap, "effect of " + name);
  a.pre_label = Collapse(a.pre_dnf, "precondition of " + name);
  a.post_label = Collapse(a.eff_dnf, "effect of " + name);

  EffectClause base;
  base.add = Bitset(n);
  base.del = Bitset(n);
  std::vector<EffectClause> conditional;
  CollectEffect(a.effect, base, conditional, true, name);
  a.clauses.push_back(std::move(base));
  for (EffectClause& c : conditional) a.clauses.push_back(std::move(c));

  if (a.pre_label.empty()) {
    a.warnings.push_back(name + ": collapsed precondition is empty; the "
                                "precondition is too general to label anything");
  }
  if (a.post_label.empty()) {
    a.warnings.push_back(name + ": collapsed effect is empty; the action may "
                                "produce no changes");
  }
  return a;
}

}  // namespace

Formula Ground(const Formula& f, const PropositionIndex& index,
               const Binding& binding, std::vector<std::string>* warnings) {
  Binding scratch = binding;
  return GroundRec(f, index, scratch, warnings);
}

Dnf ToDnf(const Formula& f, size_t num_propositions, size_t cap,
          const std::string& context) {
  DnfBuilder builder(num_propositions, cap, context);
  return Dnf{num_propositions, builder.Build(f, false)};
}

PartialState Collapse(const Dnf& d, const std::string& context) {
  if (d.conjunctions.empty()) {
    throw UnsatisfiableFormula(context + " is unsatisfiable; nothing to collapse.");
  }
  Bitset pos = d.conjunctions.front().pos();
  Bitset neg = d.conjunctions.front().neg();
  for (size_t i = 1; i < d.conjunctions.size(); ++i) {
    pos &= d.conjunctions[i].pos();
    neg &= d.conjunctions[i].neg();
  }
  return PartialState(std::move(pos), std::move(neg));
}

PartialState DeterminedSet(const Dnf& d) {
  const size_t n = d.num_propositions;
  if (n > 20) {
    throw std::invalid_argument("DeterminedSet(): at most 20 propositions.");
  }
  Bitset always_true = ~Bitset(n);
  Bitset always_false = ~Bitset(n);
  bool any = false;
  ClosedState s(n);
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    for (size_t p = 0; p < n; ++p) s.Set(p, (mask >> p) & 1);
    if (!d.SatisfiedBy(s)) continue;
    any = true;
    always_true &= s.bits();
    always_false -= s.bits();
  }
  if (!any) throw UnsatisfiableFormula("DeterminedSet(): no state satisfies the DNF.");
  return PartialState(std::move(always_true), std::move(always_false));
}

std::string GroundAction::Name(const PropositionIndex& index) const {
  std::string out = schema + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += index.objects()[args[i]].name;
  }
  return out + ")";
}

GroundAction MakeGroundAction(const ActionSchema& schema,
                              const std::vector<ObjectId>& args,
                              const PropositionIndex& index, size_t cap) {
  return *Build(schema, args, index, cap, false);
}

std::vector<std::vector<ObjectId>> ConformingTuples(
    const std::vector<Parameter>& params, const PropositionIndex& index) {
  std::vector<std::vector<ObjectId>> choices;
  for (const Parameter& p : params) {
    choices.push_back(index.ObjectsOfType(p.type));
    if (choices.back().empty()) return {};
  }
  std::vector<std::vector<ObjectId>> out;
  std::vector<size_t> odometer(params.size(), 0);
  while (true) {
    std::vector<ObjectId> tuple(params.size());
    for (size_t i = 0; i < params.size(); ++i) tuple[i] = choices[i][odometer[i]];
    out.push_back(std::move(tuple));
    size_t k = params.size();
    while (k > 0 && ++odometer[k - 1] == choices[k - 1].size()) {
      odometer[k - 1] = 0;
      --k;
    }
    if (k == 0) return out;
  }
}

std::vector<GroundAction> GroundAll(const Domain& domain,
                                    const PropositionIndex& index, size_t cap) {
  std::vector<GroundAction> out;
  for (const ActionSchema& schema : domain.actions) {
    for (const auto& args : ConformingTuples(schema.params, index)) {
      if (auto a = Build(schema, args, index, cap, true)) out.push_back(std::move(*a));
    }
  }
  return out;
}

bool CheckPre(const GroundAction& a, const ClosedState& s) {
  return a.pre_dnf.SatisfiedBy(s);
}

ClosedState Apply(const GroundAction& a, const ClosedState& s) {
  if (!CheckPre(a, s)) {
    throw std::invalid_argument("Apply(): precondition of " + a.schema +
                                " does not hold.");
  }
  Bitset add(s.size());
  Bitset del(s.size());
  for (const EffectClause& c : a.clauses) {
    if (c.conditional && !Evaluate(c.condition, s)) continue;
    add |= c.add;
    del |= c.del;
  }
  Bitset out = s.bits();
  out -= del;
  out |= add;
  return ClosedState(std::move(out));
}

}  // namespace pgk
