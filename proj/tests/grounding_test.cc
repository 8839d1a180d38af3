/**
 * grounding_test.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include <unordered_set>

#include "doctest.h"
#include "pgk/gridworld.h"
#include "pgk/grounding.h"
#include "pgk/pddl.h"
#include "test_support.h"

namespace pgk {
namespace {

using testing::Literals;
using testing::Prop;
using testing::StateFromCode;

struct Fixture {
  Domain domain = ParseDomain(gridworld::DomainText());
  Problem problem = ParseProblem(gridworld::ProblemText(), domain);
  const PropositionIndex& index() const { return problem.index; }
  size_t P(std::string_view name) const { return *problem.index.FindByName(name); }
  ObjectId O(std::string_view name) const { return *problem.index.FindObject(name); }
  GroundAction Act(std::string_view schema, std::vector<std::string> args) const {
    std::vector<ObjectId> ids;
    for (const auto& a : args) ids.push_back(O(a));
    return MakeGroundAction(*domain.FindAction(schema), ids, problem.index);
  }
};

const Fixture& Grid() {
  static const Fixture f;
  return f;
}

// Drops every conjunction that strictly contains another one.
Dnf PruneSupersets(const Dnf& d) {
  Dnf out{d.num_propositions, {}};
  for (const PartialState& c : d.conjunctions) {
    bool absorbed = false;
    for (const PartialState& o : d.conjunctions) {
      if (!(o == c) && o.pos().is_subset_of(c.pos()) && o.neg().is_subset_of(c.neg())) {
        absorbed = true;
        break;
      }
    }
    if (!absorbed) out.conjunctions.push_back(c);
  }
  return out;
}

// States reachable from the fixture's initial state under exact semantics.
std::vector<ClosedState> Reachable(const Fixture& f, const std::vector<GroundAction>& actions) {
  std::vector<ClosedState> out{f.problem.init};
  std::unordered_set<ClosedState, ClosedStateHash> seen{f.problem.init};
  for (size_t i = 0; i < out.size(); ++i) {
    for (const GroundAction& a : actions) {
      if (!CheckPre(a, out[i])) continue;
      ClosedState next = Apply(a, out[i]);
      if (seen.insert(next).second) out.push_back(std::move(next));
    }
  }
  return out;
}

TEST_SUITE("grounding") {

TEST_CASE("forall over keys grounds to a conjunction, exists over rooms to a disjunction") {
  const Fixture& f = Grid();
  const int in = *f.index().FindPredicate("in");
  const Formula forall = Formula::Forall(
      {"?k", TypeRef("key")}, Formula::Atom(in, {Term::Var("?k"), Term::Obj(f.O("agent"))}));
  const Formula g = Ground(forall, f.index());
  REQUIRE(g.kind() == Formula::Kind::kAnd);
  CHECK(g.children().size() == 2);

  const Formula exists = Formula::Exists(
      {"?r", TypeRef("room")}, Formula::Atom(in, {Term::Obj(f.O("agent")), Term::Var("?r")}));
  const Formula h = Ground(exists, f.index());
  REQUIRE(h.kind() == Formula::Kind::kOr);
  CHECK(h.children().size() == 2);
}

TEST_CASE("empty quantifier domains are reported") {
  Domain d = ParseDomain(R"(
(define (domain t) (:requirements :typing :universal-preconditions)
  (:types a b) (:predicates (p ?x - a))
  (:action go :parameters (?x - a)
    :precondition (forall (?y - b) (p ?y)) :effect (p ?x))))");
  Problem p = ParseProblem("(define (problem q) (:domain t) (:objects o - a) (:init) (:goal (p o)))", d);
  std::vector<std::string> warnings;
  const Formula g = Ground(d.actions[0].precondition, p.index, {}, &warnings);
  CHECK(g.is_true());
  CHECK(warnings.size() == 1);
}

TEST_CASE("DNF of the worked examples") {
  // p = 0, q = 1, r = 2
  const Dnf d = ToDnf(Formula::And({Prop(0), Formula::Or({Prop(1), Formula::Not(Prop(2))})}), 3);
  CHECK(d.conjunctions == std::vector<PartialState>{Literals(3, {0, 1}, {}), Literals(3, {0}, {2})});
  CHECK(Collapse(d) == Literals(3, {0}, {}));

  CHECK(ToDnf(Formula::And({Prop(0), Formula::Not(Prop(0))}), 3).unsatisfiable());
  CHECK_THROWS_AS(Collapse(ToDnf(Formula::And({Prop(0), Formula::Not(Prop(0))}), 3)),
                  UnsatisfiableFormula);

  const Dnf taut = ToDnf(Formula::Or({Prop(0), Formula::Not(Prop(0))}), 3);
  CHECK(Collapse(taut).empty());

  const Dnf when = ToDnf(Formula::When(Prop(1), Formula::And({Prop(0), Formula::Not(Prop(2))})), 3);
  CHECK(when.conjunctions ==
        std::vector<PartialState>{Literals(3, {0}, {2}), PartialState(3)});
  CHECK(Collapse(when).empty());
}

TEST_CASE("DNF rejects quantifiers and enforces the cap") {
  CHECK_THROWS_AS(ToDnf(Formula::Exists({"?x", TypeRef()}, Prop(0)), 1), std::invalid_argument);
  // (p0 | p1) & (p2 | p3) & ... has 2^k conjunctions.
  std::vector<Formula> clauses;
  for (size_t i = 0; i < 10; ++i) clauses.push_back(Formula::Or({Prop(2 * i), Prop(2 * i + 1)}));
  CHECK(ToDnf(Formula::And(clauses), 20).conjunctions.size() == 1024);
  CHECK_THROWS_AS(ToDnf(Formula::And(clauses), 20, 1000), DnfBlowup);
}

TEST_CASE("DNF preserves truth and collapse matches the determined set") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + UniformInt(rng, 8);
    const Formula f = testing::RandomFormula(rng, n, 4);
    const Dnf d = ToDnf(f, n);
    for (uint64_t code = 0; code < (uint64_t{1} << n); ++code) {
      const ClosedState s = StateFromCode(n, code);
      REQUIRE(d.SatisfiedBy(s) == Evaluate(f, s));
    }
    if (!d.unsatisfiable()) CHECK(Collapse(d) == DeterminedSet(d));
  }
}

TEST_CASE("pruning absorbed conjunctions changes neither truth nor collapse") {
  Rng rng(9);
  int pruned = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const size_t n = 2 + UniformInt(rng, 6);
    const Dnf d = ToDnf(testing::RandomFormula(rng, n, 4), n);
    if (d.unsatisfiable()) continue;
    const Dnf q = PruneSupersets(d);
    pruned += q.conjunctions.size() < d.conjunctions.size();
    CHECK(Collapse(q) == Collapse(d));
    for (uint64_t code = 0; code < (uint64_t{1} << n); ++code) {
      const ClosedState s = StateFromCode(n, code);
      REQUIRE(q.SatisfiedBy(s) == d.SatisfiedBy(s));
    }
  }
  CHECK(pruned > 0);
}

TEST_CASE("gridworld labels") {
  const Fixture& f = Grid();
  const GroundAction open = f.Act("open", {"door"});
  CHECK(open.post_label.neg().test(f.P("closed(door)")));
  CHECK(open.pre_label.pos().test(f.P("closed(door)")));
  CHECK(open.pre_label.neg().test(f.P("locked(door)")));

  const GroundAction pick = f.Act("pick", {"trophy", "room_a"});
  CHECK(pick.post_label.pos().test(f.P("in(trophy,agent)")));
  CHECK(pick.post_label.neg().test(f.P("in(trophy,room_a)")));
  CHECK(pick.Name(f.index()) == "pick(trophy,room_a)");

  const GroundAction unlock = f.Act("unlock", {"chest", "chest_key"});
  CHECK(unlock.pre_label.pos().test(f.P("locked(chest)")));
  CHECK(unlock.post_label.neg().test(f.P("locked(chest)")));

  CHECK_THROWS_AS(f.Act("open", {"room_a"}), std::invalid_argument);
  CHECK_THROWS_AS(f.Act("open", {}), std::invalid_argument);
}

TEST_CASE("effects must be consistent literals") {
  const Domain d = ParseDomain(R"(
(define (domain t) (:requirements :strips :conditional-effects)
  (:predicates (p ?x) (q ?x))
  (:action bad :parameters (?x) :precondition (q ?x) :effect (and (p ?x) (not (p ?x))))
  (:action maybe :parameters (?x) :precondition (q ?x) :effect (when (q ?x) (p ?x)))))");
  const Problem p =
      ParseProblem("(define (problem e) (:domain t) (:objects a) (:init) (:goal (p a)))", d);
  CHECK_THROWS_AS(MakeGroundAction(d.actions[0], {0}, p.index), UnsatisfiableFormula);
  const GroundAction maybe = MakeGroundAction(d.actions[1], {0}, p.index);
  CHECK(maybe.post_label.empty());
  CHECK(maybe.warnings.size() == 1);
}

TEST_CASE("ground-all keeps satisfiable instances in order") {
  const Fixture& f = Grid();
  const std::vector<GroundAction> all = GroundAll(f.domain, f.index());
  REQUIRE_FALSE(all.empty());
  CHECK(all.front().schema == "goto");
  for (const GroundAction& a : all) CHECK_FALSE(a.pre_dnf.unsatisfiable());
  const auto tuples = ConformingTuples(f.domain.FindAction("unlock")->params, f.index());
  // 2 openables x 2 keys
  CHECK(tuples.size() == 4);
}

TEST_CASE("apply semantics") {
  const Fixture& f = Grid();
  const GroundAction pick = f.Act("pick", {"door_key", "room_a"});
  ClosedState s = f.problem.init;
  CHECK_THROWS_AS(Apply(pick, s), std::invalid_argument);
  s.Set(f.P("reachable(door_key)"));
  const ClosedState t = Apply(pick, s);
  CHECK(t.Contains(f.P("in(door_key,agent)")));
  CHECK_FALSE(t.Contains(f.P("in(door_key,room_a)")));

  // Conditions read the pre-state: goto clears old reachability, then adds.
  const GroundAction go = f.Act("goto", {"door", "room_a"});
  ClosedState u = f.problem.init;
  u.Set(f.P("reachable(door_key)"));
  const ClosedState v = Apply(go, u);
  CHECK(v.Contains(f.P("reachable(door)")));
  CHECK_FALSE(v.Contains(f.P("reachable(door_key)")));
}

TEST_CASE("labels are sound on every reachable state") {
  const Fixture& f = Grid();
  const std::vector<GroundAction> actions = GroundAll(f.domain, f.index());
  const std::vector<ClosedState> states = Reachable(f, actions);
  CHECK(states.size() > 100);
  size_t applied = 0;
  for (const ClosedState& s : states) {
    for (const GroundAction& a : actions) {
      if (!CheckPre(a, s)) continue;
      ++applied;
      const ClosedState t = Apply(a, s);
      REQUIRE(a.pre_label.SatisfiedBy(s));
      REQUIRE(a.post_label.SatisfiedBy(t));
      REQUIRE(ApplyPartial(t, a.post_label) == t);
    }
  }
  CHECK(applied > states.size());
}

TEST_CASE("labels are sound on sampled pairs") {
  const gridworld::World world;
  for (size_t i = 0; i < 2000; ++i) {
    const gridworld::Example e = gridworld::GenerateExample(world, 3, "train", i);
    const GroundAction& a = world.actions()[e.action];
    CHECK(a.pre_label.SatisfiedBy(e.pre));
    CHECK(a.post_label.SatisfiedBy(e.post));
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace pgk
