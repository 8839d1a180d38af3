/**
 * planner.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/planner.h"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace pgk {

using gridworld::World;

Dnf CompileGoal(const Formula& goal, const PropositionIndex& index) {
  Dnf d = ToDnf(Ground(goal, index), index.size(), kDefaultDnfCap, "goal");
  if (d.unsatisfiable()) throw UnsatisfiableFormula("goal: no conjunction is satisfiable.");
  return d;
}

size_t GoalCount(const Dnf& goal, const ClosedState& s) {
  size_t best = SIZE_MAX;
  for (const PartialState& c : goal.conjunctions) {
    const size_t missing = (c.pos() - s.bits()).count() + (c.neg() & s.bits()).count();
    best = std::min(best, missing);
  }
  return best;
}

std::string StatusName(Plan::Status s) {
  switch (s) {
    case Plan::Status::kSolved:
      return "solved";
    case Plan::Status::kBudgetExhausted:
      return "budget_exhausted";
    case Plan::Status::kUnsolvable:
      return "unsolvable";
  }
  return "?";
}

namespace {

struct Node {
  ClosedState state;
  size_t parent;
  size_t action;
};

std::vector<size_t> Extract(const std::vector<Node>& nodes, size_t id) {
  std::vector<size_t> plan;
  for (; id != 0; id = nodes[id].parent) plan.push_back(nodes[id].action);
  return {plan.rbegin(), plan.rend()};
}

// Shared search loop. `Frontier` pops node ids in the order to expand.
template <typename Frontier>
Plan Search(const ClosedState& init, const Dnf& goal, const std::vector<GroundAction>& actions,
            size_t budget, Frontier& frontier) {
  if (goal.unsatisfiable()) throw UnsatisfiableFormula("goal: no conjunction is satisfiable.");
  Plan plan;
  if (goal.SatisfiedBy(init)) {
    plan.status = Plan::Status::kSolved;
    return plan;
  }
  std::vector<Node> nodes{{init, 0, 0}};
  std::unordered_map<ClosedState, size_t, ClosedStateHash> seen{{init, 0}};
  frontier.Push(nodes, 0);
  while (!frontier.empty()) {
    if (plan.expanded >= budget) {
      plan.status = Plan::Status::kBudgetExhausted;
      return plan;
    }
    const size_t id = frontier.Pop();
    ++plan.expanded;
    for (size_t a = 0; a < actions.size(); ++a) {
      if (!CheckPre(actions[a], nodes[id].state)) continue;
      ClosedState next = Apply(actions[a], nodes[id].state);
      if (seen.contains(next)) continue;
      ++plan.generated;
      seen.emplace(next, nodes.size());
      nodes.push_back({std::move(next), id, a});
      if (goal.SatisfiedBy(nodes.back().state)) {
        plan.status = Plan::Status::kSolved;
        plan.actions = Extract(nodes, nodes.size() - 1);
        return plan;
      }
      frontier.Push(nodes, nodes.size() - 1);
    }
  }
  plan.status = Plan::Status::kUnsolvable;
  return plan;
}

class GreedyFrontier {
 public:
  explicit GreedyFrontier(const Dnf& goal) : goal_(goal) {}
  void Push(const std::vector<Node>& nodes, size_t id) {
    queue_.emplace(GoalCount(goal_, nodes[id].state), id);
  }
  size_t Pop() {
    const size_t id = queue_.top().second;
    queue_.pop();
    return id;
  }
  bool empty() const { return queue_.empty(); }

 private:
  using Entry = std::pair<size_t, size_t>;  // (heuristic, insertion id)
  const Dnf& goal_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue_;
};

class FifoFrontier {
 public:
  void Push(const std::vector<Node>&, size_t id) { queue_.push_back(id); }
  size_t Pop() {
    const size_t id = queue_.front();
    queue_.pop_front();
    return id;
  }
  bool empty() const { return queue_.empty(); }

 private:
  std::deque<size_t> queue_;
};

ObjectId RequireObject(const World& world, const std::string& name) {
  const auto o = world.index().FindObject(name);
  if (!o) throw std::logic_error("RandomInstance(): fixture lacks object '" + name + "'.");
  return *o;
}

void SetFact(const World& world, ClosedState& s, const std::string& pred,
             const std::vector<ObjectId>& args, bool value = true) {
  const PropositionIndex& index = world.index();
  const auto p = index.Find(*index.FindPredicate(pred), args);
  if (!p) throw std::logic_error("RandomInstance(): " + pred + " fact is not a proposition.");
  s.Set(*p, value);
}

bool Coin(Rng& rng) { return (rng() >> 63) != 0; }

}  // namespace

Plan PlanGbfs(const ClosedState& init, const Dnf& goal, const std::vector<GroundAction>& actions,
              size_t budget) {
  GreedyFrontier frontier(goal);
  return Search(init, goal, actions, budget, frontier);
}

Plan PlanBfs(const ClosedState& init, const Dnf& goal, const std::vector<GroundAction>& actions,
             size_t budget) {
  FifoFrontier frontier;
  return Search(init, goal, actions, budget, frontier);
}

bool ValidatePlan(const ClosedState& init, const Dnf& goal,
                  const std::vector<GroundAction>& actions, const std::vector<size_t>& plan) {
  ClosedState s = init;
  for (size_t a : plan) {
    if (a >= actions.size() || !CheckPre(actions[a], s)) return false;
    s = Apply(actions[a], s);
  }
  return goal.SatisfiedBy(s);
}

std::vector<std::string> PlanNames(const std::vector<GroundAction>& actions,
                                   const std::vector<size_t>& plan,
                                   const PropositionIndex& index) {
  std::vector<std::string> names;
  for (size_t a : plan) names.push_back(actions.at(a).Name(index));
  return names;
}

ClosedState RandomInstance(const World& world, const Dnf& goal, Rng& rng, bool locked_door,
                           size_t budget) {
  const ObjectId agent = RequireObject(world, "agent");
  const ObjectId rooms[2] = {RequireObject(world, "room_a"), RequireObject(world, "room_b")};
  const ObjectId door = RequireObject(world, "door");
  const ObjectId chest = RequireObject(world, "chest");
  const ObjectId trophy = RequireObject(world, "trophy");
  const ObjectId door_key = RequireObject(world, "door_key");
  const ObjectId chest_key = RequireObject(world, "chest_key");
  auto room = [&] { return rooms[UniformInt(rng, 2)]; };

  for (int attempt = 0; attempt < 1000; ++attempt) {
    ClosedState s(world.index().size());
    const size_t from = UniformInt(rng, 2);
    SetFact(world, s, "in", {agent, rooms[UniformInt(rng, 2)]});
    SetFact(world, s, "in", {door, rooms[0]});
    SetFact(world, s, "in", {door, rooms[1]});
    SetFact(world, s, "connects", {door, rooms[from], rooms[1 - from]});
    const bool door_closed = Coin(rng);
    SetFact(world, s, "closed", {door}, door_closed);
    SetFact(world, s, "locked", {door}, door_closed && Coin(rng));
    SetFact(world, s, "in", {door_key, room()});
    SetFact(world, s, "in", {chest_key, room()});
    SetFact(world, s, "in", {chest, room()});
    const bool chest_closed = Coin(rng);
    SetFact(world, s, "closed", {chest}, chest_closed);
    SetFact(world, s, "locked", {chest}, chest_closed && Coin(rng));
    SetFact(world, s, "in", {trophy, UniformInt(rng, 4) == 0 ? room() : chest});
    SetFact(world, s, "matches", {door_key, door});
    SetFact(world, s, "matches", {chest_key, chest});
    if (goal.SatisfiedBy(s)) continue;
    const Plan plan = PlanBfs(s, goal, world.actions(), budget);
    if (!plan.solved()) continue;
    if (!locked_door) return s;
    for (size_t a : plan.actions) {
      const GroundAction& act = world.actions()[a];
      if (act.schema == "unlock" && act.args[0] == door) return s;
    }
  }
  throw std::runtime_error("RandomInstance(): no solvable instance in 1000 draws.");
}

ClosedState Disturb(const World& world, const ClosedState& s) {
  const PropositionIndex& index = world.index();
  ClosedState out = s;
  for (ObjectId d : index.ObjectsOfType(TypeRef("door"))) {
    SetFact(world, out, "closed", {d});
    SetFact(world, out, "locked", {d});
  }
  return out;
}

namespace {

bool DoorUnlocked(const World& world, const ClosedState& s) {
  const PropositionIndex& index = world.index();
  const int locked = *index.FindPredicate("locked");
  for (ObjectId d : index.ObjectsOfType(TypeRef("door"))) {
    const ObjectId args[] = {d};
    if (!s.Contains(*index.Find(locked, args))) return true;
  }
  return false;
}

// `choose` fills step.action and step.plan_length for the current state.
template <typename Choose>
LoopTrace RunLoop(const World& world, const ClosedState& init, const Dnf& goal,
                  const LoopOptions& options, Rng& rng, Choose&& choose) {
  LoopTrace trace;
  ClosedState state = init;
  bool disturbed = false;
  trace.satisfied = goal.SatisfiedBy(state);
  for (int t = 0; t < options.horizon && !trace.satisfied; ++t) {
    LoopStep step;
    step.step = t;
    if (!disturbed && options.disturb_at >= 0 && t >= options.disturb_at &&
        DoorUnlocked(world, state)) {
      ClosedState next = Disturb(world, state);
      if (PlanBfs(next, goal, world.actions()).solved()) {
        state = std::move(next);
        disturbed = true;
        step.disturbed = true;
      }
    }
    step.placement_seed = rng();
    choose(state, step);
    if (step.action && CheckPre(world.actions()[*step.action], state)) {
      state = Apply(world.actions()[*step.action], state);
      step.executed = true;
    }
    step.state_after = state;
    step.goal_satisfied = goal.SatisfiedBy(state);
    trace.satisfied = step.goal_satisfied;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

}  // namespace

LoopTrace ClosedLoop(const World& world, const ClosedState& init, const Dnf& goal,
                     const Perception& perceive, const LoopOptions& options, Rng& rng) {
  const std::vector<GroundAction>& actions = world.actions();
  // Remaining steps of the previous plan, kept when re-planning finds nothing
  // shorter from the state it predicts.
  std::vector<size_t> tail;
  return RunLoop(world, init, goal, options, rng, [&](const ClosedState& state, LoopStep& step) {
    step.predicted = perceive(world.Render(state, step.placement_seed));
    Plan plan = PlanGbfs(step.predicted, goal, actions, options.budget);
    if (!tail.empty() && ValidatePlan(step.predicted, goal, actions, tail) &&
        (!plan.solved() || tail.size() <= plan.actions.size())) {
      plan.status = Plan::Status::kSolved;
      plan.actions = tail;
    }
    tail.clear();
    if (!plan.solved() || plan.actions.empty()) return;
    step.action = plan.actions.front();
    step.plan_length = plan.actions.size();
    tail.assign(plan.actions.begin() + 1, plan.actions.end());
  });
}

LoopTrace RandomLoop(const World& world, const ClosedState& init, const Dnf& goal,
                     const LoopOptions& options, Rng& rng) {
  return RunLoop(world, init, goal, options, rng, [&](const ClosedState&, LoopStep& step) {
    step.action = UniformInt(rng, world.actions().size());
  });
}

nlohmann::ordered_json LoopTrace::ToJson(const World& world, int episode) const {
  const PropositionIndex& index = world.index();
  nlohmann::ordered_json j;
  j["episode"] = episode;
  j["satisfied"] = satisfied;
  j["steps"] = nlohmann::ordered_json::array();
  for (const LoopStep& s : steps) {
    nlohmann::ordered_json r;
    r["step"] = s.step;
    r["observation"] = "render:" + std::to_string(s.placement_seed);
    r["predicted"] = SortedNames(s.predicted.bits(), index);
    r["action"] = s.action ? nlohmann::ordered_json(world.actions()[*s.action].Name(index))
                           : nlohmann::ordered_json(nullptr);
    r["plan_length"] = s.plan_length;
    r["executed"] = s.executed;
    r["disturbed"] = s.disturbed;
    r["state_after"] = SortedNames(s.state_after.bits(), index);
    r["goal_satisfied"] = s.goal_satisfied;
    j["steps"].push_back(std::move(r));
  }
  return j;
}

}  // namespace pgk
