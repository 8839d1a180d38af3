/**
 * planner.h
 *
 * Copyright 2026. All Rights Reserved.
 *
 * Forward state-space search over ground actions and the perceive, plan, act
 * loop run against the Gridworld simulator.
 */

#ifndef PGK_PLANNER_H_
#define PGK_PLANNER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgk/gridworld.h"
#include "pgk/grounding.h"
#include "pgk/logic.h"

namespace pgk {

inline constexpr size_t kDefaultPlanBudget = 100000;

/**
 * Goal compiled to DNF. Throws UnsatisfiableFormula when no conjunction
 * survives.
 */
Dnf CompileGoal(const Formula& goal, const PropositionIndex& index);

// Fewest unsatisfied literals over the goal's conjunctions.
size_t GoalCount(const Dnf& goal, const ClosedState& s);

struct Plan {
  enum class Status { kSolved, kBudgetExhausted, kUnsolvable };
  Status status = Status::kUnsolvable;
  std::vector<size_t> actions;  // into the action list searched
  size_t expanded = 0;
  size_t generated = 0;

  bool solved() const { return status == Status::kSolved; }
  size_t depth() const { return actions.size(); }
};

std::string StatusName(Plan::Status s);

// Greedy best-first on GoalCount, ties by insertion order, no re-expansion of
// seen states. `budget` bounds expansions.
Plan PlanGbfs(const ClosedState& init, const Dnf& goal, const std::vector<GroundAction>& actions,
              size_t budget = kDefaultPlanBudget);

// Breadth-first reference: shortest plans.
Plan PlanBfs(const ClosedState& init, const Dnf& goal, const std::vector<GroundAction>& actions,
             size_t budget = kDefaultPlanBudget);

// Replays a plan with Apply(); true iff every step applies and the goal holds.
bool ValidatePlan(const ClosedState& init, const Dnf& goal,
                  const std::vector<GroundAction>& actions, const std::vector<size_t>& plan);

std::vector<std::string> PlanNames(const std::vector<GroundAction>& actions,
                                   const std::vector<size_t>& plan, const PropositionIndex& index);

/**
 * Randomized variant of the trophy task: the agent's room, door direction,
 * key, chest and trophy placements and the lock states are drawn at random.
 * Returned instances are solvable within `budget` (checked breadth-first).
 * With `locked_door`, only instances whose breadth-first plan unlocks the door
 * are returned.
 */
ClosedState RandomInstance(const gridworld::World& world, const Dnf& goal, Rng& rng,
                           bool locked_door = false, size_t budget = kDefaultPlanBudget);

struct LoopStep {
  int step = 0;
  uint64_t placement_seed = 0;  // observation is Render(true state before, seed)
  ClosedState predicted;
  std::optional<size_t> action;  // plan head, if a plan was found
  size_t plan_length = 0;
  bool executed = false;
  bool disturbed = false;  // disturbance applied before this step's perception
  ClosedState state_after;
  bool goal_satisfied = false;
};

struct LoopTrace {
  std::vector<LoopStep> steps;
  bool satisfied = false;

  nlohmann::ordered_json ToJson(const gridworld::World& world, int episode) const;
};

// Maps an observation to a predicted closed state.
using Perception = std::function<ClosedState(const gridworld::Observation&)>;

struct LoopOptions {
  int horizon = 100;
  // From this step on, the first time the door is unlocked it is closed and
  // locked again, provided the task stays solvable (negative: never).
  int disturb_at = -1;
  size_t budget = 10000;
};

/**
 * Each step renders the true state, perceives it, plans from the prediction
 * and executes the plan head when its precondition holds in the true state;
 * otherwise the step is recorded as a failure and the loop perceives again.
 * Stops when the true state satisfies the goal or after `horizon` steps.
 */
LoopTrace ClosedLoop(const gridworld::World& world, const ClosedState& init, const Dnf& goal,
                     const Perception& perceive, const LoopOptions& options, Rng& rng);

// Same loop with a uniformly random action each step, for a baseline.
LoopTrace RandomLoop(const gridworld::World& world, const ClosedState& init, const Dnf& goal,
                     const LoopOptions& options, Rng& rng);

// Closes and locks every door in s.
ClosedState Disturb(const gridworld::World& world, const ClosedState& s);

}  // namespace pgk

#endif  // PGK_PLANNER_H_
