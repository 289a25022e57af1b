#pragma once

// Seeded scenario generator for property tests: random worlds that satisfy
// the structural state invariants plus well-typed (not necessarily
// satisfiable) candidate action sequences.

#include <cstdint>

#include "tomtrace/engine.hpp"

namespace tomtrace {

struct ScenarioSizes {
  int max_agents = 4;
  int max_rooms = 3;
  int max_containers = 4;
  int max_objects = 6;
  int max_utterances = 4;
  int max_plan_length = 30;
};

struct Scenario {
  ProblemDef problem;
  std::vector<GroundAction> candidates;
};

// Deterministic in (seed, sizes); identical output across platforms.
Scenario random_scenario(uint64_t seed, const DomainDef& domain,
                         const ScenarioSizes& sizes = {});

// Structural invariants of a well-formed world state: one room per agent,
// at most one placement-or-holder per object.
bool check_structural_invariants(const WorldState& state, const GroundingContext& ctx,
                                 std::string* violation = nullptr);

}  // namespace tomtrace
