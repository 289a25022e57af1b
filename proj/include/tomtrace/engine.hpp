#pragma once

// Grounding, precondition evaluation, effect application and the
// verification loop that filters candidate actions into a trace.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tomtrace/pddl.hpp"

namespace tomtrace {

struct GroundAtom {
  SymbolId pred;
  std::vector<SymbolId> args;
  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
};

// Finite set of ground atoms; closed world, absent means false.
using WorldState = std::set<GroundAtom>;

struct GroundAction {
  SymbolId name;
  std::vector<SymbolId> args;
  friend bool operator==(const GroundAction&, const GroundAction&) = default;
};

enum class Verdict { Accepted, Rejected };

struct TraceStep {
  int index;  // 1-based
  GroundAction action;
  Verdict verdict;
  std::string reject_reason;  // printed failing conjunct, empty when accepted
  WorldState post_state;      // equals the pre-state when rejected
};

struct Trace {
  WorldState initial;
  std::vector<TraceStep> steps;

  std::vector<GroundAction> verified_actions() const;
  const WorldState& pre_state(size_t step_index) const;  // 0-based into steps
  const WorldState& final_state() const;
};

using Binding = std::map<SymbolId, SymbolId>;  // variable -> object

struct CheckResult {
  bool satisfied;
  std::string failing_conjunct;  // canonical print, bound, empty when satisfied
};

// Grounding context: the declared objects of one problem under one domain.
class GroundingContext {
 public:
  GroundingContext(const DomainDef& domain, const ProblemDef& problem)
      : domain_(domain), problem_(problem) {}

  const DomainDef& domain() const { return domain_; }
  const ProblemDef& problem() const { return problem_; }
  const SymbolTable& symbols() const { return *domain_.symbols; }

  // Declared objects of the given type or a subtype, in declaration order.
  std::vector<SymbolId> enumerate_objects(SymbolId type) const;

 private:
  const DomainDef& domain_;
  const ProblemDef& problem_;
};

bool eval_formula(const WorldState& state, const Formula& formula,
                  const Binding& binding, const GroundingContext& ctx);

// Expands quantified conditional effects against the pre-effect state into
// flat add and delete sets.
void expand_effect(const WorldState& state, const Effect& effect, const Binding& binding,
                   const GroundingContext& ctx, std::vector<GroundAtom>& adds,
                   std::vector<GroundAtom>& dels);

// (state \ deletes) ∪ adds; adds win on overlap.
WorldState apply_effect(const WorldState& state, const Effect& effect,
                        const Binding& binding, const GroundingContext& ctx);

CheckResult check_action(const WorldState& state, const GroundAction& action,
                         const GroundingContext& ctx);

// Parameter binding for a well-formed ground action; nullopt when the action
// is unknown, has the wrong arity, or ill-typed arguments.
std::optional<Binding> action_binding(const GroundAction& action,
                                      const GroundingContext& ctx);

// Ground the problem's :init and close it under initial visibility: every
// agent sees the objects lying in its room, inside open containers there,
// or held by a co-present agent.
WorldState initial_state(const GroundingContext& ctx);

Trace validate_and_filter(const WorldState& s0,
                          const std::vector<GroundAction>& candidates,
                          const GroundingContext& ctx);

// Differential-testing twin of validate_and_filter: recomputes each step's
// pre-state by re-folding the accepted prefix from scratch.
Trace replay_oracle(const WorldState& s0, const std::vector<GroundAction>& candidates,
                    const GroundingContext& ctx);

// A plan file is a sequence of ground action s-expressions; comments allowed.
std::vector<GroundAction> parse_plan_text(std::string_view text, SymbolTable& symbols);

std::string print_atom(const GroundAtom& atom, const SymbolTable& symbols);
std::string print_action(const GroundAction& action, const SymbolTable& symbols);
std::string render_state(const WorldState& state, const SymbolTable& symbols);
std::string render_trace(const Trace& trace, const SymbolTable& symbols);

}  // namespace tomtrace
