#pragma once

// Observation filtering over a verified trace: derive per-agent belief maps
// and answer first- and second-order literal belief questions.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "tomtrace/engine.hpp"

namespace tomtrace {

struct ObservationEvent {
  int step;             // 1-based trace step index (accepted steps only)
  SymbolId actor;
  GroundAction action;
  std::optional<SymbolId> pre_room;   // actor's room before the step
  std::optional<SymbolId> post_room;  // differs from pre_room only for move
};

struct BeliefEntry {
  SymbolId place;  // room, container, or holding agent
  bool held;       // true when place is an agent carrying the object
  int step;        // index of the last supporting observation (0 = initial)
};

struct BeliefMap {
  std::map<SymbolId, BeliefEntry> locations;  // object -> last-observed place
  std::set<SymbolId> heard;                   // utterances
};

struct BeliefQuery {
  enum class Kind { LocationBelief, Heard, NestedLocationBelief };
  Kind kind;
  std::vector<SymbolId> subjects;  // outermost first; nested has exactly 2
  SymbolId target;                 // object or utterance
};

struct QueryAnswer {
  enum class Kind { Place, Truth, Unknown };
  Kind kind;
  SymbolId place = -1;
  bool truth = false;
};

std::vector<ObservationEvent> observation_events(const Trace& trace,
                                                 const GroundingContext& ctx);

bool observes(const ObservationEvent& event, SymbolId watcher, const Trace& trace,
              const GroundingContext& ctx);

using EventFilter = std::function<bool(const ObservationEvent&)>;

BeliefMap fold_beliefs(const Trace& trace, SymbolId watcher, const GroundingContext& ctx,
                       const EventFilter& extra_filter = nullptr);

QueryAnswer answer_query(const BeliefQuery& query, const Trace& trace,
                         const GroundingContext& ctx);

// CLI query syntax: "believes <agent> <obj>", "heard <agent> <utterance>",
// "believes <agent> <agent> <obj>".
BeliefQuery parse_query(const std::string& text, const GroundingContext& ctx);

std::string format_answer(const QueryAnswer& answer, const SymbolTable& symbols);

}  // namespace tomtrace
