#include "tomtrace/epistemic.hpp"

#include <sstream>

namespace tomtrace {

namespace {

struct CanonicalPreds {
  SymbolId at, in, part_of, opened, holding, seen, heard;
  SymbolId a_move, a_open, a_close, a_grab, a_drop, a_tell, a_ask;
};

CanonicalPreds preds(const GroundingContext& ctx) {
  SymbolTable& sym = *ctx.domain().symbols;
  return {sym.intern("at"),   sym.intern("in"),   sym.intern("part-of"),
          sym.intern("opened"), sym.intern("holding"), sym.intern("seen"),
          sym.intern("heard"), sym.intern("move"), sym.intern("open"),
          sym.intern("close"), sym.intern("grab"), sym.intern("drop"),
          sym.intern("tell"),  sym.intern("ask")};
}

std::optional<SymbolId> room_of(const WorldState& state, SymbolId agent, SymbolId p_at) {
  for (const GroundAtom& g : state)
    if (g.pred == p_at && g.args[0] == agent) return g.args[1];
  return std::nullopt;
}

// Where an object truly sits in a state: a location (room/container) or a
// holder agent.
std::optional<BeliefEntry> true_placement(const WorldState& state, SymbolId object,
                                          const CanonicalPreds& p, int step) {
  for (const GroundAtom& g : state) {
    if (g.pred == p.in && g.args[0] == object) return BeliefEntry{g.args[1], false, step};
    if (g.pred == p.holding && g.args[1] == object)
      return BeliefEntry{g.args[0], true, step};
  }
  return std::nullopt;
}

// Objects visible in a room: lying in it or inside an open container there.
std::vector<SymbolId> visible_objects(const WorldState& state, SymbolId room,
                                      const GroundingContext& ctx,
                                      const CanonicalPreds& p) {
  std::vector<SymbolId> out;
  for (SymbolId o : ctx.enumerate_objects(ctx.domain().t_obj)) {
    if (state.count({p.in, {o, room}})) {
      out.push_back(o);
      continue;
    }
    for (SymbolId c : ctx.enumerate_objects(ctx.domain().t_container)) {
      if (state.count({p.part_of, {c, room}}) && state.count({p.opened, {c}}) &&
          state.count({p.in, {o, c}})) {
        out.push_back(o);
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<ObservationEvent> observation_events(const Trace& trace,
                                                 const GroundingContext& ctx) {
  CanonicalPreds p = preds(ctx);
  std::vector<ObservationEvent> events;
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& step = trace.steps[i];
    if (step.verdict != Verdict::Accepted) continue;
    ObservationEvent e;
    e.step = step.index;
    e.action = step.action;
    e.actor = step.action.args.empty() ? -1 : step.action.args[0];
    e.pre_room = room_of(trace.pre_state(i), e.actor, p.at);
    e.post_room = room_of(step.post_state, e.actor, p.at);
    events.push_back(std::move(e));
  }
  return events;
}

bool observes(const ObservationEvent& event, SymbolId watcher, const Trace& trace,
              const GroundingContext& ctx) {
  if (watcher == event.actor) return true;
  CanonicalPreds p = preds(ctx);
  const WorldState& pre = trace.pre_state(static_cast<size_t>(event.step) - 1);
  if (event.pre_room && pre.count({p.at, {watcher, *event.pre_room}})) return true;
  if (event.action.name == p.a_move && event.post_room) {
    const WorldState& post = trace.steps[static_cast<size_t>(event.step) - 1].post_state;
    if (post.count({p.at, {watcher, *event.post_room}})) return true;
  }
  return false;
}

BeliefMap fold_beliefs(const Trace& trace, SymbolId watcher, const GroundingContext& ctx,
                       const EventFilter& extra_filter) {
  CanonicalPreds p = preds(ctx);
  BeliefMap beliefs;

  // initial seen/heard atoms seed the map with the objects' true placements
  for (const GroundAtom& g : trace.initial) {
    if (g.pred == p.seen && g.args[0] == watcher) {
      auto entry = true_placement(trace.initial, g.args[1], p, 0);
      if (entry) beliefs.locations[g.args[1]] = *entry;
    }
    if (g.pred == p.heard && g.args[0] == watcher) beliefs.heard.insert(g.args[1]);
  }

  for (const ObservationEvent& e : observation_events(trace, ctx)) {
    if (!observes(e, watcher, trace, ctx)) continue;
    if (extra_filter && !extra_filter(e)) continue;
    const WorldState& post = trace.steps[static_cast<size_t>(e.step) - 1].post_state;
    SymbolId name = e.action.name;
    if (name == p.a_grab) {
      beliefs.locations[e.action.args[1]] = {e.actor, true, e.step};
    } else if (name == p.a_drop) {
      beliefs.locations[e.action.args[1]] = {e.action.args[2], false, e.step};
    } else if (name == p.a_open) {
      SymbolId container = e.action.args[1];
      for (SymbolId o : ctx.enumerate_objects(ctx.domain().t_obj))
        if (post.count({p.in, {o, container}}))
          beliefs.locations[o] = {container, false, e.step};
    } else if (name == p.a_move) {
      // only arrival-side watchers (or the mover) see the destination room
      bool arrived = watcher == e.actor ||
                     (e.post_room && post.count({p.at, {watcher, *e.post_room}}));
      if (arrived && e.post_room) {
        for (SymbolId o : visible_objects(post, *e.post_room, ctx, p)) {
          auto entry = true_placement(post, o, p, e.step);
          if (entry) beliefs.locations[o] = *entry;
        }
      }
    } else if (name == p.a_tell || name == p.a_ask) {
      beliefs.heard.insert(e.action.args[1]);
    }
  }
  return beliefs;
}

QueryAnswer answer_query(const BeliefQuery& query, const Trace& trace,
                         const GroundingContext& ctx) {
  switch (query.kind) {
    case BeliefQuery::Kind::LocationBelief: {
      BeliefMap m = fold_beliefs(trace, query.subjects[0], ctx);
      auto it = m.locations.find(query.target);
      if (it == m.locations.end()) return {QueryAnswer::Kind::Unknown};
      return {QueryAnswer::Kind::Place, it->second.place};
    }
    case BeliefQuery::Kind::Heard: {
      BeliefMap m = fold_beliefs(trace, query.subjects[0], ctx);
      return {QueryAnswer::Kind::Truth, -1, m.heard.count(query.target) > 0};
    }
    case BeliefQuery::Kind::NestedLocationBelief: {
      SymbolId outer = query.subjects[0];
      SymbolId inner = query.subjects[1];
      // inner fold restricted to events both agents witnessed
      EventFilter both = [&](const ObservationEvent& e) {
        return observes(e, outer, trace, ctx);
      };
      BeliefMap m = fold_beliefs(trace, inner, ctx, both);
      auto it = m.locations.find(query.target);
      if (it == m.locations.end()) return {QueryAnswer::Kind::Unknown};
      return {QueryAnswer::Kind::Place, it->second.place};
    }
  }
  return {QueryAnswer::Kind::Unknown};
}

BeliefQuery parse_query(const std::string& text, const GroundingContext& ctx) {
  std::istringstream is(text);
  std::vector<std::string> words;
  std::string w;
  while (is >> w) words.push_back(w);
  auto resolve = [&](const std::string& name, SymbolId type,
                     const char* what) -> SymbolId {
    auto id = ctx.domain().symbols->lookup(name);
    if (id) {
      auto obj_type = ctx.problem().type_of(*id);
      if (obj_type && ctx.domain().types.is_subtype(*obj_type, type)) return *id;
    }
    throw std::invalid_argument("'" + name + "' is not a declared " + what);
  };
  const DomainDef& d = ctx.domain();
  BeliefQuery q;
  if (words.size() == 3 && words[0] == "believes") {
    q.kind = BeliefQuery::Kind::LocationBelief;
    q.subjects = {resolve(words[1], d.t_agent, "agent")};
    q.target = resolve(words[2], d.t_obj, "object");
  } else if (words.size() == 3 && words[0] == "heard") {
    q.kind = BeliefQuery::Kind::Heard;
    q.subjects = {resolve(words[1], d.t_agent, "agent")};
    q.target = resolve(words[2], d.t_utterance, "utterance");
  } else if (words.size() == 4 && words[0] == "believes") {
    q.kind = BeliefQuery::Kind::NestedLocationBelief;
    q.subjects = {resolve(words[1], d.t_agent, "agent"),
                  resolve(words[2], d.t_agent, "agent")};
    q.target = resolve(words[3], d.t_obj, "object");
  } else {
    throw std::invalid_argument("unparsable query: " + text);
  }
  return q;
}

std::string format_answer(const QueryAnswer& answer, const SymbolTable& symbols) {
  switch (answer.kind) {
    case QueryAnswer::Kind::Place:
      return symbols.name(answer.place);
    case QueryAnswer::Kind::Truth:
      return answer.truth ? "true" : "false";
    case QueryAnswer::Kind::Unknown:
      return "unknown";
  }
  return "unknown";
}

}  // namespace tomtrace
