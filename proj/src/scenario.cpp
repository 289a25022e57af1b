#include "tomtrace/scenario.hpp"

#include <random>

namespace tomtrace {

namespace {

// modulo draws keep the stream identical across standard libraries
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(uint64_t seed) : gen(seed) {}
  int below(int n) { return static_cast<int>(gen() % static_cast<uint64_t>(n)); }
  int between(int lo, int hi) { return lo + below(hi - lo + 1); }
  bool chance(int percent) { return below(100) < percent; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<size_t>(below(static_cast<int>(v.size())))];
  }
};

}  // namespace

Scenario random_scenario(uint64_t seed, const DomainDef& domain,
                         const ScenarioSizes& sizes) {
  Rng rng(seed);
  SymbolTable& sym = *domain.symbols;

  Scenario sc;
  sc.problem.symbols = domain.symbols;
  sc.problem.name = sym.intern("scenario-" + std::to_string(seed));

  int n_agents = rng.between(1, sizes.max_agents);
  int n_rooms = rng.between(1, sizes.max_rooms);
  int n_containers = rng.between(0, sizes.max_containers);
  int n_objects = rng.between(0, sizes.max_objects);
  int n_utterances = rng.between(0, sizes.max_utterances);

  std::vector<SymbolId> agents, rooms, containers, objects, utterances;
  auto declare = [&](const std::string& prefix, int i, SymbolId type) {
    SymbolId name = sym.intern(prefix + std::to_string(i + 1));
    sc.problem.objects.emplace_back(name, type);
    return name;
  };
  for (int i = 0; i < n_agents; ++i) agents.push_back(declare("agent", i, domain.t_agent));
  for (int i = 0; i < n_rooms; ++i) rooms.push_back(declare("room", i, domain.t_room));
  for (int i = 0; i < n_containers; ++i)
    containers.push_back(declare("box", i, domain.t_container));
  for (int i = 0; i < n_objects; ++i) objects.push_back(declare("item", i, domain.t_obj));
  for (int i = 0; i < n_utterances; ++i)
    utterances.push_back(declare("u", i, domain.t_utterance));

  SymbolId p_at = sym.intern("at");
  SymbolId p_in = sym.intern("in");
  SymbolId p_part_of = sym.intern("part-of");
  SymbolId p_opened = sym.intern("opened");
  SymbolId p_holding = sym.intern("holding");
  SymbolId p_seen = sym.intern("seen");
  SymbolId p_heard = sym.intern("heard");

  auto add = [&](SymbolId pred, std::vector<SymbolId> args) {
    sc.problem.init.insert({pred, std::move(args)});
  };

  for (SymbolId a : agents) add(p_at, {a, rng.pick(rooms)});
  for (SymbolId c : containers) {
    add(p_part_of, {c, rng.pick(rooms)});
    if (rng.chance(50)) add(p_opened, {c});
  }
  for (SymbolId o : objects) {
    // exactly one placement: a room, a container, or a holder
    int kind = rng.below(3);
    if (kind == 0 || (kind == 1 && containers.empty())) {
      add(p_in, {o, rng.pick(rooms)});
    } else if (kind == 1) {
      add(p_in, {o, rng.pick(containers)});
    } else {
      add(p_holding, {rng.pick(agents), o});
    }
    if (rng.chance(25)) add(p_seen, {rng.pick(agents), o});
  }
  for (SymbolId u : utterances) {
    sc.problem.utterance_texts[u] = "utterance " + sym.name(u);
    if (rng.chance(25)) add(p_heard, {rng.pick(agents), u});
  }

  auto objects_of_type = [&](SymbolId type) {
    std::vector<SymbolId> out;
    for (const auto& [name, ty] : sc.problem.objects)
      if (domain.types.is_subtype(ty, type)) out.push_back(name);
    return out;
  };

  int plan_length = rng.between(0, sizes.max_plan_length);
  for (int i = 0; i < plan_length; ++i) {
    // retry until a schema whose parameter types are all inhabited comes up
    for (int attempt = 0; attempt < 16; ++attempt) {
      const ActionSchema& schema =
          domain.actions[static_cast<size_t>(rng.below(static_cast<int>(domain.actions.size())))];
      GroundAction action{schema.name, {}};
      bool ok = true;
      for (const TypedVar& p : schema.params) {
        auto pool = objects_of_type(p.type);
        if (pool.empty()) {
          ok = false;
          break;
        }
        action.args.push_back(rng.pick(pool));
      }
      if (ok) {
        sc.candidates.push_back(std::move(action));
        break;
      }
    }
  }
  return sc;
}

bool check_structural_invariants(const WorldState& state, const GroundingContext& ctx,
                                 std::string* violation) {
  const DomainDef& d = ctx.domain();
  const SymbolTable& sym = ctx.symbols();
  auto fail = [&](const std::string& msg) {
    if (violation) *violation = msg;
    return false;
  };
  auto p_at = d.symbols->lookup("at");
  auto p_in = d.symbols->lookup("in");
  auto p_holding = d.symbols->lookup("holding");
  if (!p_at || !p_in || !p_holding) return fail("canonical predicates missing");

  for (SymbolId a : ctx.enumerate_objects(d.t_agent)) {
    int rooms = 0;
    for (const GroundAtom& g : state)
      if (g.pred == *p_at && g.args[0] == a) ++rooms;
    if (rooms != 1)
      return fail("agent " + sym.name(a) + " is at " + std::to_string(rooms) + " rooms");
  }
  for (SymbolId o : ctx.enumerate_objects(d.t_obj)) {
    int placements = 0;
    for (const GroundAtom& g : state) {
      if (g.pred == *p_in && g.args[0] == o) ++placements;
      if (g.pred == *p_holding && g.args[1] == o) ++placements;
    }
    if (placements > 1)
      return fail("object " + sym.name(o) + " has " + std::to_string(placements) +
                  " placements");
  }
  return true;
}

}  // namespace tomtrace
