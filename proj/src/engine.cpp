#include "tomtrace/engine.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace tomtrace {

std::vector<GroundAction> Trace::verified_actions() const {
  std::vector<GroundAction> out;
  for (const TraceStep& s : steps)
    if (s.verdict == Verdict::Accepted) out.push_back(s.action);
  return out;
}

const WorldState& Trace::pre_state(size_t step_index) const {
  return step_index == 0 ? initial : steps[step_index - 1].post_state;
}

const WorldState& Trace::final_state() const {
  return steps.empty() ? initial : steps.back().post_state;
}

std::vector<SymbolId> GroundingContext::enumerate_objects(SymbolId type) const {
  if (!domain_.types.contains(type))
    throw std::invalid_argument("unknown type '" + symbols().name(type) + "'");
  std::vector<SymbolId> out;
  for (const auto& [name, obj_type] : problem_.objects)
    if (domain_.types.is_subtype(obj_type, type)) out.push_back(name);
  return out;
}

namespace {

SymbolId resolve(const Term& t, const Binding& binding) {
  if (!t.is_variable) return t.sym;
  auto it = binding.find(t.sym);
  if (it == binding.end())
    throw std::logic_error("unbound variable in ground evaluation");
  return it->second;
}

GroundAtom ground_atom(SymbolId pred, const std::vector<Term>& terms,
                       const Binding& binding) {
  GroundAtom atom{pred, {}};
  atom.args.reserve(terms.size());
  for (const Term& t : terms) atom.args.push_back(resolve(t, binding));
  return atom;
}

// Substitutes the binding into a formula for printing rejection reasons;
// quantified variables stay symbolic.
Formula substitute(const Formula& f, const Binding& binding) {
  Formula out = f;
  for (Term& t : out.terms) {
    if (t.is_variable) {
      auto it = binding.find(t.sym);
      if (it != binding.end()) {
        t.is_variable = false;
        t.sym = it->second;
      }
    }
  }
  for (Formula& c : out.children) c = substitute(c, binding);
  return out;
}

void collect_effects(const WorldState& pre, const Effect& effect, Binding& binding,
                     const GroundingContext& ctx, std::vector<GroundAtom>& adds,
                     std::vector<GroundAtom>& dels) {
  switch (effect.kind) {
    case Effect::Kind::Add:
      adds.push_back(ground_atom(effect.pred, effect.terms, binding));
      break;
    case Effect::Kind::Del:
      dels.push_back(ground_atom(effect.pred, effect.terms, binding));
      break;
    case Effect::Kind::Conjunction:
      for (const Effect& e : effect.body) collect_effects(pre, e, binding, ctx, adds, dels);
      break;
    case Effect::Kind::ForallWhen: {
      // expand the quantifier; conditions read the pre-effect state
      std::vector<std::vector<SymbolId>> domains;
      for (const TypedVar& v : effect.vars)
        domains.push_back(ctx.enumerate_objects(v.type));
      auto expand = [&](auto&& self, size_t k) -> void {
        if (k == effect.vars.size()) {
          if (eval_formula(pre, *effect.condition, binding, ctx))
            for (const Effect& e : effect.body)
              collect_effects(pre, e, binding, ctx, adds, dels);
          return;
        }
        for (SymbolId obj : domains[k]) {
          binding[effect.vars[k].var] = obj;
          self(self, k + 1);
          binding.erase(effect.vars[k].var);
        }
      };
      expand(expand, 0);
      break;
    }
  }
}

}  // namespace

bool eval_formula(const WorldState& state, const Formula& formula,
                  const Binding& binding, const GroundingContext& ctx) {
  switch (formula.kind) {
    case Formula::Kind::Atom: {
      GroundAtom atom{formula.pred, {}};
      for (const Term& t : formula.terms) atom.args.push_back(resolve(t, binding));
      return state.count(atom) > 0;
    }
    case Formula::Kind::Equality:
      return resolve(formula.terms[0], binding) == resolve(formula.terms[1], binding);
    case Formula::Kind::Not:
      return !eval_formula(state, formula.children[0], binding, ctx);
    case Formula::Kind::And:
      for (const Formula& c : formula.children)
        if (!eval_formula(state, c, binding, ctx)) return false;
      return true;
    case Formula::Kind::Or:
      for (const Formula& c : formula.children)
        if (eval_formula(state, c, binding, ctx)) return true;
      return false;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool want_exists = formula.kind == Formula::Kind::Exists;
      std::vector<std::vector<SymbolId>> domains;
      for (const TypedVar& v : formula.vars) domains.push_back(ctx.enumerate_objects(v.type));
      Binding extended = binding;
      // short-circuits: exists stops on the first witness, forall on the
      // first counterexample
      auto search = [&](auto&& self, size_t k) -> bool {
        if (k == formula.vars.size())
          return eval_formula(state, formula.children[0], extended, ctx) == want_exists;
        for (SymbolId obj : domains[k]) {
          extended[formula.vars[k].var] = obj;
          bool hit = self(self, k + 1);
          extended.erase(formula.vars[k].var);
          if (hit) return true;
        }
        return false;
      };
      return search(search, 0) == want_exists;
    }
  }
  return false;
}

void expand_effect(const WorldState& state, const Effect& effect, const Binding& binding,
                   const GroundingContext& ctx, std::vector<GroundAtom>& adds,
                   std::vector<GroundAtom>& dels) {
  Binding b = binding;
  collect_effects(state, effect, b, ctx, adds, dels);
}

WorldState apply_effect(const WorldState& state, const Effect& effect,
                        const Binding& binding, const GroundingContext& ctx) {
  std::vector<GroundAtom> adds, dels;
  expand_effect(state, effect, binding, ctx, adds, dels);
  WorldState next = state;
  for (const GroundAtom& d : dels) next.erase(d);
  for (const GroundAtom& a : adds) next.insert(a);
  return next;
}

namespace {

void flatten_and(const Formula& f, std::vector<const Formula*>& out) {
  if (f.kind == Formula::Kind::And) {
    for (const Formula& c : f.children) flatten_and(c, out);
  } else {
    out.push_back(&f);
  }
}

// Binding plus well-formedness diagnosis; returns empty reason on success.
std::string bind_action(const GroundAction& action, const GroundingContext& ctx,
                        const ActionSchema** schema_out, Binding* binding_out) {
  const DomainDef& d = ctx.domain();
  const ActionSchema* schema = d.find_action(action.name);
  if (!schema) return "unknown action";
  if (action.args.size() != schema->params.size()) return "arity mismatch";
  Binding binding;
  for (size_t i = 0; i < action.args.size(); ++i) {
    auto type = ctx.problem().type_of(action.args[i]);
    if (!type) return "unknown object " + ctx.symbols().name(action.args[i]);
    if (!d.types.is_subtype(*type, schema->params[i].type))
      return "type mismatch: parameter " + ctx.symbols().name(schema->params[i].var) +
             " expects " + ctx.symbols().name(schema->params[i].type);
    binding[schema->params[i].var] = action.args[i];
  }
  *schema_out = schema;
  *binding_out = std::move(binding);
  return "";
}

}  // namespace

CheckResult check_action(const WorldState& state, const GroundAction& action,
                         const GroundingContext& ctx) {
  const ActionSchema* schema = nullptr;
  Binding binding;
  std::string malformed = bind_action(action, ctx, &schema, &binding);
  if (!malformed.empty()) {
    if (malformed == "unknown action")
      throw std::invalid_argument("unknown action '" +
                                  ctx.symbols().name(action.name) + "'");
    return {false, malformed};
  }
  std::vector<const Formula*> conjuncts;
  flatten_and(schema->precondition, conjuncts);
  for (const Formula* c : conjuncts) {
    if (!eval_formula(state, *c, binding, ctx))
      return {false, print_formula(substitute(*c, binding), ctx.symbols())};
  }
  return {true, ""};
}

std::optional<Binding> action_binding(const GroundAction& action,
                                      const GroundingContext& ctx) {
  const ActionSchema* schema = nullptr;
  Binding binding;
  if (!bind_action(action, ctx, &schema, &binding).empty()) return std::nullopt;
  return binding;
}

WorldState initial_state(const GroundingContext& ctx) {
  const DomainDef& d = ctx.domain();
  WorldState state;
  for (const InitAtom& a : ctx.problem().init) state.insert({a.pred, a.args});

  auto seen = d.symbols->lookup("seen");
  auto at = d.symbols->lookup("at");
  auto in = d.symbols->lookup("in");
  auto part_of = d.symbols->lookup("part-of");
  auto opened = d.symbols->lookup("opened");
  auto holding = d.symbols->lookup("holding");
  if (!seen || !at || !in || !part_of || !opened || !holding) return state;

  auto agent_room = [&](SymbolId agent) -> std::optional<SymbolId> {
    for (const GroundAtom& g : state)
      if (g.pred == *at && g.args[0] == agent) return g.args[1];
    return std::nullopt;
  };
  auto visible_in_room = [&](SymbolId room, SymbolId object) {
    if (state.count({*in, {object, room}})) return true;
    for (SymbolId c : ctx.enumerate_objects(d.t_container))
      if (state.count({*part_of, {c, room}}) && state.count({*opened, {c}}) &&
          state.count({*in, {object, c}}))
        return true;
    for (SymbolId a : ctx.enumerate_objects(d.t_agent))
      if (state.count({*holding, {a, object}}) && state.count({*at, {a, room}}))
        return true;
    return false;
  };
  WorldState closed = state;
  for (SymbolId a : ctx.enumerate_objects(d.t_agent)) {
    auto room = agent_room(a);
    if (!room) continue;
    for (SymbolId o : ctx.enumerate_objects(d.t_obj))
      if (visible_in_room(*room, o)) closed.insert({*seen, {a, o}});
  }
  return closed;
}

Trace validate_and_filter(const WorldState& s0,
                          const std::vector<GroundAction>& candidates,
                          const GroundingContext& ctx) {
  Trace trace;
  trace.initial = s0;
  WorldState state = s0;
  int index = 1;
  for (const GroundAction& action : candidates) {
    TraceStep step;
    step.index = index++;
    step.action = action;
    const ActionSchema* schema = ctx.domain().find_action(action.name);
    if (!schema) {
      step.verdict = Verdict::Rejected;
      step.reject_reason = "unknown action";
      step.post_state = state;
    } else {
      CheckResult result = check_action(state, action, ctx);
      if (result.satisfied) {
        Binding binding;
        const ActionSchema* s = nullptr;
        bind_action(action, ctx, &s, &binding);
        state = apply_effect(state, schema->effect, binding, ctx);
        step.verdict = Verdict::Accepted;
        step.post_state = state;
      } else {
        step.verdict = Verdict::Rejected;
        step.reject_reason = result.failing_conjunct;
        step.post_state = state;
      }
    }
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

Trace replay_oracle(const WorldState& s0, const std::vector<GroundAction>& candidates,
                    const GroundingContext& ctx) {
  Trace trace;
  trace.initial = s0;
  std::vector<GroundAction> accepted_prefix;
  for (size_t t = 0; t < candidates.size(); ++t) {
    // rebuild the pre-state from scratch by re-folding the accepted prefix
    WorldState pre = s0;
    for (const GroundAction& a : accepted_prefix) {
      const ActionSchema* schema = ctx.domain().find_action(a.name);
      Binding binding;
      const ActionSchema* s = nullptr;
      bind_action(a, ctx, &s, &binding);
      pre = apply_effect(pre, schema->effect, binding, ctx);
    }
    TraceStep step;
    step.index = static_cast<int>(t) + 1;
    step.action = candidates[t];
    const ActionSchema* schema = ctx.domain().find_action(candidates[t].name);
    if (!schema) {
      step.verdict = Verdict::Rejected;
      step.reject_reason = "unknown action";
      step.post_state = pre;
    } else {
      CheckResult result = check_action(pre, candidates[t], ctx);
      if (result.satisfied) {
        Binding binding;
        const ActionSchema* s = nullptr;
        bind_action(candidates[t], ctx, &s, &binding);
        step.verdict = Verdict::Accepted;
        step.post_state = apply_effect(pre, schema->effect, binding, ctx);
        accepted_prefix.push_back(candidates[t]);
      } else {
        step.verdict = Verdict::Rejected;
        step.reject_reason = result.failing_conjunct;
        step.post_state = pre;
      }
    }
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

std::vector<GroundAction> parse_plan_text(std::string_view text, SymbolTable& symbols) {
  std::vector<Token> tokens = tokenize(text);
  std::vector<GroundAction> plan;
  size_t i = 0;
  while (tokens[i].kind != TokenKind::End) {
    if (tokens[i].kind != TokenKind::LParen)
      throw ParseError(tokens[i].pos, "expected '(' starting an action");
    ++i;
    if (tokens[i].kind != TokenKind::Symbol)
      throw ParseError(tokens[i].pos, "expected action name");
    GroundAction action{symbols.intern(tokens[i].text), {}};
    ++i;
    while (tokens[i].kind == TokenKind::Symbol) {
      action.args.push_back(symbols.intern(tokens[i].text));
      ++i;
    }
    if (tokens[i].kind != TokenKind::RParen)
      throw ParseError(tokens[i].pos, "expected ')' closing the action");
    ++i;
    plan.push_back(std::move(action));
  }
  return plan;
}

std::string print_atom(const GroundAtom& atom, const SymbolTable& symbols) {
  std::string s = "(" + symbols.name(atom.pred);
  for (SymbolId arg : atom.args) s += " " + symbols.name(arg);
  return s + ")";
}

std::string print_action(const GroundAction& action, const SymbolTable& symbols) {
  std::string s = "(" + symbols.name(action.name);
  for (SymbolId arg : action.args) s += " " + symbols.name(arg);
  return s + ")";
}

std::string render_state(const WorldState& state, const SymbolTable& symbols) {
  std::vector<std::string> atoms;
  atoms.reserve(state.size());
  for (const GroundAtom& a : state) atoms.push_back(print_atom(a, symbols));
  std::sort(atoms.begin(), atoms.end());
  std::string line = "STATE";
  for (const std::string& a : atoms) line += " " + a;
  return line;
}

std::string render_trace(const Trace& trace, const SymbolTable& symbols) {
  std::ostringstream os;
  os << "STEP 0\n" << render_state(trace.initial, symbols) << "\n";
  for (const TraceStep& step : trace.steps) {
    os << "STEP " << step.index << " ACTION " << print_action(step.action, symbols);
    if (step.verdict == Verdict::Accepted) {
      os << " ACCEPTED";
    } else {
      os << " REJECTED " << step.reject_reason;
    }
    os << "\n" << render_state(step.post_state, symbols) << "\n";
  }
  return os.str();
}

}  // namespace tomtrace
