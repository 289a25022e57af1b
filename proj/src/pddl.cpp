#include "tomtrace/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace tomtrace {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

SymbolId SymbolTable::intern(std::string_view spelling) {
  std::string key = to_lower(spelling);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  SymbolId id = static_cast<SymbolId>(names_.size());
  names_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

const std::string& SymbolTable::name(SymbolId id) const {
  std::lock_guard<std::mutex> lock(mu_);
  return names_.at(static_cast<size_t>(id));
}

std::optional<SymbolId> SymbolTable::lookup(std::string_view spelling) const {
  std::string key = to_lower(spelling);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

size_t SymbolTable::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return names_.size();
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

bool is_symbol_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
         c == '=' || c == '.' || c == '/';
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    SourcePos pos{line, col};
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') {
        advance(text[i]);
        ++i;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    if (c == '(') {
      tokens.push_back({TokenKind::LParen, "(", pos});
      advance(c);
      ++i;
      continue;
    }
    if (c == ')') {
      tokens.push_back({TokenKind::RParen, ")", pos});
      advance(c);
      ++i;
      continue;
    }
    if (c == '"') {
      advance(c);
      ++i;
      std::string value;
      bool closed = false;
      while (i < text.size()) {
        char d = text[i];
        advance(d);
        ++i;
        if (d == '\\' && i < text.size()) {
          value.push_back(text[i]);
          advance(text[i]);
          ++i;
          continue;
        }
        if (d == '"') {
          closed = true;
          break;
        }
        value.push_back(d);
      }
      if (!closed) throw ParseError(pos, "unterminated string literal");
      tokens.push_back({TokenKind::String, value, pos});
      continue;
    }
    if (c == ':' || c == '?') {
      TokenKind kind = c == ':' ? TokenKind::Keyword : TokenKind::Variable;
      advance(c);
      ++i;
      std::string name;
      while (i < text.size() && is_symbol_char(text[i])) {
        name.push_back(text[i]);
        advance(text[i]);
        ++i;
      }
      if (name.empty())
        throw ParseError(pos, std::string("dangling '") + c + "'");
      tokens.push_back({kind, name, pos});
      continue;
    }
    if (is_symbol_char(c)) {
      std::string name;
      while (i < text.size() && is_symbol_char(text[i])) {
        name.push_back(text[i]);
        advance(text[i]);
        ++i;
      }
      tokens.push_back({TokenKind::Symbol, name, pos});
      continue;
    }
    throw ParseError(pos, std::string("illegal character '") + c + "'");
  }
  tokens.push_back({TokenKind::End, "", {line, col}});
  return tokens;
}

// ---------------------------------------------------------------------------
// TypeTree

void TypeTree::add(SymbolId type, SymbolId parent) {
  auto it = parent_.find(type);
  if (it != parent_.end()) {
    if (it->second != parent) throw std::runtime_error("type redeclared with a different parent");
    return;
  }
  parent_.emplace(type, parent);
  order_.push_back(type);
}

bool TypeTree::contains(SymbolId type) const { return parent_.count(type) > 0; }

bool TypeTree::is_subtype(SymbolId type, SymbolId ancestor) const {
  SymbolId cur = type;
  while (true) {
    if (cur == ancestor) return true;
    auto it = parent_.find(cur);
    if (it == parent_.end() || it->second == cur) return false;
    cur = it->second;
  }
}

SymbolId TypeTree::parent(SymbolId type) const { return parent_.at(type); }

const PredicateDecl* DomainDef::find_predicate(SymbolId name) const {
  for (const auto& p : predicates)
    if (p.name == name) return &p;
  return nullptr;
}

const ActionSchema* DomainDef::find_action(SymbolId name) const {
  for (const auto& a : actions)
    if (a.name == name) return &a;
  return nullptr;
}

std::optional<SymbolId> ProblemDef::type_of(SymbolId object) const {
  for (const auto& [name, type] : objects)
    if (name == object) return type;
  return std::nullopt;
}

bool ProblemDef::operator==(const ProblemDef& other) const {
  return name == other.name && objects == other.objects && init == other.init &&
         utterance_texts == other.utterance_texts;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Cursor {
 public:
  explicit Cursor(const std::vector<Token>& tokens) : tokens_(tokens) {}

  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }
  bool at(TokenKind kind) const { return peek().kind == kind; }

  const Token& expect(TokenKind kind, const std::string& what) {
    if (!at(kind)) throw ParseError(peek().pos, "expected " + what + ", got '" + peek().text + "'");
    return next();
  }
  void expect_open() { expect(TokenKind::LParen, "'('"); }
  void expect_close() { expect(TokenKind::RParen, "')'"); }

  void skip_balanced() {
    // consumes the already-open form up to its matching close paren
    int depth = 1;
    while (depth > 0) {
      const Token& t = next();
      if (t.kind == TokenKind::End) throw ParseError(t.pos, "unexpected end of input");
      if (t.kind == TokenKind::LParen) ++depth;
      if (t.kind == TokenKind::RParen) --depth;
    }
  }

 private:
  const std::vector<Token>& tokens_;
  size_t pos_ = 0;
};

using Scope = std::vector<TypedVar>;

std::optional<SymbolId> scope_lookup(const Scope& scope, SymbolId var) {
  for (auto it = scope.rbegin(); it != scope.rend(); ++it)
    if (it->var == var) return it->type;
  return std::nullopt;
}

struct DomainParser {
  DomainDef& d;
  SymbolTable& sym;

  SymbolId intern_var(const std::string& name) { return sym.intern("?" + name); }

  // slot accepts term when the types are related in either direction; a
  // supertyped variable may still be bound to a matching object at runtime
  bool compatible(SymbolId term_type, SymbolId slot_type) const {
    return d.types.is_subtype(term_type, slot_type) ||
           d.types.is_subtype(slot_type, term_type);
  }

  std::vector<TypedVar> parse_typed_vars(Cursor& cur, bool allow_untyped_object) {
    // ?a ?b - type ?c - type ...
    std::vector<TypedVar> out;
    std::vector<std::pair<SymbolId, SourcePos>> pending;
    while (!cur.at(TokenKind::RParen)) {
      const Token& t = cur.next();
      if (t.kind == TokenKind::Variable) {
        pending.emplace_back(intern_var(t.text), t.pos);
      } else if (t.kind == TokenKind::Symbol && t.text == "-") {
        const Token& ty = cur.expect(TokenKind::Symbol, "type name");
        SymbolId type = sym.intern(ty.text);
        if (!d.types.contains(type)) throw ParseError(ty.pos, "unknown type '" + ty.text + "'");
        for (auto& [v, p] : pending) out.push_back({v, type});
        pending.clear();
      } else {
        throw ParseError(t.pos, "expected variable or '- type'");
      }
    }
    if (!pending.empty()) {
      if (!allow_untyped_object)
        throw ParseError(pending.front().second, "variable without a type");
      for (auto& [v, p] : pending) out.push_back({v, d.t_object});
    }
    for (size_t i = 0; i < out.size(); ++i)
      for (size_t j = i + 1; j < out.size(); ++j)
        if (out[i].var == out[j].var)
          throw ParseError(cur.peek().pos, "duplicate variable '" + sym.name(out[i].var) + "'");
    return out;
  }

  Term parse_term(Cursor& cur, const Scope& scope, SymbolId slot_type, bool strict) {
    const Token& t = cur.next();
    if (t.kind == TokenKind::Variable) {
      SymbolId v = intern_var(t.text);
      auto type = scope_lookup(scope, v);
      if (!type) throw ParseError(t.pos, "unbound variable '?" + t.text + "'");
      bool ok = strict ? d.types.is_subtype(*type, slot_type) : compatible(*type, slot_type);
      if (!ok)
        throw ParseError(t.pos, "type mismatch: '?" + t.text + "' has type '" +
                                    sym.name(*type) + "', expected '" + sym.name(slot_type) + "'");
      return {true, v};
    }
    throw ParseError(t.pos, "expected a variable, got '" + t.text + "'");
  }

  Formula parse_atom_or_eq(Cursor& cur, const Token& head, const Scope& scope, bool strict) {
    Formula f;
    if (head.text == "=") {
      f.kind = Formula::Kind::Equality;
      for (int i = 0; i < 2; ++i) f.terms.push_back(parse_term(cur, scope, d.t_object, false));
      cur.expect_close();
      return f;
    }
    f.kind = Formula::Kind::Atom;
    f.pred = sym.intern(head.text);
    const PredicateDecl* decl = d.find_predicate(f.pred);
    if (!decl) throw ParseError(head.pos, "unknown predicate '" + head.text + "'");
    for (const auto& param : decl->params) {
      if (cur.at(TokenKind::RParen))
        throw ParseError(cur.peek().pos, "arity mismatch: '" + head.text + "' expects " +
                                             std::to_string(decl->params.size()) + " arguments");
      f.terms.push_back(parse_term(cur, scope, param.type, strict));
    }
    if (!cur.at(TokenKind::RParen))
      throw ParseError(cur.peek().pos, "arity mismatch: '" + head.text + "' expects " +
                                           std::to_string(decl->params.size()) + " arguments");
    cur.expect_close();
    return f;
  }

  Formula parse_formula(Cursor& cur, Scope& scope) {
    cur.expect_open();
    const Token& head = cur.expect(TokenKind::Symbol, "formula head");
    std::string op = to_lower(head.text);
    Formula f;
    if (op == "not") {
      f.kind = Formula::Kind::Not;
      f.children.push_back(parse_formula(cur, scope));
      cur.expect_close();
    } else if (op == "and" || op == "or") {
      f.kind = op == "and" ? Formula::Kind::And : Formula::Kind::Or;
      while (!cur.at(TokenKind::RParen)) f.children.push_back(parse_formula(cur, scope));
      cur.expect_close();
    } else if (op == "exists" || op == "forall") {
      f.kind = op == "exists" ? Formula::Kind::Exists : Formula::Kind::Forall;
      cur.expect_open();
      f.vars = parse_typed_vars(cur, false);
      cur.expect_close();
      size_t base = scope.size();
      scope.insert(scope.end(), f.vars.begin(), f.vars.end());
      f.children.push_back(parse_formula(cur, scope));
      scope.resize(base);
      cur.expect_close();
    } else {
      return parse_atom_or_eq(cur, head, scope, /*strict=*/false);
    }
    return f;
  }

  Effect parse_effect(Cursor& cur, Scope& scope) {
    cur.expect_open();
    const Token& head = cur.expect(TokenKind::Symbol, "effect head");
    std::string op = to_lower(head.text);
    Effect e;
    if (op == "and") {
      e.kind = Effect::Kind::Conjunction;
      while (!cur.at(TokenKind::RParen)) e.body.push_back(parse_effect(cur, scope));
      cur.expect_close();
      return e;
    }
    if (op == "not") {
      e.kind = Effect::Kind::Del;
      cur.expect_open();
      const Token& inner = cur.expect(TokenKind::Symbol, "predicate name");
      Formula atom = parse_atom_or_eq(cur, inner, scope, /*strict=*/true);
      if (atom.kind != Formula::Kind::Atom)
        throw ParseError(inner.pos, "only atoms may be deleted");
      e.pred = atom.pred;
      e.terms = atom.terms;
      cur.expect_close();
      return e;
    }
    if (op == "forall" || op == "when") {
      e.kind = Effect::Kind::ForallWhen;
      if (op == "forall") {
        cur.expect_open();
        e.vars = parse_typed_vars(cur, false);
        cur.expect_close();
        size_t base = scope.size();
        scope.insert(scope.end(), e.vars.begin(), e.vars.end());
        cur.expect_open();
        cur.expect(TokenKind::Symbol, "'when'");  // (forall (...) (when c e))
        parse_when_tail(cur, scope, e);
        scope.resize(base);
        cur.expect_close();
      } else {
        parse_when_tail(cur, scope, e);
      }
      return e;
    }
    // plain add atom
    Formula atom = parse_atom_or_eq(cur, head, scope, /*strict=*/true);
    if (atom.kind != Formula::Kind::Atom) throw ParseError(head.pos, "equality is not an effect");
    e.kind = Effect::Kind::Add;
    e.pred = atom.pred;
    e.terms = atom.terms;
    return e;
  }

  void parse_when_tail(Cursor& cur, Scope& scope, Effect& e) {
    e.condition = parse_formula(cur, scope);
    Effect body = parse_effect(cur, scope);
    if (body.kind == Effect::Kind::Conjunction)
      e.body = std::move(body.body);
    else
      e.body.push_back(std::move(body));
    cur.expect_close();
  }

  void parse_types_section(Cursor& cur) {
    std::vector<SymbolId> pending;
    while (!cur.at(TokenKind::RParen)) {
      const Token& t = cur.expect(TokenKind::Symbol, "type name");
      if (t.text == "-") {
        const Token& p = cur.expect(TokenKind::Symbol, "parent type");
        SymbolId parent = sym.intern(p.text);
        if (!d.types.contains(parent))
          throw ParseError(p.pos, "unknown type '" + p.text + "'");
        for (SymbolId ty : pending) d.types.add(ty, parent);
        pending.clear();
      } else {
        pending.push_back(sym.intern(t.text));
      }
    }
    for (SymbolId ty : pending) d.types.add(ty, d.t_object);
    cur.expect_close();
  }

  void parse_predicates_section(Cursor& cur) {
    while (!cur.at(TokenKind::RParen)) {
      cur.expect_open();
      const Token& name = cur.expect(TokenKind::Symbol, "predicate name");
      PredicateDecl decl;
      decl.name = sym.intern(name.text);
      if (d.find_predicate(decl.name))
        throw ParseError(name.pos, "duplicate predicate '" + name.text + "'");
      decl.params = parse_typed_vars(cur, true);
      cur.expect_close();
      d.predicates.push_back(std::move(decl));
    }
    cur.expect_close();
  }

  void parse_action_section(Cursor& cur) {
    const Token& name = cur.expect(TokenKind::Symbol, "action name");
    ActionSchema schema;
    schema.name = sym.intern(name.text);
    if (d.find_action(schema.name))
      throw ParseError(name.pos, "duplicate action '" + name.text + "'");
    if (d.find_predicate(schema.name))
      throw ParseError(name.pos, "action name '" + name.text + "' collides with a predicate");
    bool have_params = false, have_pre = false, have_eff = false;
    while (!cur.at(TokenKind::RParen)) {
      const Token& kw = cur.expect(TokenKind::Keyword, "action keyword");
      std::string key = to_lower(kw.text);
      if (key == "parameters") {
        cur.expect_open();
        schema.params = parse_typed_vars(cur, false);
        cur.expect_close();
        have_params = true;
      } else if (key == "precondition") {
        if (!have_params) throw ParseError(kw.pos, ":parameters must precede :precondition");
        Scope scope = schema.params;
        schema.precondition = parse_formula(cur, scope);
        have_pre = true;
      } else if (key == "effect") {
        if (!have_params) throw ParseError(kw.pos, ":parameters must precede :effect");
        Scope scope = schema.params;
        schema.effect = parse_effect(cur, scope);
        have_eff = true;
      } else {
        throw ParseError(kw.pos, "unknown action keyword ':" + kw.text + "'");
      }
    }
    cur.expect_close();
    if (!have_params || !have_pre || !have_eff)
      throw ParseError(name.pos, "action '" + name.text +
                                     "' needs :parameters, :precondition and :effect");
    d.actions.push_back(std::move(schema));
  }
};

void install_builtin_types(DomainDef& d, SymbolTable& sym) {
  d.t_object = sym.intern("object");
  d.t_agent = sym.intern("agent");
  d.t_loc = sym.intern("loc");
  d.t_obj = sym.intern("obj");
  d.t_utterance = sym.intern("utterance");
  d.t_room = sym.intern("room");
  d.t_container = sym.intern("container");
  d.types.add(d.t_object, d.t_object);
  d.types.add(d.t_agent, d.t_object);
  d.types.add(d.t_loc, d.t_object);
  d.types.add(d.t_obj, d.t_object);
  d.types.add(d.t_utterance, d.t_object);
  d.types.add(d.t_room, d.t_loc);
  d.types.add(d.t_container, d.t_loc);
}

}  // namespace

DomainDef parse_domain(const std::vector<Token>& tokens,
                       std::shared_ptr<SymbolTable> symbols) {
  DomainDef d;
  d.symbols = symbols ? std::move(symbols) : std::make_shared<SymbolTable>();
  SymbolTable& sym = *d.symbols;
  install_builtin_types(d, sym);

  Cursor cur(tokens);
  cur.expect_open();
  const Token& define = cur.expect(TokenKind::Symbol, "'define'");
  if (to_lower(define.text) != "define") throw ParseError(define.pos, "expected 'define'");
  cur.expect_open();
  const Token& kind = cur.expect(TokenKind::Symbol, "'domain'");
  if (to_lower(kind.text) != "domain") throw ParseError(kind.pos, "expected '(domain name)'");
  d.name = sym.intern(cur.expect(TokenKind::Symbol, "domain name").text);
  cur.expect_close();

  DomainParser p{d, sym};
  while (!cur.at(TokenKind::RParen)) {
    cur.expect_open();
    const Token& kw = cur.expect(TokenKind::Keyword, "section keyword");
    std::string key = to_lower(kw.text);
    if (key == "requirements") {
      cur.skip_balanced();  // flags carry no information here
    } else if (key == "types") {
      p.parse_types_section(cur);
    } else if (key == "predicates") {
      p.parse_predicates_section(cur);
    } else if (key == "action") {
      p.parse_action_section(cur);
    } else {
      throw ParseError(kw.pos, "unknown section ':" + kw.text + "'");
    }
  }
  cur.expect_close();
  cur.expect(TokenKind::End, "end of input");
  return d;
}

ProblemDef parse_problem(const std::vector<Token>& tokens, const DomainDef& domain) {
  ProblemDef prob;
  prob.symbols = domain.symbols;
  SymbolTable& sym = *prob.symbols;

  Cursor cur(tokens);
  cur.expect_open();
  const Token& define = cur.expect(TokenKind::Symbol, "'define'");
  if (to_lower(define.text) != "define") throw ParseError(define.pos, "expected 'define'");
  cur.expect_open();
  const Token& kind = cur.expect(TokenKind::Symbol, "'problem'");
  if (to_lower(kind.text) != "problem") throw ParseError(kind.pos, "expected '(problem name)'");
  prob.name = sym.intern(cur.expect(TokenKind::Symbol, "problem name").text);
  cur.expect_close();

  bool have_objects = false, have_init = false;
  while (!cur.at(TokenKind::RParen)) {
    cur.expect_open();
    const Token& kw = cur.expect(TokenKind::Keyword, "section keyword");
    std::string key = to_lower(kw.text);
    if (key == "domain") {
      cur.skip_balanced();
    } else if (key == "objects") {
      std::vector<std::pair<SymbolId, SourcePos>> pending;
      while (!cur.at(TokenKind::RParen)) {
        const Token& t = cur.expect(TokenKind::Symbol, "object name");
        if (t.text == "-") {
          const Token& ty = cur.expect(TokenKind::Symbol, "type name");
          SymbolId type = sym.intern(ty.text);
          if (!domain.types.contains(type))
            throw ParseError(ty.pos, "unknown type '" + ty.text + "'");
          for (auto& [name, pos] : pending) {
            if (prob.type_of(name))
              throw ParseError(pos, "duplicate object '" + sym.name(name) + "'");
            prob.objects.emplace_back(name, type);
          }
          pending.clear();
        } else {
          pending.emplace_back(sym.intern(t.text), t.pos);
        }
      }
      if (!pending.empty())
        throw ParseError(pending.front().second, "object without a type");
      cur.expect_close();
      have_objects = true;
    } else if (key == "init") {
      while (!cur.at(TokenKind::RParen)) {
        cur.expect_open();
        const Token& head = cur.expect(TokenKind::Symbol, "predicate name");
        if (to_lower(head.text) == "not")
          throw ParseError(head.pos, "negative literal in init");
        InitAtom atom;
        atom.pred = sym.intern(head.text);
        const PredicateDecl* decl = domain.find_predicate(atom.pred);
        if (!decl) throw ParseError(head.pos, "unknown predicate '" + head.text + "'");
        while (!cur.at(TokenKind::RParen)) {
          const Token& arg = cur.expect(TokenKind::Symbol, "object name");
          SymbolId obj = sym.intern(arg.text);
          auto type = prob.type_of(obj);
          if (!type) throw ParseError(arg.pos, "undeclared object '" + arg.text + "'");
          size_t slot = atom.args.size();
          if (slot >= decl->params.size())
            throw ParseError(arg.pos, "arity mismatch: '" + head.text + "' expects " +
                                          std::to_string(decl->params.size()) + " arguments");
          if (!domain.types.is_subtype(*type, decl->params[slot].type))
            throw ParseError(arg.pos, "type mismatch: " + head.text + " expects " +
                                          sym.name(decl->params[slot].type));
          atom.args.push_back(obj);
        }
        if (atom.args.size() != decl->params.size())
          throw ParseError(cur.peek().pos, "arity mismatch: '" + head.text + "' expects " +
                                               std::to_string(decl->params.size()) +
                                               " arguments");
        cur.expect_close();
        prob.init.insert(std::move(atom));
      }
      cur.expect_close();
      have_init = true;
    } else if (key == "utterances") {
      while (!cur.at(TokenKind::RParen)) {
        cur.expect_open();
        const Token& name = cur.expect(TokenKind::Symbol, "utterance name");
        SymbolId u = sym.intern(name.text);
        auto type = prob.type_of(u);
        if (!type || !domain.types.is_subtype(*type, domain.t_utterance))
          throw ParseError(name.pos, "'" + name.text + "' is not a declared utterance");
        const Token& text = cur.expect(TokenKind::String, "utterance text");
        prob.utterance_texts[u] = text.text;
        cur.expect_close();
      }
      cur.expect_close();
    } else {
      throw ParseError(kw.pos, "unknown section ':" + kw.text + "'");
    }
  }
  cur.expect_close();
  cur.expect(TokenKind::End, "end of input");
  if (!have_objects) throw ParseError({1, 1}, "missing :objects section");
  if (!have_init) throw ParseError({1, 1}, "missing :init section");
  return prob;
}

DomainDef parse_domain_text(std::string_view text, std::shared_ptr<SymbolTable> symbols) {
  return parse_domain(tokenize(text), std::move(symbols));
}

ProblemDef parse_problem_text(std::string_view text, const DomainDef& domain) {
  return parse_problem(tokenize(text), domain);
}

// ---------------------------------------------------------------------------
// Canonical printing

namespace {

void print_typed_vars(std::ostringstream& os, const std::vector<TypedVar>& vars,
                      const SymbolTable& sym) {
  for (size_t i = 0; i < vars.size(); ++i) {
    if (i) os << ' ';
    os << sym.name(vars[i].var) << " - " << sym.name(vars[i].type);
  }
}

void print_formula_rec(std::ostringstream& os, const Formula& f, const SymbolTable& sym) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      os << '(' << sym.name(f.pred);
      for (const Term& t : f.terms) os << ' ' << sym.name(t.sym);
      os << ')';
      break;
    case Formula::Kind::Equality:
      os << "(= " << sym.name(f.terms[0].sym) << ' ' << sym.name(f.terms[1].sym) << ')';
      break;
    case Formula::Kind::Not:
      os << "(not ";
      print_formula_rec(os, f.children[0], sym);
      os << ')';
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      os << (f.kind == Formula::Kind::And ? "(and" : "(or");
      for (const Formula& c : f.children) {
        os << ' ';
        print_formula_rec(os, c, sym);
      }
      os << ')';
      break;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      os << (f.kind == Formula::Kind::Exists ? "(exists (" : "(forall (");
      print_typed_vars(os, f.vars, sym);
      os << ") ";
      print_formula_rec(os, f.children[0], sym);
      os << ')';
      break;
  }
}

void print_effect_rec(std::ostringstream& os, const Effect& e, const SymbolTable& sym) {
  switch (e.kind) {
    case Effect::Kind::Add:
      os << '(' << sym.name(e.pred);
      for (const Term& t : e.terms) os << ' ' << sym.name(t.sym);
      os << ')';
      break;
    case Effect::Kind::Del:
      os << "(not (" << sym.name(e.pred);
      for (const Term& t : e.terms) os << ' ' << sym.name(t.sym);
      os << "))";
      break;
    case Effect::Kind::ForallWhen: {
      if (!e.vars.empty()) {
        os << "(forall (";
        print_typed_vars(os, e.vars, sym);
        os << ") ";
      }
      os << "(when ";
      print_formula_rec(os, *e.condition, sym);
      os << ' ';
      if (e.body.size() == 1) {
        print_effect_rec(os, e.body[0], sym);
      } else {
        os << "(and";
        for (const Effect& b : e.body) {
          os << ' ';
          print_effect_rec(os, b, sym);
        }
        os << ')';
      }
      os << ')';
      if (!e.vars.empty()) os << ')';
      break;
    }
    case Effect::Kind::Conjunction:
      os << "(and";
      for (const Effect& b : e.body) {
        os << ' ';
        print_effect_rec(os, b, sym);
      }
      os << ')';
      break;
  }
}

std::string quote_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string print_formula(const Formula& f, const SymbolTable& symbols) {
  std::ostringstream os;
  print_formula_rec(os, f, symbols);
  return os.str();
}

std::string print_effect(const Effect& e, const SymbolTable& symbols) {
  std::ostringstream os;
  print_effect_rec(os, e, symbols);
  return os.str();
}

std::string print_canonical(const DomainDef& domain) {
  const SymbolTable& sym = *domain.symbols;
  std::ostringstream os;
  os << "(define (domain " << sym.name(domain.name) << ")\n";
  os << "  (:types\n";
  for (SymbolId ty : domain.types.types_in_order()) {
    if (ty == domain.t_object) continue;
    os << "    " << sym.name(ty) << " - " << sym.name(domain.types.parent(ty)) << "\n";
  }
  os << "  )\n";
  os << "  (:predicates\n";
  for (const PredicateDecl& p : domain.predicates) {
    os << "    (" << sym.name(p.name);
    if (!p.params.empty()) {
      os << ' ';
      std::ostringstream tmp;
      print_typed_vars(tmp, p.params, sym);
      os << tmp.str();
    }
    os << ")\n";
  }
  os << "  )\n";
  for (const ActionSchema& a : domain.actions) {
    os << "  (:action " << sym.name(a.name) << "\n";
    os << "    :parameters (";
    std::ostringstream tmp;
    print_typed_vars(tmp, a.params, sym);
    os << tmp.str() << ")\n";
    os << "    :precondition " << print_formula(a.precondition, sym) << "\n";
    os << "    :effect " << print_effect(a.effect, sym) << "\n";
    os << "  )\n";
  }
  os << ")\n";
  return os.str();
}

std::string print_canonical(const ProblemDef& problem, const DomainDef& domain) {
  const SymbolTable& sym = *problem.symbols;
  std::ostringstream os;
  os << "(define (problem " << sym.name(problem.name) << ")\n";
  os << "  (:domain " << sym.name(domain.name) << ")\n";
  os << "  (:objects\n";
  for (const auto& [name, type] : problem.objects)
    os << "    " << sym.name(name) << " - " << sym.name(type) << "\n";
  os << "  )\n";
  os << "  (:init\n";
  std::vector<std::string> atoms;
  for (const InitAtom& a : problem.init) {
    std::string s = "(" + sym.name(a.pred);
    for (SymbolId arg : a.args) s += " " + sym.name(arg);
    s += ")";
    atoms.push_back(std::move(s));
  }
  std::sort(atoms.begin(), atoms.end());
  for (const std::string& a : atoms) os << "    " << a << "\n";
  os << "  )\n";
  if (!problem.utterance_texts.empty()) {
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& [u, text] : problem.utterance_texts)
      entries.emplace_back(sym.name(u), text);
    std::sort(entries.begin(), entries.end());
    os << "  (:utterances\n";
    for (const auto& [name, text] : entries)
      os << "    (" << name << " " << quote_string(text) << ")\n";
    os << "  )\n";
  }
  os << ")\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Predefined domain

namespace {

constexpr std::string_view kCanonicalDomain = R"PDDL(
(define (domain tom)
  (:requirements :typing :negative-preconditions :equality
                 :conditional-effects :existential-preconditions
                 :universal-preconditions)
  (:types
    agent loc obj utterance - object
    room container - loc)
  (:predicates
    (at ?a - agent ?r - room)
    (in ?o - obj ?l - loc)
    (part-of ?c - container ?r - room)
    (opened ?c - container)
    (holding ?a - agent ?o - obj)
    (seen ?a - agent ?o - obj)
    (heard ?a - agent ?u - utterance))
  (:action move
    :parameters (?a - agent ?from - room ?to - room)
    :precondition (and (at ?a ?from) (not (= ?from ?to)))
    :effect (and (not (at ?a ?from)) (at ?a ?to)
                 (forall (?o - obj)
                   (when (or (in ?o ?to)
                             (exists (?c - container)
                               (and (part-of ?c ?to) (opened ?c) (in ?o ?c))))
                     (seen ?a ?o)))))
  (:action open
    :parameters (?a - agent ?c - container ?r - room)
    :precondition (and (at ?a ?r) (part-of ?c ?r) (not (opened ?c)))
    :effect (and (opened ?c)
                 (forall (?o - obj)
                   (when (in ?o ?c)
                     (forall (?x - agent) (when (at ?x ?r) (seen ?x ?o)))))))
  (:action close
    :parameters (?a - agent ?c - container ?r - room)
    :precondition (and (at ?a ?r) (part-of ?c ?r) (opened ?c))
    :effect (not (opened ?c)))
  (:action grab
    :parameters (?a - agent ?o - obj ?l - loc ?r - room)
    :precondition (and (at ?a ?r) (in ?o ?l)
                       (not (exists (?x - agent) (holding ?x ?o)))
                       (or (= ?l ?r) (and (part-of ?l ?r) (opened ?l))))
    :effect (and (not (in ?o ?l)) (holding ?a ?o)
                 (forall (?x - agent) (when (at ?x ?r) (seen ?x ?o)))))
  (:action drop
    :parameters (?a - agent ?o - obj ?l - loc ?r - room)
    :precondition (and (at ?a ?r) (holding ?a ?o)
                       (or (= ?l ?r) (and (part-of ?l ?r) (opened ?l))))
    :effect (and (not (holding ?a ?o)) (in ?o ?l)
                 (forall (?x - agent) (when (at ?x ?r) (seen ?x ?o)))))
  (:action ask
    :parameters (?a - agent ?u - utterance ?r - room)
    :precondition (at ?a ?r)
    :effect (and (heard ?a ?u)
                 (forall (?x - agent) (when (at ?x ?r) (heard ?x ?u)))))
  (:action tell
    :parameters (?a - agent ?u - utterance ?r - room)
    :precondition (at ?a ?r)
    :effect (and (heard ?a ?u)
                 (forall (?x - agent) (when (at ?x ?r) (heard ?x ?u)))))
)
)PDDL";

}  // namespace

std::string_view canonical_domain_text() { return kCanonicalDomain; }

DomainDef canonical_domain() { return parse_domain_text(kCanonicalDomain); }

}  // namespace tomtrace
