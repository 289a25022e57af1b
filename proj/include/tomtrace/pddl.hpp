#pragma once

// PDDL subset: typed symbols, negative preconditions, equality, or/exists/forall
// in preconditions, nested forall/when in effects.

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tomtrace {

using SymbolId = int32_t;

// Interned lowercase identifiers. Input is case-insensitive; the printed
// form is always lowercase. Interning is guarded by a mutex so problems
// sharing a domain's table can be parsed from several threads.
class SymbolTable {
 public:
  SymbolId intern(std::string_view spelling);
  const std::string& name(SymbolId id) const;
  std::optional<SymbolId> lookup(std::string_view spelling) const;
  size_t size() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> names_;  // stable addresses
  std::map<std::string, SymbolId> index_;
};

struct SourcePos {
  int line = 0;
  int column = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePos pos, const std::string& msg)
      : std::runtime_error("line " + std::to_string(pos.line) + ", column " +
                           std::to_string(pos.column) + ": " + msg),
        pos(pos),
        message(msg) {}
  SourcePos pos;
  std::string message;
};

enum class TokenKind { LParen, RParen, Symbol, Keyword, Variable, String, End };

struct Token {
  TokenKind kind;
  std::string text;  // symbol spelling (original case), keyword/variable without sigil
  SourcePos pos;
};

// S-expression tokens; semicolon comments run to end of line.
std::vector<Token> tokenize(std::string_view text);

// Single-parent type hierarchy rooted at object. The four domain types
// (agent, loc, obj, utterance) plus room/container under loc are built in.
class TypeTree {
 public:
  void add(SymbolId type, SymbolId parent);
  bool contains(SymbolId type) const;
  bool is_subtype(SymbolId type, SymbolId ancestor) const;
  SymbolId parent(SymbolId type) const;
  std::vector<SymbolId> types_in_order() const { return order_; }

 private:
  std::map<SymbolId, SymbolId> parent_;
  std::vector<SymbolId> order_;
};

struct TypedVar {
  SymbolId var;   // interned with leading '?'
  SymbolId type;
};

struct PredicateDecl {
  SymbolId name;
  std::vector<TypedVar> params;
};

struct Term {
  bool is_variable;
  SymbolId sym;
  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;
};

struct Formula {
  enum class Kind { Atom, Equality, Not, And, Or, Exists, Forall };
  Kind kind;
  SymbolId pred = -1;              // Atom
  std::vector<Term> terms;         // Atom args, Equality pair
  std::vector<TypedVar> vars;      // Exists/Forall
  std::vector<Formula> children;   // Not (1), And/Or (n), quantifier body (1)
};

struct Effect {
  enum class Kind { Add, Del, ForallWhen, Conjunction };
  Kind kind;
  SymbolId pred = -1;              // Add/Del
  std::vector<Term> terms;
  std::vector<TypedVar> vars;      // ForallWhen
  std::optional<Formula> condition;
  std::vector<Effect> body;        // ForallWhen body / Conjunction members
};

struct ActionSchema {
  SymbolId name;
  std::vector<TypedVar> params;
  Formula precondition;
  Effect effect;
};

struct DomainDef {
  SymbolId name;
  std::shared_ptr<SymbolTable> symbols;
  TypeTree types;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> actions;

  // built-in type ids, resolved at construction
  SymbolId t_object, t_agent, t_loc, t_obj, t_utterance, t_room, t_container;

  const PredicateDecl* find_predicate(SymbolId name) const;
  const ActionSchema* find_action(SymbolId name) const;
};

struct InitAtom {
  SymbolId pred;
  std::vector<SymbolId> args;
  friend bool operator==(const InitAtom&, const InitAtom&) = default;
  friend auto operator<=>(const InitAtom&, const InitAtom&) = default;
};

struct ProblemDef {
  SymbolId name;
  std::shared_ptr<SymbolTable> symbols;
  std::vector<std::pair<SymbolId, SymbolId>> objects;  // (name, type), declaration order
  std::set<InitAtom> init;
  std::map<SymbolId, std::string> utterance_texts;

  std::optional<SymbolId> type_of(SymbolId object) const;
  bool operator==(const ProblemDef& other) const;
};

DomainDef parse_domain(const std::vector<Token>& tokens,
                       std::shared_ptr<SymbolTable> symbols = nullptr);
ProblemDef parse_problem(const std::vector<Token>& tokens, const DomainDef& domain);

DomainDef parse_domain_text(std::string_view text,
                            std::shared_ptr<SymbolTable> symbols = nullptr);
ProblemDef parse_problem_text(std::string_view text, const DomainDef& domain);

std::string print_canonical(const DomainDef& domain);
std::string print_canonical(const ProblemDef& problem, const DomainDef& domain);

std::string print_formula(const Formula& f, const SymbolTable& symbols);
std::string print_effect(const Effect& e, const SymbolTable& symbols);

// The predefined domain shipped with the engine: 4 object types, 7 predicates,
// 7 actions (move, open, close, grab, drop, ask, tell).
std::string_view canonical_domain_text();
DomainDef canonical_domain();

}  // namespace tomtrace
