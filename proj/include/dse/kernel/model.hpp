#pragma once

// Typed AST for Event-B-style projects.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dse::kernel {

struct Span {
  int file = -1;
  int line = 0;
  int column = 0;
  int offset = 0;
  int length = 0;

  bool valid() const { return file >= 0 && line > 0; }
};

struct Type {
  enum class Kind { Integer, Boolean, Carrier, Pair, Set };

  Kind kind = Kind::Integer;
  std::string carrier;
  std::vector<Type> args;

  static Type integer() { return {Kind::Integer, {}, {}}; }
  static Type boolean() { return {Kind::Boolean, {}, {}}; }
  static Type carrierOf(std::string name) { return {Kind::Carrier, std::move(name), {}}; }
  static Type pair(Type a, Type b) { return {Kind::Pair, {}, {std::move(a), std::move(b)}}; }
  static Type setOf(Type t) { return {Kind::Set, {}, {std::move(t)}}; }

  bool isSet() const { return kind == Kind::Set; }
  bool isRelation() const { return kind == Kind::Set && args[0].kind == Kind::Pair; }
  const Type& element() const { return args.at(0); }

  bool operator==(const Type&) const = default;
};

std::string toString(const Type& t);

enum class Op {
  IntLit,
  BoolLit,
  Atom,
  Ident,
  Maplet,
  SetLit,
  Union,
  SetMinus,
  In,
  NotIn,
  Apply,
  Dom,
  Override,
  Card,
  Sigma,
  Add,
  Sub,
  Neg,
  Not,
  And,
  Or,
  Implies,
  Eq,
  Neq,
  Lt,
  Le,
  Gt,
  Ge,
};

enum class IdentKind { Unresolved, Variable, Constant, Parameter };

struct Expr {
  Op op = Op::IntLit;
  std::string name;  // identifier or atom
  IdentKind identKind = IdentKind::Unresolved;
  std::int64_t intValue = 0;
  bool boolValue = false;
  std::vector<Expr> args;
  Span span;

  static Expr intLit(std::int64_t v);
  static Expr boolLit(bool v);
  static Expr atom(std::string n);
  static Expr ident(std::string n, IdentKind k = IdentKind::Unresolved);
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);
  static Expr setLit(std::vector<Expr> elems);

  bool isIdent(std::string_view n) const { return op == Op::Ident && name == n; }

  // Structural equality; spans are ignored.
  friend bool operator==(const Expr& a, const Expr& b);
};

const char* opName(Op op);
bool isPredicateOp(Op op);

struct Labeled {
  std::string label;
  Expr expr;
  bool operator==(const Labeled&) const = default;
};

struct Parameter {
  std::string name;
  Type type;
  Span span;  // of the declared type
  bool operator==(const Parameter& o) const { return name == o.name && type == o.type; }
};

// `target := rhs`, or the point update `target(index) := rhs` when index is set.
struct Action {
  std::string label;
  std::string target;
  std::optional<Expr> index;
  Expr rhs;
  Span span;

  bool isPointUpdate() const { return index.has_value(); }
  friend bool operator==(const Action& a, const Action& b) {
    return a.label == b.label && a.target == b.target && a.index == b.index && a.rhs == b.rhs;
  }
};

struct Event {
  std::string name;
  std::vector<Parameter> parameters;
  std::vector<Labeled> guards;
  std::vector<Action> actions;
  std::vector<Labeled> witnesses;
  Span span;

  const Parameter* findParameter(std::string_view n) const;
  friend bool operator==(const Event& a, const Event& b) {
    return a.name == b.name && a.parameters == b.parameters && a.guards == b.guards &&
           a.actions == b.actions && a.witnesses == b.witnesses;
  }
};

struct Variable {
  std::string name;
  Type type;
  bool functional = false;  // partial function: set-of(pair) with unique first components
  Span span;                // of the declared type
  bool operator==(const Variable& o) const {
    return name == o.name && type == o.type && functional == o.functional;
  }
};

struct Invariant {
  std::string label;
  Expr expr;
  bool userGiven = true;
  bool operator==(const Invariant&) const = default;
};

struct Machine {
  std::string name;
  std::optional<std::string> refines;
  std::vector<std::string> sees;
  std::vector<Variable> variables;
  std::vector<Invariant> invariants;
  Event initialisation;
  std::vector<Event> events;
  Span span;

  const Variable* findVariable(std::string_view n) const;
  Variable* findVariable(std::string_view n);
  const Event* findEvent(std::string_view n) const;
  Event* findEvent(std::string_view n);

  friend bool operator==(const Machine& a, const Machine& b) {
    return a.name == b.name && a.refines == b.refines && a.sees == b.sees &&
           a.variables == b.variables && a.invariants == b.invariants &&
           a.initialisation == b.initialisation && a.events == b.events;
  }
};

struct CarrierSet {
  std::string name;
  std::vector<std::string> elements;
  bool operator==(const CarrierSet&) const = default;
};

struct Constant {
  std::string name;
  Type type;
  Expr value;  // ground
  Span span;   // of the declared type
  bool operator==(const Constant& o) const { return name == o.name && type == o.type && value == o.value; }
};

struct Context {
  std::string name;
  std::vector<CarrierSet> sets;
  std::vector<Constant> constants;
  Span span;

  friend bool operator==(const Context& a, const Context& b) {
    return a.name == b.name && a.sets == b.sets && a.constants == b.constants;
  }
};

struct Project {
  std::vector<Context> contexts;
  std::vector<Machine> machines;
  std::string root;

  const Machine* findMachine(std::string_view n) const;
  Machine* findMachine(std::string_view n);
  const Context* findContext(std::string_view n) const;
  const Machine& rootMachine() const;
  Machine& rootMachine();

  // Carrier that declares the atom, searching contexts seen by `m`.
  const CarrierSet* carrierOfAtom(const Machine& m, std::string_view atom) const;
  const CarrierSet* findCarrier(const Machine& m, std::string_view name) const;
  const Constant* findConstant(const Machine& m, std::string_view name) const;

  bool operator==(const Project&) const = default;
};

}  // namespace dse::kernel
