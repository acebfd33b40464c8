#include "dse/kernel/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace dse::kernel {

std::string toString(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Integer: return "INT";
    case Type::Kind::Boolean: return "BOOL";
    case Type::Kind::Carrier: return t.carrier;
    case Type::Kind::Pair: {
      auto lhs = toString(t.args[0]);
      if (t.args[0].kind == Type::Kind::Pair) lhs = "(" + lhs + ")";
      auto rhs = toString(t.args[1]);
      if (t.args[1].kind == Type::Kind::Pair) rhs = "(" + rhs + ")";
      return lhs + " * " + rhs;
    }
    case Type::Kind::Set: return "POW(" + toString(t.args[0]) + ")";
  }
  return "?";
}

Expr Expr::intLit(std::int64_t v) {
  Expr e;
  e.op = Op::IntLit;
  e.intValue = v;
  return e;
}

Expr Expr::boolLit(bool v) {
  Expr e;
  e.op = Op::BoolLit;
  e.boolValue = v;
  return e;
}

Expr Expr::atom(std::string n) {
  Expr e;
  e.op = Op::Atom;
  e.name = std::move(n);
  return e;
}

Expr Expr::ident(std::string n, IdentKind k) {
  Expr e;
  e.op = Op::Ident;
  e.name = std::move(n);
  e.identKind = k;
  return e;
}

Expr Expr::unary(Op op, Expr a) {
  Expr e;
  e.op = op;
  e.args.push_back(std::move(a));
  return e;
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  Expr e;
  e.op = op;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  return e;
}

Expr Expr::setLit(std::vector<Expr> elems) {
  Expr e;
  e.op = Op::SetLit;
  e.args = std::move(elems);
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::IntLit: return a.intValue == b.intValue;
    case Op::BoolLit: return a.boolValue == b.boolValue;
    case Op::Atom: return a.name == b.name;
    case Op::Ident: return a.name == b.name && a.identKind == b.identKind;
    default: return a.args == b.args;
  }
}

const char* opName(Op op) {
  switch (op) {
    case Op::IntLit: return "int";
    case Op::BoolLit: return "bool";
    case Op::Atom: return "atom";
    case Op::Ident: return "ident";
    case Op::Maplet: return "maplet";
    case Op::SetLit: return "set";
    case Op::Union: return "union";
    case Op::SetMinus: return "minus";
    case Op::In: return "in";
    case Op::NotIn: return "notin";
    case Op::Apply: return "apply";
    case Op::Dom: return "dom";
    case Op::Override: return "override";
    case Op::Card: return "card";
    case Op::Sigma: return "sigma";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Neg: return "neg";
    case Op::Not: return "not";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Implies: return "implies";
    case Op::Eq: return "eq";
    case Op::Neq: return "neq";
    case Op::Lt: return "lt";
    case Op::Le: return "le";
    case Op::Gt: return "gt";
    case Op::Ge: return "ge";
  }
  return "?";
}

bool isPredicateOp(Op op) {
  switch (op) {
    case Op::In:
    case Op::NotIn:
    case Op::Not:
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Eq:
    case Op::Neq:
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
      return true;
    default:
      return false;
  }
}

const Parameter* Event::findParameter(std::string_view n) const {
  auto it = std::find_if(parameters.begin(), parameters.end(), [&](auto& p) { return p.name == n; });
  return it == parameters.end() ? nullptr : &*it;
}

const Variable* Machine::findVariable(std::string_view n) const {
  auto it = std::find_if(variables.begin(), variables.end(), [&](auto& v) { return v.name == n; });
  return it == variables.end() ? nullptr : &*it;
}

Variable* Machine::findVariable(std::string_view n) {
  auto it = std::find_if(variables.begin(), variables.end(), [&](auto& v) { return v.name == n; });
  return it == variables.end() ? nullptr : &*it;
}

const Event* Machine::findEvent(std::string_view n) const {
  auto it = std::find_if(events.begin(), events.end(), [&](auto& e) { return e.name == n; });
  return it == events.end() ? nullptr : &*it;
}

Event* Machine::findEvent(std::string_view n) {
  auto it = std::find_if(events.begin(), events.end(), [&](auto& e) { return e.name == n; });
  return it == events.end() ? nullptr : &*it;
}

const Machine* Project::findMachine(std::string_view n) const {
  auto it = std::find_if(machines.begin(), machines.end(), [&](auto& m) { return m.name == n; });
  return it == machines.end() ? nullptr : &*it;
}

Machine* Project::findMachine(std::string_view n) {
  auto it = std::find_if(machines.begin(), machines.end(), [&](auto& m) { return m.name == n; });
  return it == machines.end() ? nullptr : &*it;
}

const Context* Project::findContext(std::string_view n) const {
  auto it = std::find_if(contexts.begin(), contexts.end(), [&](auto& c) { return c.name == n; });
  return it == contexts.end() ? nullptr : &*it;
}

const Machine& Project::rootMachine() const {
  if (auto* m = findMachine(root)) return *m;
  throw std::logic_error("root machine '" + root + "' not found");
}

Machine& Project::rootMachine() {
  if (auto* m = findMachine(root)) return *m;
  throw std::logic_error("root machine '" + root + "' not found");
}

const CarrierSet* Project::carrierOfAtom(const Machine& m, std::string_view atom) const {
  for (auto& cn : m.sees) {
    if (auto* c = findContext(cn)) {
      for (auto& s : c->sets) {
        if (std::find(s.elements.begin(), s.elements.end(), atom) != s.elements.end()) return &s;
      }
    }
  }
  return nullptr;
}

const CarrierSet* Project::findCarrier(const Machine& m, std::string_view name) const {
  for (auto& cn : m.sees) {
    if (auto* c = findContext(cn)) {
      for (auto& s : c->sets)
        if (s.name == name) return &s;
    }
  }
  return nullptr;
}

const Constant* Project::findConstant(const Machine& m, std::string_view name) const {
  for (auto& cn : m.sees) {
    if (auto* c = findContext(cn)) {
      for (auto& k : c->constants)
        if (k.name == name) return &k;
    }
  }
  return nullptr;
}

}  // namespace dse::kernel
