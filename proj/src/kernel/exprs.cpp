#include "dse/kernel/exprs.hpp"

namespace dse::kernel {

void collectIdentifiers(const Expr& e, std::set<std::string>& out) {
  if (e.op == Op::Ident) out.insert(e.name);
  for (auto& a : e.args) collectIdentifiers(a, out);
}

void collectIdentifiers(const Expr& e, IdentKind kind, std::set<std::string>& out) {
  if (e.op == Op::Ident && e.identKind == kind) out.insert(e.name);
  for (auto& a : e.args) collectIdentifiers(a, kind, out);
}

std::set<std::string> variablesOf(const Expr& e) {
  std::set<std::string> out;
  collectIdentifiers(e, IdentKind::Variable, out);
  return out;
}

bool refersTo(const Expr& e, std::string_view name) {
  if (e.op == Op::Ident && e.name == name) return true;
  for (auto& a : e.args)
    if (refersTo(a, name)) return true;
  return false;
}

std::set<std::string> variablesRead(const Action& a) {
  auto out = variablesOf(a.rhs);
  if (a.index) collectIdentifiers(*a.index, IdentKind::Variable, out);
  return out;
}

Expr substitute(const Expr& e, std::string_view name, const Expr& replacement) {
  if (e.op == Op::Ident && e.name == name) return replacement;
  Expr out = e;
  for (auto& a : out.args) a = substitute(a, name, replacement);
  return out;
}

Expr renameIdentifier(const Expr& e, std::string_view from, std::string_view to) {
  Expr out = e;
  if (out.op == Op::Ident && out.name == from) out.name = std::string(to);
  for (auto& a : out.args) a = renameIdentifier(a, from, to);
  return out;
}

Expr negate(const Expr& e) {
  auto flip = [&](Op op) { return Expr::binary(op, e.args[0], e.args[1]); };
  switch (e.op) {
    case Op::Not: return e.args[0];
    case Op::BoolLit: return Expr::boolLit(!e.boolValue);
    case Op::In: return flip(Op::NotIn);
    case Op::NotIn: return flip(Op::In);
    case Op::Eq: return flip(Op::Neq);
    case Op::Neq: return flip(Op::Eq);
    case Op::Lt: return flip(Op::Ge);
    case Op::Le: return flip(Op::Gt);
    case Op::Gt: return flip(Op::Le);
    case Op::Ge: return flip(Op::Lt);
    default: return Expr::unary(Op::Not, e);
  }
}

std::vector<Expr> conjuncts(const Expr& e) {
  if (e.op != Op::And) return {e};
  auto lhs = conjuncts(e.args[0]);
  auto rhs = conjuncts(e.args[1]);
  lhs.insert(lhs.end(), rhs.begin(), rhs.end());
  return lhs;
}

Expr conjunction(const std::vector<Expr>& parts) {
  if (parts.empty()) return Expr::boolLit(true);
  Expr acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = Expr::binary(Op::And, acc, parts[i]);
  return acc;
}

void clearSpans(Expr& e) {
  e.span = {};
  for (auto& a : e.args) clearSpans(a);
}

}  // namespace dse::kernel
