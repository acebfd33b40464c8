#include "dse/surface/surface.hpp"

namespace dse::surface {

using namespace dse::kernel;

namespace {

int level(const Expr& e) {
  switch (e.op) {
    case Op::Implies: return 1;
    case Op::Or: return 2;
    case Op::And: return 3;
    case Op::Not: return 4;
    case Op::Eq:
    case Op::Neq:
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
    case Op::In:
    case Op::NotIn:
      return 5;
    case Op::Union:
    case Op::SetMinus:
    case Op::Override:
      return 6;
    case Op::Add:
    case Op::Sub:
      return 7;
    case Op::Neg:
      return 8;
    case Op::IntLit:
      return e.intValue < 0 ? 8 : 9;
    default:
      return 9;
  }
}

const char* symbol(Op op) {
  switch (op) {
    case Op::Implies: return " => ";
    case Op::Or: return " or ";
    case Op::And: return " & ";
    case Op::Eq: return " = ";
    case Op::Neq: return " /= ";
    case Op::Lt: return " < ";
    case Op::Le: return " <= ";
    case Op::Gt: return " > ";
    case Op::Ge: return " >= ";
    case Op::In: return " : ";
    case Op::NotIn: return " /: ";
    case Op::Union: return " \\/ ";
    case Op::SetMinus: return " \\ ";
    case Op::Override: return " <+ ";
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    default: return " ? ";
  }
}

void flattenLeft(const Expr& e, std::vector<const Expr*>& out) {
  if (e.op == Op::Maplet) {
    flattenLeft(e.args[0], out);
    out.push_back(&e.args[1]);
  } else {
    out.push_back(&e);
  }
}

std::string print(const Expr& e, int minLevel);

std::string list(const std::vector<const Expr*>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += print(*xs[i], 0);
  }
  return out;
}

std::string printRaw(const Expr& e) {
  switch (e.op) {
    case Op::IntLit: return std::to_string(e.intValue);
    case Op::BoolLit: return e.boolValue ? "TRUE" : "FALSE";
    case Op::Atom:
    case Op::Ident: return e.name;
    case Op::Maplet: return "(" + print(e.args[0], 0) + ", " + print(e.args[1], 0) + ")";
    case Op::SetLit: {
      std::vector<const Expr*> xs;
      for (auto& a : e.args) xs.push_back(&a);
      return "{" + list(xs) + "}";
    }
    case Op::Apply: {
      std::vector<const Expr*> xs;
      if (e.args[1].op == Op::Maplet)
        flattenLeft(e.args[1], xs);
      else
        xs.push_back(&e.args[1]);
      return print(e.args[0], 9) + "(" + list(xs) + ")";
    }
    case Op::Dom: return "dom(" + print(e.args[0], 0) + ")";
    case Op::Card: return "card(" + print(e.args[0], 0) + ")";
    case Op::Sigma: return "SIGMA(" + print(e.args[0], 0) + ")";
    case Op::Neg:
      if (e.args[0].op == Op::IntLit) return "-(" + print(e.args[0], 0) + ")";
      return "-" + print(e.args[0], 8);
    case Op::Not: return "not " + print(e.args[0], 4);
    case Op::Implies: return print(e.args[0], 2) + symbol(e.op) + print(e.args[1], 1);
    default: {
      int l = level(e);
      int lhsMin = l == 5 ? 6 : l;
      return print(e.args[0], lhsMin) + symbol(e.op) + print(e.args[1], l + 1);
    }
  }
}

std::string print(const Expr& e, int minLevel) {
  auto s = printRaw(e);
  return level(e) < minLevel ? "(" + s + ")" : s;
}

std::string typeText(const Type& t) { return toString(t); }

std::string variableType(const Variable& v) {
  if (v.functional && v.type.isRelation()) {
    auto side = [](const Type& t) {
      return t.kind == Type::Kind::Pair ? "(" + toString(t) + ")" : toString(t);
    };
    return side(v.type.element().args[0]) + " +-> " + side(v.type.element().args[1]);
  }
  return typeText(v.type);
}

void renderEvent(const Event& e, bool init, std::string& out) {
  out += init ? "initialisation\n" : "event " + e.name + "\n";
  if (!e.parameters.empty()) {
    out += "  any ";
    for (std::size_t i = 0; i < e.parameters.size(); ++i) {
      if (i) out += ", ";
      out += e.parameters[i].name + " : " + typeText(e.parameters[i].type);
    }
    out += "\n";
  }
  auto section = [&](const char* kw, const std::vector<Labeled>& xs) {
    if (xs.empty()) return;
    out += std::string("  ") + kw + "\n";
    for (auto& x : xs) out += "    " + x.label + ": " + renderExpr(x.expr) + "\n";
  };
  section("when", e.guards);
  section("with", e.witnesses);
  if (!e.actions.empty()) {
    out += "  then\n";
    for (auto& a : e.actions) {
      out += "    " + a.label + ": " + a.target;
      if (a.index) out += "(" + renderExpr(*a.index) + ")";
      out += " := " + renderExpr(a.rhs) + "\n";
    }
  }
  out += "  end\n";
}

}  // namespace

std::string renderExpr(const Expr& e) { return print(e, 0); }
std::string renderType(const Type& t) { return typeText(t); }

std::vector<SourceUnit> render(const Project& project) {
  std::vector<SourceUnit> units;
  for (auto& c : project.contexts) {
    std::string out = "context " + c.name + "\n";
    if (!c.sets.empty()) {
      out += "sets\n";
      for (auto& s : c.sets) {
        out += "  " + s.name + " = {";
        for (std::size_t i = 0; i < s.elements.size(); ++i) out += (i ? ", " : "") + s.elements[i];
        out += "}\n";
      }
    }
    if (!c.constants.empty()) {
      out += "constants\n";
      for (auto& k : c.constants) out += "  " + k.name + " : " + typeText(k.type) + " = " + renderExpr(k.value) + "\n";
    }
    out += "end\n";
    units.push_back({c.name + ".ebm", std::move(out)});
  }
  for (auto& m : project.machines) {
    std::string out = "machine " + m.name;
    if (m.refines) out += " refines " + *m.refines;
    if (!m.sees.empty()) {
      out += " sees ";
      for (std::size_t i = 0; i < m.sees.size(); ++i) out += (i ? ", " : "") + m.sees[i];
    }
    out += "\n";
    if (!m.variables.empty()) {
      out += "variables\n";
      for (auto& v : m.variables) out += "  " + v.name + " : " + variableType(v) + "\n";
    }
    if (!m.invariants.empty()) {
      out += "invariants\n";
      for (auto& i : m.invariants)
        out += std::string("  ") + (i.userGiven ? "" : "derived ") + i.label + ": " + renderExpr(i.expr) + "\n";
    }
    renderEvent(m.initialisation, true, out);
    for (auto& e : m.events) renderEvent(e, false, out);
    out += "end\n";
    units.push_back({m.name + ".ebm", std::move(out)});
  }
  return units;
}

}  // namespace dse::surface
