#include "dse/kernel/check.hpp"

#include <map>
#include <set>

namespace dse::kernel {

const char* kindName(Diagnostic::Kind k) {
  switch (k) {
    case Diagnostic::Kind::Lex: return "lex";
    case Diagnostic::Kind::Parse: return "parse";
    case Diagnostic::Kind::Type: return "type";
    case Diagnostic::Kind::Unresolved: return "unresolved";
    case Diagnostic::Kind::Structure: return "structure";
  }
  return "?";
}

static std::string joinMessages(const std::vector<Diagnostic>& d) {
  std::string out;
  for (auto& x : d) {
    if (!out.empty()) out += "; ";
    out += x.message;
  }
  return out;
}

DiagnosticError::DiagnosticError(std::vector<Diagnostic> diags)
    : std::runtime_error(joinMessages(diags)), diags_(std::move(diags)) {}

namespace {

// A set type whose element type is unknown (the empty set literal).
Type anySet() { return Type{Type::Kind::Set, {}, {}}; }
bool isAnySet(const Type& t) { return t.kind == Type::Kind::Set && t.args.empty(); }

bool compatible(const Type& a, const Type& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Type::Kind::Carrier: return a.carrier == b.carrier;
    case Type::Kind::Pair: return compatible(a.args[0], b.args[0]) && compatible(a.args[1], b.args[1]);
    case Type::Kind::Set:
      if (isAnySet(a) || isAnySet(b)) return true;
      return compatible(a.args[0], b.args[0]);
    default: return true;
  }
}

Type unify(const Type& a, const Type& b) {
  if (isAnySet(a)) return b;
  if (isAnySet(b)) return a;
  if (a.kind == Type::Kind::Set) return Type::setOf(unify(a.args[0], b.args[0]));
  if (a.kind == Type::Kind::Pair) return Type::pair(unify(a.args[0], b.args[0]), unify(a.args[1], b.args[1]));
  return a;
}

struct Checker {
  const Project& project;
  const Machine* machine = nullptr;
  const Context* context = nullptr;  // when checking constant values
  const Event* event = nullptr;
  std::vector<Diagnostic>* diags = nullptr;

  void error(Diagnostic::Kind k, const Span& s, std::string msg) const {
    if (diags) diags->push_back({k, s, std::move(msg)});
  }

  const CarrierSet* atomCarrier(std::string_view name) const {
    if (machine) return project.carrierOfAtom(*machine, name);
    if (context)
      for (auto& s : context->sets)
        for (auto& el : s.elements)
          if (el == name) return &s;
    return nullptr;
  }

  const Constant* constant(std::string_view name) const {
    if (machine) return project.findConstant(*machine, name);
    if (context)
      for (auto& k : context->constants)
        if (k.name == name) return &k;
    return nullptr;
  }

  bool carrierDeclared(const std::string& name) const {
    if (machine) return project.findCarrier(*machine, name) != nullptr;
    if (context)
      for (auto& s : context->sets)
        if (s.name == name) return true;
    return false;
  }

  bool typeWellFormed(const Type& t, const Span& span) const {
    switch (t.kind) {
      case Type::Kind::Carrier:
        if (!carrierDeclared(t.carrier)) {
          error(Diagnostic::Kind::Unresolved, span, "unknown carrier set '" + t.carrier + "'");
          return false;
        }
        return true;
      case Type::Kind::Pair:
        return typeWellFormed(t.args[0], span) && typeWellFormed(t.args[1], span);
      case Type::Kind::Set:
        return typeWellFormed(t.args.at(0), span);
      default:
        return true;
    }
  }

  void resolve(Expr& e) const {
    if (e.op == Op::Ident) {
      if (event && event->findParameter(e.name)) {
        e.identKind = IdentKind::Parameter;
      } else if (machine && machine->findVariable(e.name)) {
        e.identKind = IdentKind::Variable;
      } else if (constant(e.name)) {
        e.identKind = IdentKind::Constant;
      } else if (atomCarrier(e.name)) {
        e.op = Op::Atom;
        e.identKind = IdentKind::Unresolved;
      } else {
        e.identKind = IdentKind::Unresolved;
        error(Diagnostic::Kind::Unresolved, e.span, "unresolved identifier '" + e.name + "'");
      }
      return;
    }
    for (auto& a : e.args) resolve(a);
  }

  std::optional<Type> expect(const Expr& e, const Type& want) const {
    auto t = infer(e);
    if (t && !compatible(*t, want)) {
      error(Diagnostic::Kind::Type, e.span,
            std::string("type mismatch: expected ") + toString(want) + ", found " + describe(*t));
      return std::nullopt;
    }
    return t;
  }

  static std::string describe(const Type& t) { return isAnySet(t) ? "POW(?)" : toString(t); }

  std::optional<Type> infer(const Expr& e) const {
    auto bad = [&](const std::string& msg) -> std::optional<Type> {
      error(Diagnostic::Kind::Type, e.span, msg);
      return std::nullopt;
    };
    switch (e.op) {
      case Op::IntLit: return Type::integer();
      case Op::BoolLit: return Type::boolean();
      case Op::Atom: {
        if (auto* c = atomCarrier(e.name)) return Type::carrierOf(c->name);
        return bad("unknown atom '" + e.name + "'");
      }
      case Op::Ident: {
        switch (e.identKind) {
          case IdentKind::Parameter: return event->findParameter(e.name)->type;
          case IdentKind::Variable: return machine->findVariable(e.name)->type;
          case IdentKind::Constant: return constant(e.name)->type;
          case IdentKind::Unresolved: return std::nullopt;
        }
        return std::nullopt;
      }
      case Op::Maplet: {
        auto a = infer(e.args[0]);
        auto b = infer(e.args[1]);
        if (!a || !b) return std::nullopt;
        return Type::pair(*a, *b);
      }
      case Op::SetLit: {
        if (e.args.empty()) return anySet();
        std::optional<Type> elem;
        bool ok = true;
        for (auto& x : e.args) {
          auto t = infer(x);
          if (!t) {
            ok = false;
            continue;
          }
          if (!elem) {
            elem = *t;
          } else if (!compatible(*elem, *t)) {
            error(Diagnostic::Kind::Type, x.span,
                  "set literal element of type " + describe(*t) + " where " + describe(*elem) + " expected");
            ok = false;
          } else {
            elem = unify(*elem, *t);
          }
        }
        if (!ok || !elem) return std::nullopt;
        return Type::setOf(*elem);
      }
      case Op::Union:
      case Op::SetMinus:
      case Op::Override: {
        auto a = infer(e.args[0]);
        auto b = infer(e.args[1]);
        if (!a || !b) return std::nullopt;
        if (!a->isSet() || !b->isSet()) return bad(std::string("operands of ") + opName(e.op) + " must be sets");
        if (!compatible(*a, *b)) {
          error(Diagnostic::Kind::Type, e.args[1].span,
                "set operand of type " + describe(*b) + " where " + describe(*a) + " expected");
          return std::nullopt;
        }
        auto t = unify(*a, *b);
        if (e.op == Op::Override && !isAnySet(t) && !t.isRelation()) return bad("override requires relations");
        return t;
      }
      case Op::In:
      case Op::NotIn: {
        auto s = infer(e.args[1]);
        auto x = infer(e.args[0]);
        if (!s || !x) return std::nullopt;
        if (!s->isSet()) return bad("right operand of membership must be a set");
        if (!isAnySet(*s) && !compatible(*x, s->element())) {
          error(Diagnostic::Kind::Type, e.args[0].span,
                "element of type " + describe(*x) + " tested against " + describe(*s));
          return std::nullopt;
        }
        return Type::boolean();
      }
      case Op::Apply: {
        auto f = infer(e.args[0]);
        auto x = infer(e.args[1]);
        if (!f || !x) return std::nullopt;
        if (!f->isRelation()) return bad("application of a non-function");
        if (!compatible(*x, f->element().args[0])) return bad("function argument type mismatch");
        return f->element().args[1];
      }
      case Op::Dom: {
        auto f = infer(e.args[0]);
        if (!f) return std::nullopt;
        if (!f->isRelation()) return bad("dom of a non-relation");
        return Type::setOf(f->element().args[0]);
      }
      case Op::Card: {
        auto s = infer(e.args[0]);
        if (!s) return std::nullopt;
        if (!s->isSet()) return bad("card of a non-set");
        return Type::integer();
      }
      case Op::Sigma: {
        auto s = infer(e.args[0]);
        if (!s) return std::nullopt;
        if (!s->isRelation() || s->element().args[1].kind != Type::Kind::Integer)
          return bad("SIGMA requires a relation with integer values");
        return Type::integer();
      }
      case Op::Add:
      case Op::Sub:
        if (!expect(e.args[0], Type::integer()) || !expect(e.args[1], Type::integer())) return std::nullopt;
        return Type::integer();
      case Op::Neg:
        if (!expect(e.args[0], Type::integer())) return std::nullopt;
        return Type::integer();
      case Op::Not:
        if (!expect(e.args[0], Type::boolean())) return std::nullopt;
        return Type::boolean();
      case Op::And:
      case Op::Or:
      case Op::Implies:
        if (!expect(e.args[0], Type::boolean()) || !expect(e.args[1], Type::boolean())) return std::nullopt;
        return Type::boolean();
      case Op::Eq:
      case Op::Neq: {
        auto a = infer(e.args[0]);
        auto b = infer(e.args[1]);
        if (!a || !b) return std::nullopt;
        if (!compatible(*a, *b)) return bad("comparison of " + describe(*a) + " with " + describe(*b));
        return Type::boolean();
      }
      case Op::Lt:
      case Op::Le:
      case Op::Gt:
      case Op::Ge:
        if (!expect(e.args[0], Type::integer()) || !expect(e.args[1], Type::integer())) return std::nullopt;
        return Type::boolean();
    }
    return std::nullopt;
  }

  void predicate(Expr& e, const std::string& what) const {
    resolve(e);
    auto t = infer(e);
    if (t && t->kind != Type::Kind::Boolean)
      error(Diagnostic::Kind::Type, e.span, what + " is not a predicate");
  }
};

void checkEvent(Checker& c, const Machine& m, Event& ev, bool isInit) {
  c.event = &ev;
  std::set<std::string> names;
  for (auto& p : ev.parameters) {
    if (!names.insert(p.name).second) c.error(Diagnostic::Kind::Structure, ev.span, "duplicate parameter '" + p.name + "'");
    if (m.findVariable(p.name))
      c.error(Diagnostic::Kind::Structure, ev.span, "parameter '" + p.name + "' shadows a variable");
    c.typeWellFormed(p.type, p.span.valid() ? p.span : ev.span);
  }
  if (isInit && !ev.parameters.empty())
    c.error(Diagnostic::Kind::Structure, ev.span, "initialisation takes no parameters");
  for (auto& g : ev.guards) c.predicate(g.expr, "guard " + g.label);
  for (auto& w : ev.witnesses) c.predicate(w.expr, "witness " + w.label);

  std::map<std::string, int> whole, point;
  for (auto& a : ev.actions) {
    auto* v = m.findVariable(a.target);
    if (!v) {
      c.error(Diagnostic::Kind::Unresolved, a.span, "assignment to unknown variable '" + a.target + "'");
      c.resolve(a.rhs);
      continue;
    }
    c.resolve(a.rhs);
    if (a.index) {
      ++point[a.target];
      c.resolve(*a.index);
      if (!v->type.isRelation()) {
        c.error(Diagnostic::Kind::Type, a.span, "point update of non-function '" + a.target + "'");
        continue;
      }
      auto& pairT = v->type.element();
      c.expect(*a.index, pairT.args[0]);
      c.expect(a.rhs, pairT.args[1]);
    } else {
      ++whole[a.target];
      c.expect(a.rhs, v->type);
    }
  }
  for (auto& [name, n] : whole) {
    if (n > 1 || point.count(name))
      c.error(Diagnostic::Kind::Structure, ev.span,
              "event '" + ev.name + "' assigns '" + name + "' more than once");
  }
  if (isInit) {
    for (auto& v : m.variables) {
      if (whole[v.name] != 1)
        c.error(Diagnostic::Kind::Structure, ev.span,
                "initialisation must assign '" + v.name + "' exactly once");
    }
    if (!point.empty()) c.error(Diagnostic::Kind::Structure, ev.span, "initialisation cannot use point updates");
  }
  c.event = nullptr;
}

}  // namespace

std::vector<Diagnostic> check(Project& project) {
  std::vector<Diagnostic> diags;
  std::set<std::string> names;
  for (auto& ctx : project.contexts) {
    if (!names.insert(ctx.name).second)
      diags.push_back({Diagnostic::Kind::Structure, ctx.span, "duplicate component name '" + ctx.name + "'"});
    Checker c{project, nullptr, &ctx, nullptr, &diags};
    std::set<std::string> atoms;
    for (auto& s : ctx.sets) {
      if (s.elements.empty())
        diags.push_back({Diagnostic::Kind::Structure, ctx.span, "carrier set '" + s.name + "' is empty"});
      for (auto& el : s.elements)
        if (!atoms.insert(el).second)
          diags.push_back({Diagnostic::Kind::Structure, ctx.span, "atom '" + el + "' declared twice"});
    }
    for (auto& k : ctx.constants) {
      c.typeWellFormed(k.type, k.span.valid() ? k.span : ctx.span);
      c.resolve(k.value);
      c.expect(k.value, k.type);
    }
  }
  for (auto& m : project.machines) {
    if (!names.insert(m.name).second)
      diags.push_back({Diagnostic::Kind::Structure, m.span, "duplicate component name '" + m.name + "'"});
  }
  for (auto& m : project.machines) {
    Checker c{project, &m, nullptr, nullptr, &diags};
    for (auto& s : m.sees)
      if (!project.findContext(s))
        diags.push_back({Diagnostic::Kind::Unresolved, m.span, "machine '" + m.name + "' sees unknown context '" + s + "'"});
    if (m.refines && !project.findMachine(*m.refines))
      diags.push_back({Diagnostic::Kind::Unresolved, m.span,
                       "machine '" + m.name + "' refines unknown machine '" + *m.refines + "'"});
    std::set<std::string> vnames;
    for (auto& v : m.variables) {
      if (!vnames.insert(v.name).second)
        diags.push_back({Diagnostic::Kind::Structure, m.span, "duplicate variable '" + v.name + "'"});
      c.typeWellFormed(v.type, v.span.valid() ? v.span : m.span);
      if (v.functional && !v.type.isRelation())
        diags.push_back({Diagnostic::Kind::Type, m.span, "variable '" + v.name + "' marked functional but not a relation"});
    }
    std::set<std::string> labels;
    for (auto& inv : m.invariants) {
      if (!labels.insert(inv.label).second)
        diags.push_back({Diagnostic::Kind::Structure, inv.expr.span, "duplicate invariant label '" + inv.label + "'"});
      c.predicate(inv.expr, "invariant " + inv.label);
    }
    checkEvent(c, m, m.initialisation, true);
    std::set<std::string> enames;
    for (auto& ev : m.events) {
      if (!enames.insert(ev.name).second)
        diags.push_back({Diagnostic::Kind::Structure, ev.span, "duplicate event '" + ev.name + "'"});
      checkEvent(c, m, ev, false);
    }
  }
  // refinement chains must be acyclic
  for (auto& m : project.machines) {
    std::set<std::string> seen{m.name};
    const Machine* cur = &m;
    while (cur && cur->refines) {
      if (!seen.insert(*cur->refines).second) {
        diags.push_back({Diagnostic::Kind::Structure, m.span, "refinement cycle through '" + m.name + "'"});
        break;
      }
      cur = project.findMachine(*cur->refines);
    }
  }
  if (!project.findMachine(project.root))
    diags.push_back({Diagnostic::Kind::Unresolved, {}, "root machine '" + project.root + "' not found"});
  return diags;
}

void checkOrThrow(Project& project) {
  auto d = check(project);
  if (!d.empty()) throw DiagnosticError(std::move(d));
}

std::optional<Type> typeOf(const Project& project, const Machine& machine, const Event* event, const Expr& e) {
  Checker c{project, &machine, nullptr, event, nullptr};
  return c.infer(e);
}

}  // namespace dse::kernel
