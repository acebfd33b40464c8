#include <algorithm>
#include <map>
#include <sstream>

#include "dse/forge/forge.hpp"
#include "dse/kernel/check.hpp"
#include "dse/kernel/exprs.hpp"
#include "dse/kernel/hash.hpp"
#include "dse/kernel/triples.hpp"

namespace dse::forge {

using namespace kernel;

namespace {

struct OpInfo {
  OperatorKind kind;
  const char* name;
};

const OpInfo kOps[] = {
    {OperatorKind::DeleteArgument, "deleteArgument"},
    {OperatorKind::DeleteWitness, "deleteWitness"},
    {OperatorKind::DeleteGuard, "deleteGuard"},
    {OperatorKind::DeleteVariable, "deleteVariable"},
    {OperatorKind::DeleteInvariant, "deleteInvariant"},
    {OperatorKind::DeleteAction, "deleteAction"},
    {OperatorKind::NegateGuard, "negateGuard"},
    {OperatorKind::NegateAction, "negateAction"},
    {OperatorKind::MergeEvents, "mergeEvents"},
    {OperatorKind::CombineEvents, "combineEvents"},
    {OperatorKind::UndoActions, "undoActions"},
    {OperatorKind::InsertAbstractLayer, "insertAbstractLayer"},
    {OperatorKind::AddAbstractLayer, "addAbstractLayer"},
    {OperatorKind::AddSeesContextToAbstractLayer, "addSeesContextToAbstractLayer"},
    {OperatorKind::MoveVariableToAbstractLayer, "moveVariableToAbstractLayer"},
    {OperatorKind::MergeVariable, "mergeVariable"},
};

struct CondInfo {
  ConditionKind kind;
  const char* name;
};

const CondInfo kConds[] = {
    {ConditionKind::HasAbstractLayer, "hasAbstractLayer"},
    {ConditionKind::HasVariableOfTypePartialFunction, "hasVariableOfTypePartialFunction"},
    {ConditionKind::HasVariableOfTypePowerset, "hasVariableOfTypePowerset"},
    {ConditionKind::HasAbstractablePartialFunctionVariable, "hasAbstractablePartialFunctionVariable"},
    {ConditionKind::HasOneEvent, "hasOneEvent"},
};

// An operator application before validation.
struct Candidate {
  std::string args;
  std::optional<Project> project;  // nullopt: rejected before validation
  std::string reason;
  std::set<std::string> fresh;
};

template <class T, class Pred>
void eraseIf(std::vector<T>& v, Pred p) {
  v.erase(std::remove_if(v.begin(), v.end(), p), v.end());
}

bool inScope(const std::set<std::string>& focus, const std::string& name) {
  return focus.empty() || focus.count(name);
}

std::string freshName(const std::string& base, const std::set<std::string>& taken) {
  if (!taken.count(base)) return base;
  for (int i = 2;; ++i) {
    auto n = base + std::to_string(i);
    if (!taken.count(n)) return n;
  }
}

std::set<std::string> eventNames(const Machine& m) {
  std::set<std::string> out;
  for (auto& e : m.events) out.insert(e.name);
  return out;
}

std::set<std::string> machineNames(const Project& p) {
  std::set<std::string> out;
  for (auto& m : p.machines) out.insert(m.name);
  for (auto& c : p.contexts) out.insert(c.name);
  return out;
}

// Events an event-level operator may touch: the events created earlier in the
// pipeline if there are any, otherwise the focused events.
std::vector<std::string> eventScope(const Machine& m, const Alternative& alt, const Focus& focus) {
  std::vector<std::string> out;
  for (auto& e : m.events) {
    if (!alt.freshEvents.empty() ? alt.freshEvents.count(e.name) > 0 : inScope(focus.events, e.name))
      out.push_back(e.name);
  }
  return out;
}

// Labels continue the numbering of their stem: act1 collides, act4 is free.
std::string freshLabel(const std::string& base, const std::set<std::string>& taken) {
  if (!taken.count(base)) return base;
  auto stem = base.substr(0, base.find_last_not_of("0123456789") + 1);
  for (int i = 1;; ++i) {
    auto n = stem + std::to_string(i);
    if (!taken.count(n)) return n;
  }
}

// Appends `items` to `into`, skipping structural duplicates and relabelling
// on label collisions.
void appendLabeled(std::vector<Labeled>& into, const std::vector<Labeled>& items) {
  for (auto& g : items) {
    bool dup = std::any_of(into.begin(), into.end(), [&](const Labeled& x) { return x.expr == g.expr; });
    if (dup) continue;
    std::set<std::string> labels;
    for (auto& x : into) labels.insert(x.label);
    into.push_back({freshLabel(g.label, labels), g.expr});
  }
}

std::string actionLabel(const std::string& base, const std::vector<Action>& acts) {
  std::set<std::string> labels;
  for (auto& a : acts) labels.insert(a.label);
  return freshLabel(base, labels);
}

// Union of parameter lists; false when a name appears with two types.
bool unifyParameters(std::vector<Parameter>& into, const std::vector<Parameter>& more) {
  for (auto& p : more) {
    auto it = std::find_if(into.begin(), into.end(), [&](const Parameter& x) { return x.name == p.name; });
    if (it == into.end()) {
      into.push_back(p);
    } else if (!(it->type == p.type)) {
      return false;
    }
  }
  return true;
}

void dropVariable(Machine& m, const std::string& v) {
  eraseIf(m.variables, [&](const Variable& x) { return x.name == v; });
  eraseIf(m.invariants, [&](const Invariant& i) { return refersTo(i.expr, v); });
  auto strip = [&](Event& e) {
    eraseIf(e.actions, [&](const Action& a) { return a.target == v; });
    eraseIf(e.guards, [&](const Labeled& g) { return refersTo(g.expr, v); });
    eraseIf(e.witnesses, [&](const Labeled& w) { return refersTo(w.expr, v); });
  };
  strip(m.initialisation);
  for (auto& e : m.events) strip(e);
}

void renameVariable(Machine& m, const std::string& from, const std::string& to) {
  for (auto& v : m.variables)
    if (v.name == from) v.name = to;
  for (auto& i : m.invariants) i.expr = renameIdentifier(i.expr, from, to);
  auto fix = [&](Event& e) {
    for (auto& g : e.guards) g.expr = renameIdentifier(g.expr, from, to);
    for (auto& w : e.witnesses) w.expr = renameIdentifier(w.expr, from, to);
    for (auto& a : e.actions) {
      if (a.target == from) a.target = to;
      a.rhs = renameIdentifier(a.rhs, from, to);
      if (a.index) a.index = renameIdentifier(*a.index, from, to);
    }
  };
  fix(m.initialisation);
  for (auto& e : m.events) fix(e);
}

Expr negateWhole(const std::vector<Labeled>& guards) {
  Expr acc = negate(guards.front().expr);
  for (std::size_t i = 1; i < guards.size(); ++i) acc = Expr::binary(Op::Or, acc, negate(guards[i].expr));
  return acc;
}

// Value of `v` after the actions of `e` (nullopt when `e` leaves it alone).
// Point updates become an override chain.
std::optional<Expr> postValue(const Event& e, const std::string& v) {
  std::optional<Expr> out;
  for (auto& a : e.actions) {
    if (a.target != v) continue;
    if (!a.isPointUpdate()) return a.rhs;
    Expr base = out ? *out : Expr::ident(v, IdentKind::Variable);
    out = Expr::binary(Op::Override, base, Expr::setLit({Expr::binary(Op::Maplet, *a.index, a.rhs)}));
  }
  return out;
}

// Sequential composition `e1 ; e2` folded into one event. Guards are the
// union of both; the actions of e2 see the variables as e1 left them.
std::optional<Event> mergePair(const Event& e1, const Event& e2, std::string& reason) {
  Event out;
  out.parameters = e1.parameters;
  if (!unifyParameters(out.parameters, e2.parameters)) {
    reason = "parameters of '" + e1.name + "' and '" + e2.name + "' clash";
    return std::nullopt;
  }
  out.guards = e1.guards;
  appendLabeled(out.guards, e2.guards);
  out.witnesses = e1.witnesses;
  appendLabeled(out.witnesses, e2.witnesses);

  std::vector<std::pair<std::string, Expr>> post;
  for (auto& a : e1.actions) {
    if (std::any_of(post.begin(), post.end(), [&](auto& kv) { return kv.first == a.target; })) continue;
    post.emplace_back(a.target, *postValue(e1, a.target));
  }
  auto after = [&](Expr x) {
    // Simultaneous substitution: rename first so replacements are not rewritten again.
    for (auto& [v, _] : post) x = renameIdentifier(x, v, "#" + v);
    for (auto& [v, val] : post) x = substitute(x, "#" + v, val);
    return x;
  };

  out.actions = e1.actions;
  std::set<std::string> composed;
  for (auto& a : e2.actions) {
    bool overlaps = std::any_of(e1.actions.begin(), e1.actions.end(), [&](const Action& x) { return x.target == a.target; });
    if (!overlaps) {
      Action b = a;
      b.label = actionLabel(a.label, out.actions);
      b.rhs = after(a.rhs);
      if (b.index) b.index = after(*b.index);
      out.actions.push_back(b);
      continue;
    }
    if (!composed.insert(a.target).second) continue;
    // e2 writes a variable e1 already wrote: one whole assignment of the final value.
    Expr cur = after(Expr::ident(a.target, IdentKind::Variable));
    for (auto& b : e2.actions) {
      if (b.target != a.target) continue;
      if (!b.isPointUpdate()) {
        cur = after(b.rhs);
      } else {
        cur = Expr::binary(Op::Override, cur, Expr::setLit({Expr::binary(Op::Maplet, after(*b.index), after(b.rhs))}));
      }
    }
    auto label = std::find_if(out.actions.begin(), out.actions.end(), [&](const Action& x) { return x.target == a.target; })->label;
    eraseIf(out.actions, [&](const Action& x) { return x.target == a.target; });
    Action c;
    c.label = label;
    c.target = a.target;
    c.rhs = std::move(cur);
    out.actions.push_back(std::move(c));
  }
  return out;
}

bool isSelfRead(const Action& a, const Expr& e) {
  if (a.index) return e.op == Op::Apply && e.args[0].isIdent(a.target) && e.args[1] == *a.index;
  return e.isIdent(a.target);
}

}  // namespace

const char* operatorName(OperatorKind k) {
  for (auto& o : kOps)
    if (o.kind == k) return o.name;
  return "?";
}

std::optional<OperatorKind> operatorFromName(std::string_view name) {
  for (auto& o : kOps)
    if (name == o.name) return o.kind;
  if (name == "mergeEvent") return OperatorKind::MergeEvents;
  if (name == "combineEvent") return OperatorKind::CombineEvents;
  return std::nullopt;
}

const char* conditionName(ConditionKind k) {
  for (auto& c : kConds)
    if (c.kind == k) return c.name;
  return "?";
}

std::optional<ConditionKind> conditionFromName(std::string_view name) {
  for (auto& c : kConds)
    if (name == c.name) return c.kind;
  return std::nullopt;
}

const std::vector<OperatorKind>& allOperators() {
  static const std::vector<OperatorKind> all = [] {
    std::vector<OperatorKind> v;
    for (auto& o : kOps) v.push_back(o.kind);
    return v;
  }();
  return all;
}

ForgeConfig ForgeConfig::calibration(const std::string& name) {
  ForgeConfig c;
  if (name == "default" || name.empty()) return c;
  if (name == "conjuncts") {
    c.negate = NegateMode::PerConjunct;
  } else if (name == "whole") {
    c.negate = NegateMode::Whole;
  } else if (name == "strict") {
    c.arithmeticReversible = false;
  } else {
    throw std::invalid_argument("unknown calibration '" + name + "'");
  }
  return c;
}

std::vector<std::string> ForgeConfig::calibrations() { return {"default", "conjuncts", "whole", "strict"}; }

std::string Alternative::describe() const {
  std::string out = parent;
  for (auto& s : provenance) out += " > " + s.op + "(" + s.args + ")";
  return out;
}

std::optional<std::string> validate(Project& project) {
  auto diags = check(project);
  if (!diags.empty()) return diags.front().message;
  try {
    auto back = fromTriples(toTriples(project));
    if (canonicalHash(back) != canonicalHash(project)) return std::string("triple round trip changed the model");
  } catch (const std::exception& e) {
    return std::string("inconsistent triples: ") + e.what();
  }
  return std::nullopt;
}

std::optional<Action> reverseAction(const Action& a, const ForgeConfig& config) {
  const Expr& r = a.rhs;
  if (r.args.size() != 2) return std::nullopt;
  const Expr& lhs = r.args[0];
  const Expr& rhs = r.args[1];
  Action out = a;
  auto other = [&](const Expr& k) { return !refersTo(k, a.target); };
  switch (r.op) {
    case Op::Union:
      if (a.index || !isSelfRead(a, lhs) || !other(rhs)) return std::nullopt;
      out.rhs = Expr::binary(Op::SetMinus, lhs, rhs);
      return out;
    case Op::SetMinus:
      if (a.index || !isSelfRead(a, lhs) || !other(rhs)) return std::nullopt;
      out.rhs = Expr::binary(Op::Union, lhs, rhs);
      return out;
    case Op::Add:
      if (!config.arithmeticReversible) return std::nullopt;
      if (isSelfRead(a, lhs) && other(rhs)) {
        out.rhs = Expr::binary(Op::Sub, lhs, rhs);
      } else if (isSelfRead(a, rhs) && other(lhs)) {
        out.rhs = Expr::binary(Op::Sub, rhs, lhs);
      } else {
        return std::nullopt;
      }
      return out;
    case Op::Sub:
      if (!config.arithmeticReversible || !isSelfRead(a, lhs) || !other(rhs)) return std::nullopt;
      out.rhs = Expr::binary(Op::Add, lhs, rhs);
      return out;
    default:
      return std::nullopt;
  }
}

std::optional<Event> undoEvent(const Event& e, const ForgeConfig& config) {
  Event out = e;
  for (auto& a : out.actions) {
    auto r = reverseAction(a, config);
    if (!r) return std::nullopt;
    a = *r;
  }
  return out;
}

Project withAbstractLayer(const Project& project, const Machine& source) {
  Project out = project;
  Machine clone = source;
  clone.name = freshName(project.root + "Abs", machineNames(project));
  std::set<std::string> taken;
  for (auto& v : source.variables) taken.insert(v.name);
  for (auto& v : source.variables) {
    auto to = freshName("a" + v.name, taken);
    taken.insert(to);
    renameVariable(clone, v.name, to);
  }
  clone.refines = out.rootMachine().refines;
  out.rootMachine().refines = clone.name;
  auto pos = std::find_if(out.machines.begin(), out.machines.end(), [&](const Machine& m) { return m.name == project.root; });
  out.machines.insert(pos, std::move(clone));
  return out;
}

bool evalCondition(const Project& model, ConditionKind kind) {
  const Machine& m = model.rootMachine();
  switch (kind) {
    case ConditionKind::HasAbstractLayer:
      return m.refines.has_value();
    case ConditionKind::HasVariableOfTypePartialFunction:
      return std::any_of(m.variables.begin(), m.variables.end(), [](const Variable& v) { return v.functional; });
    case ConditionKind::HasVariableOfTypePowerset:
      return std::any_of(m.variables.begin(), m.variables.end(),
                         [](const Variable& v) { return v.type.isSet() && !v.functional; });
    case ConditionKind::HasAbstractablePartialFunctionVariable: {
      if (!m.refines) return false;
      const Machine* abs = model.findMachine(*m.refines);
      if (!abs) return false;
      return std::any_of(m.variables.begin(), m.variables.end(), [&](const Variable& v) {
        return v.functional && !abs->findVariable(v.name) && !abs->findVariable("a" + v.name);
      });
    }
    case ConditionKind::HasOneEvent:
      return m.events.size() == 1;
  }
  return false;
}

std::vector<Alternative> applyAtomic(const Project& model, OperatorKind kind, const Focus& focus,
                                     const ForgeConfig& config, DiscardLog* log) {
  Alternative alt;
  alt.project = model;
  return applyAtomic(alt, kind, focus, config, log);
}

std::vector<Alternative> applyAtomic(const Alternative& model, OperatorKind kind, const Focus& focus,
                                     const ForgeConfig& config, DiscardLog* log) {
  const Project& base = model.project;
  const Machine& root = base.rootMachine();
  std::vector<Candidate> cands;

  auto edit = [&](std::string args, auto&& fn) {
    Candidate c;
    c.args = std::move(args);
    Project p = base;
    Machine& m = p.rootMachine();
    fn(p, m, c);
    if (c.reason.empty()) c.project = std::move(p);
    cands.push_back(std::move(c));
  };
  auto events = eventScope(root, model, focus);
  auto eventOf = [](Machine& m, const std::string& n) -> Event& { return *m.findEvent(n); };

  switch (kind) {
    case OperatorKind::DeleteArgument:
      for (auto& en : events)
        for (auto& prm : root.findEvent(en)->parameters)
          edit(en + "," + prm.name, [&](Project&, Machine& m, Candidate&) {
            Event& e = eventOf(m, en);
            eraseIf(e.parameters, [&](const Parameter& x) { return x.name == prm.name; });
            eraseIf(e.guards, [&](const Labeled& g) { return refersTo(g.expr, prm.name); });
            eraseIf(e.witnesses, [&](const Labeled& w) { return refersTo(w.expr, prm.name); });
          });
      break;

    case OperatorKind::DeleteWitness:
      for (auto& en : events)
        for (auto& w : root.findEvent(en)->witnesses)
          edit(en + "," + w.label, [&](Project&, Machine& m, Candidate&) {
            eraseIf(eventOf(m, en).witnesses, [&](const Labeled& x) { return x.label == w.label; });
          });
      break;

    case OperatorKind::DeleteGuard:
      for (auto& en : events)
        for (auto& g : root.findEvent(en)->guards)
          edit(en + "," + g.label, [&](Project&, Machine& m, Candidate&) {
            eraseIf(eventOf(m, en).guards, [&](const Labeled& x) { return x.label == g.label; });
          });
      break;

    case OperatorKind::DeleteAction:
      for (auto& en : events)
        for (auto& a : root.findEvent(en)->actions)
          edit(en + "," + a.label, [&](Project&, Machine& m, Candidate&) {
            eraseIf(eventOf(m, en).actions, [&](const Action& x) { return x.label == a.label; });
          });
      break;

    case OperatorKind::DeleteVariable:
      for (auto& v : root.variables)
        if (inScope(focus.variables, v.name))
          edit(v.name, [&](Project&, Machine& m, Candidate&) { dropVariable(m, v.name); });
      break;

    case OperatorKind::DeleteInvariant:
      for (auto& inv : root.invariants)
        if (inScope(focus.invariants, inv.label))
          edit(inv.label, [&](Project&, Machine& m, Candidate&) {
            eraseIf(m.invariants, [&](const Invariant& x) { return x.label == inv.label; });
          });
      break;

    case OperatorKind::NegateGuard:
      for (auto& en : events) {
        const auto& guards = root.findEvent(en)->guards;
        if (guards.empty()) continue;
        bool perConjunct = config.negate != NegateMode::Whole || guards.size() == 1;
        bool whole = config.negate == NegateMode::Whole ||
                     (config.negate == NegateMode::PerConjunctAndWhole && guards.size() > 1);
        if (perConjunct)
          for (auto& g : guards)
            edit(en + "," + g.label, [&](Project&, Machine& m, Candidate&) {
              for (auto& x : eventOf(m, en).guards)
                if (x.label == g.label) x.expr = negate(x.expr);
            });
        if (whole && guards.size() > 1)
          edit(en + ",*", [&](Project&, Machine& m, Candidate&) {
            Event& e = eventOf(m, en);
            e.guards = {{e.guards.front().label, negateWhole(e.guards)}};
          });
      }
      break;

    case OperatorKind::NegateAction:
      for (auto& en : events)
        for (auto& a : root.findEvent(en)->actions) {
          if (!reverseAction(a, config)) continue;
          edit(en + "," + a.label, [&](Project&, Machine& m, Candidate&) {
            for (auto& x : eventOf(m, en).actions)
              if (x.label == a.label) x = *reverseAction(x, config);
          });
        }
      break;

    case OperatorKind::UndoActions:
      for (auto& en : events) {
        if (root.findEvent(en)->actions.empty()) continue;
        edit(en, [&](Project&, Machine& m, Candidate& c) {
          auto u = undoEvent(eventOf(m, en), config);
          if (!u) {
            c.reason = "event '" + en + "' has an irreversible action";
            return;
          }
          eventOf(m, en) = *u;
        });
      }
      break;

    case OperatorKind::MergeEvents:
      for (std::size_t i = 0; i < root.events.size(); ++i)
        for (std::size_t j = i + 1; j < root.events.size(); ++j) {
          const Event& a = root.events[i];
          const Event& b = root.events[j];
          bool allowed = !model.freshEvents.empty()
                             ? (model.freshEvents.count(a.name) || model.freshEvents.count(b.name))
                             : (focus.events.empty() || focus.events.count(a.name) || focus.events.count(b.name));
          if (!allowed) continue;
          edit(a.name + "," + b.name, [&](Project&, Machine& m, Candidate& c) {
            auto merged = mergePair(a, b, c.reason);
            if (!merged) return;
            auto taken = eventNames(m);
            taken.erase(a.name);
            taken.erase(b.name);
            merged->name = freshName(b.name + "_abs", taken);
            m.events[i] = *merged;
            m.events.erase(m.events.begin() + static_cast<std::ptrdiff_t>(j));
            c.fresh.insert(merged->name);
          });
        }
      break;

    case OperatorKind::CombineEvents:
      for (std::size_t i = 0; i < root.events.size(); ++i)
        for (std::size_t j = 0; j < root.events.size(); ++j) {
          if (i == j) continue;
          const Event& a = root.events[i];
          const Event& b = root.events[j];
          if (!focus.events.empty() && !focus.events.count(a.name) && !focus.events.count(b.name)) continue;
          edit(a.name + "," + b.name, [&](Project&, Machine& m, Candidate& c) {
            Event e;
            e.parameters = a.parameters;
            if (!unifyParameters(e.parameters, b.parameters)) {
              c.reason = "parameters of '" + a.name + "' and '" + b.name + "' clash";
              return;
            }
            e.name = freshName(a.name + "_err", eventNames(m));
            e.guards = a.guards;
            e.actions = b.actions;
            c.fresh.insert(e.name);
            m.events.push_back(std::move(e));
          });
        }
      break;

    case OperatorKind::InsertAbstractLayer:
      edit("", [&](Project& p, Machine&, Candidate&) {
        Machine abs;
        abs.name = freshName(p.root + "Abs", machineNames(p));
        abs.initialisation.name = "INITIALISATION";
        abs.refines = p.rootMachine().refines;
        p.rootMachine().refines = abs.name;
        auto pos = std::find_if(p.machines.begin(), p.machines.end(), [&](const Machine& x) { return x.name == p.root; });
        p.machines.insert(pos, std::move(abs));
      });
      break;

    case OperatorKind::AddAbstractLayer:
      edit("", [&](Project& p, Machine&, Candidate&) { p = withAbstractLayer(base, root); });
      break;

    case OperatorKind::AddSeesContextToAbstractLayer: {
      if (!root.refines) break;
      const Machine* abs = base.findMachine(*root.refines);
      if (!abs) break;
      for (auto& ctx : base.contexts) {
        if (std::find(abs->sees.begin(), abs->sees.end(), ctx.name) != abs->sees.end()) continue;
        edit(ctx.name, [&](Project& p, Machine&, Candidate&) { p.findMachine(abs->name)->sees.push_back(ctx.name); });
      }
      break;
    }

    case OperatorKind::MoveVariableToAbstractLayer: {
      if (!root.refines) break;
      const Machine* abs = base.findMachine(*root.refines);
      if (!abs) break;
      for (auto& v : root.variables) {
        if (!inScope(focus.variables, v.name) || abs->findVariable(v.name)) continue;
        edit(v.name, [&](Project& p, Machine& m, Candidate&) {
          Machine& a = *p.findMachine(abs->name);
          a.variables.push_back(v);
          for (auto& s : m.sees)
            if (std::find(a.sees.begin(), a.sees.end(), s) == a.sees.end()) a.sees.push_back(s);
          for (auto& act : m.initialisation.actions)
            if (act.target == v.name) a.initialisation.actions.push_back(act);
          std::set<std::string> absVars;
          for (auto& x : a.variables) absVars.insert(x.name);
          for (auto& inv : m.invariants) {
            auto vs = variablesOf(inv.expr);
            if (!vs.count(v.name)) continue;
            if (std::all_of(vs.begin(), vs.end(), [&](const std::string& n) { return absVars.count(n); }))
              a.invariants.push_back(inv);
          }
          dropVariable(m, v.name);
        });
      }
      break;
    }

    case OperatorKind::MergeVariable:
      for (std::size_t i = 0; i < root.variables.size(); ++i)
        for (std::size_t j = i + 1; j < root.variables.size(); ++j) {
          const Variable& a = root.variables[i];
          const Variable& b = root.variables[j];
          if (!(a.type == b.type)) continue;
          if (!focus.variables.empty() && !focus.variables.count(a.name) && !focus.variables.count(b.name)) continue;
          edit(a.name + "," + b.name, [&](Project&, Machine& m, Candidate&) {
            std::set<std::string> taken;
            for (auto& x : m.variables) taken.insert(x.name);
            auto to = freshName(a.name + "_" + b.name, taken);
            renameVariable(m, a.name, to);
            renameVariable(m, b.name, to);
            eraseIf(m.variables, [&, seen = false](const Variable& x) mutable {
              if (x.name != to) return false;
              if (!seen) return seen = true, false;
              return true;
            });
            auto dedup = [&](Event& e) {
              std::vector<Action> kept;
              for (auto& act : e.actions) {
                bool dup = std::any_of(kept.begin(), kept.end(), [&](const Action& k) {
                  return k.target == act.target && k.index == act.index && k.rhs == act.rhs;
                });
                if (!dup) kept.push_back(act);
              }
              e.actions = std::move(kept);
            };
            dedup(m.initialisation);
            for (auto& e : m.events) dedup(e);
          });
        }
      break;
  }

  std::vector<Alternative> out;
  for (auto& c : cands) {
    std::vector<ProvenanceStep> prov = model.provenance;
    prov.push_back({operatorName(kind), c.args});
    if (c.project) {
      if (auto bad = validate(*c.project)) c.reason = *bad;
    }
    if (!c.reason.empty()) {
      if (log) log->push_back({prov, c.reason});
      continue;
    }
    Alternative a;
    a.project = std::move(*c.project);
    a.provenance = std::move(prov);
    a.parent = model.parent;
    a.freshEvents = model.freshEvents;
    // Events consumed by this step leave the fresh set.
    const Machine& r = a.project.rootMachine();
    for (auto it = a.freshEvents.begin(); it != a.freshEvents.end();)
      it = r.findEvent(*it) ? std::next(it) : a.freshEvents.erase(it);
    a.freshEvents.insert(c.fresh.begin(), c.fresh.end());
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace dse::forge
