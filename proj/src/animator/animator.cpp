#include "dse/animator/animator.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <random>
#include <set>

namespace dse::animator {

using kernel::Expr;
using kernel::IdentKind;
using kernel::Op;
using kernel::Type;

const Value& State::at(const std::string& v) const {
  auto it = vars.find(v);
  if (it == vars.end()) throw EvalFault(EvalFault::Kind::Unbound, "variable '" + v + "' has no value");
  return it->second;
}

std::string EventInstance::toString() const {
  std::string out = event + "(";
  for (std::size_t i = 0; i < binding.size(); ++i) {
    if (i) out += ",";
    out += animator::toString(binding[i].second);
  }
  return out + ")";
}

InstanceFault::InstanceFault(EventInstance inst, std::string where, const EvalFault& cause)
    : std::runtime_error(inst.toString() + " at " + where + ": " + cause.what()),
      instance_(std::move(inst)),
      where_(std::move(where)) {}

void SimConfig::validate() const {
  if (maxSteps == 0 || maxTraces == 0 || maxStates == 0) throw std::invalid_argument("simulation bounds must be positive");
  if (intMin > intMax) throw std::invalid_argument("empty integer parameter range");
}

std::size_t FlawReport::flawClasses() const {
  return (deadlocks.empty() ? 0 : 1) + (violations.empty() ? 0 : 1) + (faults.empty() ? 0 : 1);
}

std::string stateId(std::size_t index) { return "S" + std::to_string(index); }

Animator::Animator(const kernel::Project& project, std::string machine, SimConfig config)
    : project_(&project), machine_(project.findMachine(machine)), config_(config) {
  if (!machine_) throw std::invalid_argument("unknown machine '" + machine + "'");
  config_.validate();
  State empty{machine_->name, {}};
  for (auto& cn : machine_->sees) {
    auto* ctx = project.findContext(cn);
    if (!ctx) continue;
    for (auto& k : ctx->constants) constants_[k.name] = eval(k.value, empty, {});
  }
}

namespace {

const Value& lookupBinding(const Binding& b, const std::string& name) {
  for (auto& [n, v] : b)
    if (n == name) return v;
  throw EvalFault(EvalFault::Kind::Unbound, "parameter '" + name + "' is unbound");
}

bool boundIn(const Binding& b, const std::string& name) {
  return std::any_of(b.begin(), b.end(), [&](auto& p) { return p.first == name; });
}

const Value& applyFunction(const Value& f, const Value& x) {
  const Value* found = nullptr;
  auto it = std::lower_bound(f.items.begin(), f.items.end(), x,
                             [](const Value& item, const Value& key) { return item.items.at(0) < key; });
  for (; it != f.items.end() && it->items.at(0) == x; ++it) {
    if (found && !(*found == it->items.at(1)))
      throw EvalFault(EvalFault::Kind::NonFunctional, "application of a non-functional relation at " + toString(x));
    found = &it->items.at(1);
  }
  if (!found) throw EvalFault(EvalFault::Kind::OutsideDomain, toString(x) + " is outside the domain");
  return *found;
}

Value domainOf(const Value& f) {
  std::vector<Value> out;
  for (auto& p : f.items) out.push_back(p.items.at(0));
  return Value::set(std::move(out));
}

}  // namespace

Value Animator::eval(const Expr& e, const State& state, const Binding& binding) const {
  auto arg = [&](int i) { return eval(e.args[i], state, binding); };
  switch (e.op) {
    case Op::IntLit: return Value::integer(e.intValue);
    case Op::BoolLit: return Value::boolean(e.boolValue);
    case Op::Atom: return Value::atomOf(e.name);
    case Op::Ident: {
      switch (e.identKind) {
        case IdentKind::Parameter: return lookupBinding(binding, e.name);
        case IdentKind::Variable: return state.at(e.name);
        case IdentKind::Constant: {
          auto it = constants_.find(e.name);
          if (it == constants_.end()) throw EvalFault(EvalFault::Kind::Unbound, "constant '" + e.name + "' has no value");
          return it->second;
        }
        case IdentKind::Unresolved:
          if (boundIn(binding, e.name)) return lookupBinding(binding, e.name);
          if (state.vars.count(e.name)) return state.at(e.name);
          if (auto it = constants_.find(e.name); it != constants_.end()) return it->second;
          throw EvalFault(EvalFault::Kind::Unbound, "unbound identifier '" + e.name + "'");
      }
      break;
    }
    case Op::Maplet: return Value::pair(arg(0), arg(1));
    case Op::SetLit: {
      std::vector<Value> xs;
      for (auto& a : e.args) xs.push_back(eval(a, state, binding));
      return Value::set(std::move(xs));
    }
    case Op::Union: return setUnion(arg(0), arg(1));
    case Op::SetMinus: return setMinus(arg(0), arg(1));
    case Op::In: return Value::boolean(arg(1).contains(arg(0)));
    case Op::NotIn: return Value::boolean(!arg(1).contains(arg(0)));
    case Op::Apply: {
      auto f = arg(0);
      return applyFunction(f, arg(1));
    }
    case Op::Dom: return domainOf(arg(0));
    case Op::Override: {
      auto f = arg(0);
      auto g = arg(1);
      auto dg = domainOf(g);
      std::vector<Value> keep;
      for (auto& p : f.items)
        if (!dg.contains(p.items.at(0))) keep.push_back(p);
      return setUnion(Value::set(std::move(keep)), g);
    }
    case Op::Card: return Value::integer(static_cast<std::int64_t>(arg(0).items.size()));
    case Op::Sigma: {
      std::int64_t sum = 0;
      for (auto& p : arg(0).items) sum += p.items.at(1).asInt();
      return Value::integer(sum);
    }
    case Op::Add: return Value::integer(arg(0).asInt() + arg(1).asInt());
    case Op::Sub: return Value::integer(arg(0).asInt() - arg(1).asInt());
    case Op::Neg: return Value::integer(-arg(0).asInt());
    case Op::Not: return Value::boolean(!arg(0).asBool());
    case Op::And: return Value::boolean(arg(0).asBool() && arg(1).asBool());
    case Op::Or: return Value::boolean(arg(0).asBool() || arg(1).asBool());
    case Op::Implies: return Value::boolean(!arg(0).asBool() || arg(1).asBool());
    case Op::Eq: return Value::boolean(arg(0) == arg(1));
    case Op::Neq: return Value::boolean(!(arg(0) == arg(1)));
    case Op::Lt: return Value::boolean(arg(0).asInt() < arg(1).asInt());
    case Op::Le: return Value::boolean(arg(0).asInt() <= arg(1).asInt());
    case Op::Gt: return Value::boolean(arg(0).asInt() > arg(1).asInt());
    case Op::Ge: return Value::boolean(arg(0).asInt() >= arg(1).asInt());
  }
  throw EvalFault(EvalFault::Kind::Other, std::string("cannot evaluate ") + kernel::opName(e.op));
}

std::vector<Value> Animator::domain(const Type& t) const {
  switch (t.kind) {
    case Type::Kind::Integer: {
      std::vector<Value> out;
      for (auto i = config_.intMin; i <= config_.intMax; ++i) out.push_back(Value::integer(i));
      return out;
    }
    case Type::Kind::Boolean: return {Value::boolean(false), Value::boolean(true)};
    case Type::Kind::Carrier: {
      auto* c = project_->findCarrier(*machine_, t.carrier);
      if (!c) throw std::invalid_argument("unknown carrier '" + t.carrier + "'");
      std::vector<Value> out;
      for (auto& a : c->elements) out.push_back(Value::atomOf(a));
      return out;
    }
    case Type::Kind::Pair: {
      std::vector<Value> out;
      for (auto& a : domain(t.args[0]))
        for (auto& b : domain(t.args[1])) out.push_back(Value::pair(a, b));
      return out;
    }
    case Type::Kind::Set: break;
  }
  throw std::invalid_argument("cannot enumerate parameters of type " + kernel::toString(t));
}

std::vector<Binding> Animator::bindings(const kernel::Event& ev) const {
  std::vector<Binding> out{{}};
  for (auto& p : ev.parameters) {
    auto dom = domain(p.type);
    std::vector<Binding> next;
    next.reserve(out.size() * dom.size());
    for (auto& b : out)
      for (auto& v : dom) {
        auto nb = b;
        nb.emplace_back(p.name, v);
        next.push_back(std::move(nb));
      }
    out = std::move(next);
  }
  return out;
}

bool Animator::guardsHold(const kernel::Event& ev, const State& s, const Binding& b) const {
  for (auto& g : ev.guards) {
    try {
      if (!eval(g.expr, s, b).asBool()) return false;
    } catch (const EvalFault& f) {
      throw InstanceFault({ev.name, b}, "guard " + g.label, f);
    }
  }
  return true;
}

State Animator::initialState() const {
  State empty{machine_->name, {}};
  State s{machine_->name, {}};
  for (auto& a : machine_->initialisation.actions) {
    try {
      s.vars[a.target] = eval(a.rhs, empty, {});
    } catch (const EvalFault& f) {
      throw InstanceFault({machine_->initialisation.name, {}}, "action " + a.label, f);
    }
  }
  return s;
}

std::vector<EventInstance> Animator::enabled(const State& state) const {
  std::vector<EventInstance> out;
  for (auto& ev : machine_->events)
    for (auto& b : bindings(ev))
      if (guardsHold(ev, state, b)) out.push_back({ev.name, b});
  return out;
}

bool Animator::isEnabled(const State& state, const EventInstance& inst) const {
  auto* ev = machine_->findEvent(inst.event);
  if (!ev || ev->parameters.size() != inst.binding.size()) return false;
  for (auto& p : ev->parameters)
    if (!boundIn(inst.binding, p.name)) return false;
  return guardsHold(*ev, state, inst.binding);
}

State Animator::step(const State& state, const EventInstance& inst) const {
  auto* ev = machine_->findEvent(inst.event);
  if (!ev) throw std::invalid_argument("unknown event '" + inst.event + "'");
  State next = state;
  std::map<std::string, std::vector<std::pair<Value, Value>>> points;
  std::string current;
  try {
    for (auto& a : ev->actions) {
      current = a.label;
      if (a.index) {
        points[a.target].emplace_back(eval(*a.index, state, inst.binding), eval(a.rhs, state, inst.binding));
      } else {
        next.vars[a.target] = eval(a.rhs, state, inst.binding);
      }
    }
    for (auto& [var, updates] : points) {
      current = var;
      std::map<Value, Value> byKey;
      for (auto& [k, v] : updates) {
        auto [it, fresh] = byKey.emplace(k, v);
        if (!fresh && !(it->second == v))
          throw EvalFault(EvalFault::Kind::ConflictingUpdate,
                          "conflicting updates of " + var + "(" + toString(k) + ")");
      }
      std::vector<Value> kept;
      for (auto& p : state.at(var).items)
        if (!byKey.count(p.items.at(0))) kept.push_back(p);
      for (auto& [k, v] : byKey) kept.push_back(Value::pair(k, v));
      next.vars[var] = Value::set(std::move(kept));
    }
  } catch (const EvalFault& f) {
    throw InstanceFault(inst, "action " + current, f);
  }
  return next;
}

std::vector<InvariantResult> Animator::checkInvariants(const State& state) const {
  std::vector<InvariantResult> out;
  for (auto& inv : machine_->invariants) {
    try {
      if (!eval(inv.expr, state, {}).asBool()) out.push_back({inv.label, false});
    } catch (const EvalFault&) {
      out.push_back({inv.label, true});
    }
  }
  return out;
}

std::vector<std::string> Animator::violatedLabels(const State& state) const {
  std::vector<std::string> out;
  for (auto& r : checkInvariants(state)) out.push_back(r.label);
  return out;
}

namespace {

std::vector<std::string> labelsOf(const kernel::Machine& m) {
  std::vector<std::string> out;
  for (auto& i : m.invariants) out.push_back(i.label);
  return out;
}

void finishReport(FlawReport& r, const std::vector<Trace>& traces, const std::vector<std::string>& labels) {
  std::sort(r.violations.begin(), r.violations.end());
  r.violations.erase(std::unique(r.violations.begin(), r.violations.end()), r.violations.end());
  std::sort(r.faults.begin(), r.faults.end());
  r.faults.erase(std::unique(r.faults.begin(), r.faults.end()), r.faults.end());
  if (r.nearInvariants.empty()) r.nearInvariants = nearInvariantStats(traces, labels);
  r.nearProperties = findNearProperties(traces, labels);
}

}  // namespace

Exploration Animator::explore() const {
  return config_.mode == SimConfig::Mode::RandomWalk ? randomWalk() : breadthFirst();
}

Exploration Animator::randomWalk() const {
  Exploration out;
  std::mt19937_64 rng(config_.seed);
  std::size_t counter = 0;
  for (std::size_t t = 0; t < config_.maxTraces; ++t) {
    Trace trace;
    trace.machine = machine_->name;
    trace.initial = initialState();
    trace.initialViolations = violatedLabels(trace.initial);
    for (auto& r : checkInvariants(trace.initial))
      out.report.violations.push_back({r.label, "init" + std::to_string(t), {machine_->initialisation.name, {}}, r.faulted});
    State cur = trace.initial;
    std::vector<EventInstance> schedule;
    for (std::size_t i = 0; i < config_.maxSteps; ++i) {
      std::vector<EventInstance> en;
      try {
        en = enabled(cur);
      } catch (const InstanceFault& f) {
        out.report.faults.push_back(f.what());
        break;
      }
      if (en.empty()) {
        out.report.deadlocks.push_back({cur, schedule});
        break;
      }
      // Pick an event uniformly, then one of its enabled bindings, so events
      // with many bindings do not crowd out the others.
      std::map<std::string, std::vector<EventInstance>> byEvent;
      for (auto& inst : en) byEvent[inst.event].push_back(inst);
      std::optional<State> next;
      EventInstance chosen;
      while (!byEvent.empty() && !next) {
        auto ev = std::next(byEvent.begin(), static_cast<std::ptrdiff_t>(rng() % byEvent.size()));
        auto& insts = ev->second;
        auto k = static_cast<std::size_t>(rng() % insts.size());
        chosen = insts[k];
        try {
          next = step(cur, chosen);
        } catch (const InstanceFault& f) {
          out.report.faults.push_back(f.what());
          insts.erase(insts.begin() + static_cast<std::ptrdiff_t>(k));
          if (insts.empty()) byEvent.erase(ev);
        }
      }
      if (!next) break;
      cur = std::move(*next);
      schedule.push_back(chosen);
      auto checks = checkInvariants(cur);
      Step s{chosen, cur, {}};
      for (auto& r : checks) {
        s.violated.push_back(r.label);
        out.report.violations.push_back({r.label, stateId(counter), chosen, r.faulted});
      }
      ++counter;
      trace.steps.push_back(std::move(s));
    }
    out.traces.push_back(std::move(trace));
  }
  out.report.statesVisited = counter;
  finishReport(out.report, out.traces, labelsOf(*machine_));
  return out;
}

Exploration Animator::breadthFirst() const {
  Exploration out;
  struct Node {
    State state;
    std::size_t parent;
    EventInstance via;
    std::size_t depth;
  };
  std::vector<Node> nodes;
  std::map<State, std::size_t> seen;
  auto init = initialState();
  nodes.push_back({init, 0, {}, 0});
  seen.emplace(init, 0);
  for (auto& r : checkInvariants(init))
    out.report.violations.push_back({r.label, "init", {machine_->initialisation.name, {}}, r.faulted});

  auto labels = labelsOf(*machine_);
  std::vector<NearInvariant> stats;
  for (auto& l : labels) stats.push_back({l, 0, 0});

  auto schedule = [&](std::size_t idx) {
    std::vector<EventInstance> s;
    while (idx != 0) {
      s.push_back(nodes[idx].via);
      idx = nodes[idx].parent;
    }
    std::reverse(s.begin(), s.end());
    return s;
  };

  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    auto idx = queue.front();
    queue.pop_front();
    State cur = nodes[idx].state;
    std::vector<EventInstance> en;
    try {
      en = enabled(cur);
    } catch (const InstanceFault& f) {
      out.report.faults.push_back(f.what());
      continue;
    }
    if (en.empty()) {
      out.report.deadlocks.push_back({cur, schedule(idx)});
      continue;
    }
    if (nodes[idx].depth >= config_.maxSteps) continue;
    for (auto& inst : en) {
      State next;
      try {
        next = step(cur, inst);
      } catch (const InstanceFault& f) {
        out.report.faults.push_back(f.what());
        continue;
      }
      if (seen.count(next)) continue;
      if (nodes.size() >= config_.maxStates) {
        out.report.budgetExceeded = true;
        queue.clear();
        break;
      }
      auto id = nodes.size();
      nodes.push_back({next, idx, inst, nodes[idx].depth + 1});
      seen.emplace(next, id);
      queue.push_back(id);
      auto violated = checkInvariants(next);
      for (auto& r : violated)
        out.report.violations.push_back({r.label, stateId(id - 1), inst, r.faulted});
      for (auto& st : stats) {
        ++st.total;
        if (std::none_of(violated.begin(), violated.end(), [&](auto& r) { return r.label == st.label; })) ++st.holds;
      }
    }
  }
  out.report.statesVisited = nodes.size();
  for (auto& w : out.report.deadlocks) out.traces.push_back(replay(w.schedule));
  out.report.nearInvariants = stats;
  finishReport(out.report, out.traces, labels);
  return out;
}

Trace Animator::replay(const std::vector<EventInstance>& schedule) const {
  Trace trace;
  trace.machine = machine_->name;
  trace.initial = initialState();
  trace.initialViolations = violatedLabels(trace.initial);
  State cur = trace.initial;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    auto& inst = schedule[i];
    if (!isEnabled(cur, inst)) throw NotEnabled(i, "schedule entry " + std::to_string(i) + " (" + inst.toString() + ") is not enabled");
    cur = step(cur, inst);
    trace.steps.push_back({inst, cur, violatedLabels(cur)});
  }
  return trace;
}

Trace refineReplay(const Animator& abs, const Trace& concrete, const std::map<std::string, std::string>& eventMap) {
  Trace trace;
  trace.machine = abs.machine().name;
  trace.initial = abs.initialState();
  trace.initialViolations = abs.violatedLabels(trace.initial);
  State cur = trace.initial;
  for (std::size_t i = 0; i < concrete.steps.size(); ++i) {
    auto& cs = concrete.steps[i];
    auto it = eventMap.find(cs.instance.event);
    if (it == eventMap.end()) {
      trace.steps.push_back({{"skip", {}}, cur, abs.violatedLabels(cur)});
      continue;
    }
    auto* ev = abs.machine().findEvent(it->second);
    if (!ev) throw std::invalid_argument("abstract machine has no event '" + it->second + "'");
    EventInstance inst{ev->name, {}};
    for (auto& p : ev->parameters) {
      auto b = std::find_if(cs.instance.binding.begin(), cs.instance.binding.end(),
                            [&](const auto& kv) { return kv.first == p.name; });
      if (b == cs.instance.binding.end())
        throw std::invalid_argument("concrete step " + std::to_string(i) + " does not bind '" + p.name + "'");
      inst.binding.push_back(*b);
    }
    if (!abs.isEnabled(cur, inst))
      throw NotEnabled(i, "abstract " + inst.toString() + " is not enabled at concrete step " + std::to_string(i));
    cur = abs.step(cur, inst);
    trace.steps.push_back({inst, cur, abs.violatedLabels(cur)});
  }
  return trace;
}

std::vector<NearInvariant> nearInvariantStats(const std::vector<Trace>& traces, const std::vector<std::string>& labels) {
  std::vector<NearInvariant> out;
  for (auto& l : labels) {
    NearInvariant n{l, 0, 0};
    for (auto& t : traces)
      for (auto& s : t.steps) {
        ++n.total;
        if (std::find(s.violated.begin(), s.violated.end(), l) == s.violated.end()) ++n.holds;
      }
    out.push_back(n);
  }
  return out;
}

std::vector<NearProperty> findNearProperties(const std::vector<Trace>& traces, const std::vector<std::string>& labels) {
  std::vector<NearProperty> out;
  for (auto& l : labels) {
    std::set<std::string> openers, closers;
    bool anyRun = false;
    for (auto& t : traces) {
      bool bad = std::find(t.initialViolations.begin(), t.initialViolations.end(), l) != t.initialViolations.end();
      for (auto& s : t.steps) {
        bool nowBad = std::find(s.violated.begin(), s.violated.end(), l) != s.violated.end();
        if (nowBad && !bad) {
          openers.insert(s.instance.event);
          anyRun = true;
        }
        if (!nowBad && bad) closers.insert(s.instance.event);
        bad = nowBad;
      }
    }
    if (anyRun && openers.size() == 1 && closers.size() == 1)
      out.push_back({l, *openers.begin(), *closers.begin()});
  }
  return out;
}

namespace {

std::string sortOf(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Integer: return "integer";
    case Type::Kind::Boolean: return "boolean";
    case Type::Kind::Carrier: {
      std::string s = t.carrier;
      for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      return s;
    }
    default: return "value";
  }
}

void flattenType(const Type& t, std::vector<std::string>& sorts) {
  if (t.kind == Type::Kind::Pair) {
    flattenType(t.args[0], sorts);
    flattenType(t.args[1], sorts);
  } else {
    sorts.push_back(sortOf(t));
  }
}

void flattenValue(const Value& v, Row& row) {
  switch (v.kind) {
    case Value::Kind::Pair:
      flattenValue(v.items[0], row);
      flattenValue(v.items[1], row);
      break;
    case Value::Kind::Int: row.emplace_back(v.number); break;
    case Value::Kind::Bool: row.emplace_back(std::string(v.number ? "TRUE" : "FALSE")); break;
    case Value::Kind::Atom: row.emplace_back(v.atom); break;
    case Value::Kind::Set: row.emplace_back(toString(v)); break;
  }
}

std::vector<Column> columnsFor(const std::vector<std::string>& sorts) {
  std::map<std::string, int> counts;
  auto letter = [](const std::string& sort) {
    if (sort == "integer") return std::string("i");
    if (sort == "boolean") return std::string("b");
    return sort.substr(0, 1);
  };
  for (auto& s : sorts) ++counts[letter(s)];
  std::map<std::string, int> used;
  std::vector<Column> out;
  for (auto& s : sorts) {
    auto l = letter(s);
    out.push_back({counts[l] > 1 ? l + std::to_string(++used[l]) : l, s});
  }
  return out;
}

}  // namespace

std::vector<Column> variableColumns(const kernel::Project&, const kernel::Machine&, const kernel::Variable& v) {
  std::vector<std::string> sorts;
  flattenType(v.type.isSet() ? v.type.element() : v.type, sorts);
  return columnsFor(sorts);
}

std::vector<Row> valueRows(const Value& v, const Type& t) {
  std::vector<Row> out;
  if (t.isSet()) {
    for (auto& item : v.items) {
      Row r;
      flattenValue(item, r);
      out.push_back(std::move(r));
    }
  } else {
    Row r;
    flattenValue(v, r);
    out.push_back(std::move(r));
  }
  return out;
}

TableBundle exportTables(const kernel::Project& project, const std::vector<Trace>& traces) {
  TableBundle bundle;
  if (traces.empty()) return bundle;
  auto* m = project.findMachine(traces.front().machine);
  if (!m) throw std::invalid_argument("traces refer to unknown machine '" + traces.front().machine + "'");

  Table state{"state", {{"s", "state"}}, {}};
  Table event{"event", {{"e", "event"}}, {}};
  Table good{"good", {{"s", "state"}}, {}};
  Table eventOf{"event_of", {{"s", "state"}, {"e", "event"}}, {}};
  std::vector<Table> varTables;
  for (auto& v : m->variables) {
    Table t{v.name, {{"s", "state"}}, {}};
    auto cols = variableColumns(project, *m, v);
    t.columns.insert(t.columns.end(), cols.begin(), cols.end());
    varTables.push_back(std::move(t));
  }
  std::vector<std::pair<std::string, std::int64_t>> intConstants;
  {
    Animator a(project, m->name);
    for (auto& cn : m->sees)
      if (auto* ctx = project.findContext(cn))
        for (auto& k : ctx->constants)
          if (k.type.kind == Type::Kind::Integer)
            intConstants.emplace_back(k.name, a.eval(kernel::Expr::ident(k.name, IdentKind::Constant), {}, {}).asInt());
  }
  std::vector<Table> constTables;
  for (auto& [name, value] : intConstants) constTables.push_back({name, {{"s", "state"}, {"i", "integer"}}, {}});

  std::set<std::int64_t> ints{0};
  std::size_t counter = 0;
  for (auto& tr : traces) {
    if (tr.machine != m->name) throw std::invalid_argument("traces from different machines");
    for (auto& s : tr.steps) {
      Cell id = stateId(counter++);
      state.rows.push_back({id});
      eventOf.rows.push_back({id, s.instance.event});
      if (s.violated.empty()) good.rows.push_back({id});
      for (std::size_t k = 0; k < m->variables.size(); ++k) {
        auto& v = m->variables[k];
        for (auto& r : valueRows(s.post.at(v.name), v.type)) {
          for (auto& c : r)
            if (auto* i = std::get_if<std::int64_t>(&c)) ints.insert(*i);
          Row full{id};
          full.insert(full.end(), r.begin(), r.end());
          varTables[k].rows.push_back(std::move(full));
        }
      }
      for (std::size_t k = 0; k < intConstants.size(); ++k) constTables[k].rows.push_back({id, intConstants[k].second});
    }
  }
  for (auto& ev : m->events) event.rows.push_back({ev.name});

  bundle.tables.push_back(std::move(state));
  bundle.tables.push_back(std::move(event));
  std::set<std::string> carriers;
  for (auto& cn : m->sees)
    if (auto* ctx = project.findContext(cn))
      for (auto& cs : ctx->sets) {
        Table t{sortOf(Type::carrierOf(cs.name)), {{"x", sortOf(Type::carrierOf(cs.name))}}, {}};
        t.columns[0].name = t.name.substr(0, 1);
        for (auto& el : cs.elements) t.rows.push_back({el});
        bundle.tables.push_back(std::move(t));
      }
  Table integer{"integer", {{"i", "integer"}}, {}};
  auto lo = std::min<std::int64_t>(0, *ints.begin());
  auto hi = *ints.rbegin();
  for (auto i = lo; i <= hi; ++i) integer.rows.push_back({i});
  bundle.tables.push_back(std::move(integer));
  bundle.tables.push_back(std::move(good));
  bundle.tables.push_back(std::move(eventOf));
  for (auto& t : varTables) bundle.tables.push_back(std::move(t));
  for (auto& t : constTables) bundle.tables.push_back(std::move(t));
  for (auto& t : bundle.tables) t.normalize();
  return bundle;
}

}  // namespace dse::animator
