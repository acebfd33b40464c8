#include "dse/gateway/json.hpp"

#include <fstream>
#include <sstream>

namespace dse::json {

namespace {

using animator::Value;
using kernel::Expr;
using kernel::Op;

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw BadDocument(std::string("expected an object with '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw BadDocument(std::string("missing field '") + key + "'");
  return *it;
}

std::string str(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw BadDocument(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

template <class T>
T num(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_number()) throw BadDocument(std::string("field '") + key + "' must be a number");
  return v.get<T>();
}

bool flag(const Json& j, const char* key, bool fallback = false) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw BadDocument(std::string("field '") + key + "' must be a boolean");
  return j[key].get<bool>();
}

const Json& arr(const Json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_array()) throw BadDocument(std::string("field '") + key + "' must be an array");
  return v;
}

std::vector<std::string> strings(const Json& j) {
  if (!j.is_array()) throw BadDocument("expected an array of strings");
  std::vector<std::string> out;
  for (auto& x : j) {
    if (!x.is_string()) throw BadDocument("expected an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

template <class C>
Json stringArray(const C& xs) {
  Json a = Json::array();
  for (auto& x : xs) a.push_back(x);
  return a;
}

const char* identKindName(kernel::IdentKind k) {
  switch (k) {
    case kernel::IdentKind::Variable: return "variable";
    case kernel::IdentKind::Constant: return "constant";
    case kernel::IdentKind::Parameter: return "parameter";
    case kernel::IdentKind::Unresolved: break;
  }
  return "unresolved";
}

kernel::IdentKind identKindFromName(const std::string& s) {
  if (s == "variable") return kernel::IdentKind::Variable;
  if (s == "constant") return kernel::IdentKind::Constant;
  if (s == "parameter") return kernel::IdentKind::Parameter;
  return kernel::IdentKind::Unresolved;
}

Op opFromName(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(Op::Ge); ++i)
    if (s == kernel::opName(static_cast<Op>(i))) return static_cast<Op>(i);
  throw BadDocument("unknown operator '" + s + "'");
}

former::Conjecture::Kind conjectureKindFromName(const std::string& s) {
  using K = former::Conjecture::Kind;
  for (K k : {K::Implies, K::Iff, K::NearImplies, K::NearIff})
    if (s == former::kindName(k)) return k;
  throw BadDocument("unknown conjecture kind '" + s + "'");
}

Json cellJson(const Cell& c) {
  if (auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

Cell cellFromJson(const Json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_string()) return j.get<std::string>();
  throw BadDocument("table cells must be integers or strings");
}

Json nearPropertyJson(const animator::NearProperty& p) {
  return {{"invariant", p.invariant}, {"violator", p.violator}, {"restorer", p.restorer}};
}

animator::NearProperty nearPropertyFromJson(const Json& j) {
  return {str(j, "invariant"), str(j, "violator"), str(j, "restorer")};
}

}  // namespace

Json toJson(const Expr& e) {
  Json j;
  j["op"] = kernel::opName(e.op);
  switch (e.op) {
    case Op::IntLit: j["value"] = e.intValue; break;
    case Op::BoolLit: j["value"] = e.boolValue; break;
    case Op::Atom: j["name"] = e.name; break;
    case Op::Ident:
      j["name"] = e.name;
      j["kind"] = identKindName(e.identKind);
      break;
    default: {
      Json args = Json::array();
      for (auto& a : e.args) args.push_back(toJson(a));
      j["args"] = std::move(args);
    }
  }
  return j;
}

Expr exprFromJson(const Json& j) {
  Expr e;
  e.op = opFromName(str(j, "op"));
  switch (e.op) {
    case Op::IntLit: e.intValue = num<std::int64_t>(j, "value"); break;
    case Op::BoolLit: e.boolValue = flag(j, "value"); break;
    case Op::Atom: e.name = str(j, "name"); break;
    case Op::Ident:
      e.name = str(j, "name");
      e.identKind = j.contains("kind") ? identKindFromName(str(j, "kind")) : kernel::IdentKind::Unresolved;
      break;
    default:
      for (auto& a : arr(j, "args")) e.args.push_back(exprFromJson(a));
  }
  return e;
}

Json toJson(const kernel::Type& t) {
  switch (t.kind) {
    case kernel::Type::Kind::Integer: return "INT";
    case kernel::Type::Kind::Boolean: return "BOOL";
    case kernel::Type::Kind::Carrier: return {{"carrier", t.carrier}};
    case kernel::Type::Kind::Pair: return {{"pair", Json::array({toJson(t.args[0]), toJson(t.args[1])})}};
    case kernel::Type::Kind::Set: return {{"set", toJson(t.args[0])}};
  }
  return nullptr;
}

kernel::Type typeFromJson(const Json& j) {
  if (j == "INT") return kernel::Type::integer();
  if (j == "BOOL") return kernel::Type::boolean();
  if (j.is_object() && j.contains("carrier")) return kernel::Type::carrierOf(str(j, "carrier"));
  if (j.is_object() && j.contains("set")) return kernel::Type::setOf(typeFromJson(j["set"]));
  if (j.is_object() && j.contains("pair") && j["pair"].is_array() && j["pair"].size() == 2)
    return kernel::Type::pair(typeFromJson(j["pair"][0]), typeFromJson(j["pair"][1]));
  throw BadDocument("malformed type " + j.dump());
}

Json toJson(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int: return v.number;
    case Value::Kind::Bool: return v.number != 0;
    case Value::Kind::Atom: return v.atom;
    case Value::Kind::Pair: return {{"pair", Json::array({toJson(v.first()), toJson(v.second())})}};
    case Value::Kind::Set: {
      Json a = Json::array();
      for (auto& x : v.items) a.push_back(toJson(x));
      return a;
    }
  }
  return nullptr;
}

Value valueFromJson(const Json& j) {
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_integer()) return Value::integer(j.get<std::int64_t>());
  if (j.is_string()) return Value::atomOf(j.get<std::string>());
  if (j.is_array()) {
    std::vector<Value> xs;
    for (auto& x : j) xs.push_back(valueFromJson(x));
    return Value::set(std::move(xs));
  }
  if (j.is_object() && j.contains("pair") && j["pair"].is_array() && j["pair"].size() == 2)
    return Value::pair(valueFromJson(j["pair"][0]), valueFromJson(j["pair"][1]));
  throw BadDocument("malformed value " + j.dump());
}

Json toJson(const animator::State& s) {
  Json vars = Json::object();
  for (auto& [k, v] : s.vars) vars[k] = toJson(v);
  return {{"machine", s.machine}, {"vars", std::move(vars)}};
}

animator::State stateFromJson(const Json& j) {
  animator::State s;
  s.machine = str(j, "machine");
  const auto& vars = field(j, "vars");
  if (!vars.is_object()) throw BadDocument("field 'vars' must be an object");
  for (auto& [k, v] : vars.items()) s.vars[k] = valueFromJson(v);
  return s;
}

Json toJson(const animator::EventInstance& e) {
  Json b = Json::object();
  for (auto& [k, v] : e.binding) b[k] = toJson(v);
  return {{"event", e.event}, {"binding", std::move(b)}};
}

animator::EventInstance instanceFromJson(const Json& j) {
  animator::EventInstance e;
  e.event = str(j, "event");
  if (j.contains("binding")) {
    const auto& b = j["binding"];
    if (!b.is_object()) throw BadDocument("field 'binding' must be an object");
    for (auto& [k, v] : b.items()) e.binding.emplace_back(k, valueFromJson(v));
  }
  return e;
}

std::vector<animator::EventInstance> scheduleFromJson(const Json& j) {
  if (!j.is_array()) throw BadDocument("a schedule is an array of {event, binding}");
  std::vector<animator::EventInstance> out;
  for (auto& x : j) out.push_back(instanceFromJson(x));
  return out;
}

Json toJson(const animator::Trace& t) {
  Json steps = Json::array();
  for (auto& s : t.steps) {
    Json step = toJson(s.instance);
    step["post"] = toJson(s.post);
    step["violated"] = stringArray(s.violated);
    steps.push_back(std::move(step));
  }
  return {{"machine", t.machine},
          {"initial", toJson(t.initial)},
          {"initialViolations", stringArray(t.initialViolations)},
          {"steps", std::move(steps)}};
}

animator::Trace traceFromJson(const Json& j) {
  animator::Trace t;
  t.machine = str(j, "machine");
  t.initial = stateFromJson(field(j, "initial"));
  if (j.contains("initialViolations")) t.initialViolations = strings(j["initialViolations"]);
  for (auto& s : arr(j, "steps")) {
    animator::Step step;
    step.instance = instanceFromJson(s);
    step.post = stateFromJson(field(s, "post"));
    if (s.contains("violated")) step.violated = strings(s["violated"]);
    t.steps.push_back(std::move(step));
  }
  return t;
}

Json toJson(const animator::FlawReport& r) {
  Json deadlocks = Json::array();
  for (auto& d : r.deadlocks) {
    Json sched = Json::array();
    for (auto& e : d.schedule) sched.push_back(toJson(e));
    deadlocks.push_back({{"state", toJson(d.state)}, {"schedule", std::move(sched)}});
  }
  Json violations = Json::array();
  for (auto& v : r.violations)
    violations.push_back(
        {{"invariant", v.label}, {"state", v.stateId}, {"producer", toJson(v.producer)}, {"faulted", v.faulted}});
  Json near = Json::array();
  for (auto& n : r.nearInvariants) near.push_back({{"invariant", n.label}, {"holds", n.holds}, {"total", n.total}});
  Json props = Json::array();
  for (auto& p : r.nearProperties) props.push_back(nearPropertyJson(p));
  return {{"flawClasses", r.flawClasses()},
          {"deadlocks", std::move(deadlocks)},
          {"violations", std::move(violations)},
          {"nearInvariants", std::move(near)},
          {"nearProperties", std::move(props)},
          {"faults", stringArray(r.faults)},
          {"budgetExceeded", r.budgetExceeded},
          {"statesVisited", r.statesVisited}};
}

animator::FlawReport flawReportFromJson(const Json& j) {
  animator::FlawReport r;
  for (auto& d : arr(j, "deadlocks")) {
    animator::DeadlockWitness w;
    w.state = stateFromJson(field(d, "state"));
    w.schedule = scheduleFromJson(field(d, "schedule"));
    r.deadlocks.push_back(std::move(w));
  }
  for (auto& v : arr(j, "violations"))
    r.violations.push_back({str(v, "invariant"), str(v, "state"), instanceFromJson(field(v, "producer")),
                            flag(v, "faulted")});
  for (auto& n : arr(j, "nearInvariants"))
    r.nearInvariants.push_back({str(n, "invariant"), num<std::size_t>(n, "holds"), num<std::size_t>(n, "total")});
  for (auto& p : arr(j, "nearProperties")) r.nearProperties.push_back(nearPropertyFromJson(p));
  r.faults = strings(field(j, "faults"));
  r.budgetExceeded = flag(j, "budgetExceeded");
  r.statesVisited = num<std::size_t>(j, "statesVisited");
  return r;
}

Json toJson(const Table& t) {
  Json cols = Json::array();
  for (auto& c : t.columns) cols.push_back({{"name", c.name}, {"sort", c.sort}});
  Json rows = Json::array();
  for (auto& r : t.rows) {
    Json row = Json::array();
    for (auto& c : r) row.push_back(cellJson(c));
    rows.push_back(std::move(row));
  }
  return {{"name", t.name}, {"columns", std::move(cols)}, {"rows", std::move(rows)}};
}

Table tableFromJson(const Json& j) {
  Table t;
  t.name = str(j, "name");
  for (auto& c : arr(j, "columns")) t.columns.push_back({str(c, "name"), str(c, "sort")});
  for (auto& r : arr(j, "rows")) {
    if (!r.is_array() || r.size() != t.columns.size())
      throw BadDocument("row width does not match the columns of table '" + t.name + "'");
    Row row;
    for (auto& c : r) row.push_back(cellFromJson(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Json toJson(const TableBundle& b) {
  Json tables = Json::array();
  for (auto& t : b.tables) tables.push_back(toJson(t));
  return {{"objectSort", b.objectSort}, {"tables", std::move(tables)}};
}

TableBundle bundleFromJson(const Json& j) {
  TableBundle b;
  if (j.contains("objectSort")) b.objectSort = str(j, "objectSort");
  for (auto& t : arr(j, "tables")) b.tables.push_back(tableFromJson(t));
  return b;
}

Json toJson(const former::Conjecture& c) {
  Json align = Json::array();
  for (auto& [a, b] : c.alignment) align.push_back(Json::array({a, b}));
  Json j = {{"kind", former::kindName(c.kind)},
            {"lhs", c.lhs},
            {"rhs", c.rhs},
            {"support",
             {{"satisfying", c.support.satisfying}, {"total", c.support.total}, {"ratio", c.support.ratio()}}},
            {"tags", stringArray(c.tags)},
            {"definition", c.definition},
            {"alignment", std::move(align)},
            {"index", c.index}};
  if (c.predicate) {
    j["predicate"] = toJson(*c.predicate);
    j["predicateText"] = surface::renderExpr(*c.predicate);
  } else {
    j["predicate"] = nullptr;
  }
  return j;
}

former::Conjecture conjectureFromJson(const Json& j) {
  former::Conjecture c;
  c.kind = conjectureKindFromName(str(j, "kind"));
  c.lhs = str(j, "lhs");
  c.rhs = str(j, "rhs");
  const auto& s = field(j, "support");
  c.support.satisfying = num<std::size_t>(s, "satisfying");
  c.support.total = num<std::size_t>(s, "total");
  for (auto& t : strings(field(j, "tags"))) c.tags.insert(t);
  c.definition = str(j, "definition");
  if (j.contains("alignment"))
    for (auto& a : j["alignment"]) {
      if (!a.is_array() || a.size() != 2) throw BadDocument("alignment entries are pairs of column names");
      c.alignment.emplace_back(a[0].get<std::string>(), a[1].get<std::string>());
    }
  if (j.contains("index")) c.index = num<std::size_t>(j, "index");
  if (j.contains("predicate") && !j["predicate"].is_null()) c.predicate = exprFromJson(j["predicate"]);
  return c;
}

Json toJson(const former::AnalysisReport& r) {
  Json conj = Json::array();
  for (auto& c : r.conjectures) conj.push_back(toJson(c));
  Json glue = Json::array();
  for (auto& c : r.gluing) glue.push_back(toJson(c));
  Json adapt = Json::array();
  for (auto& a : r.adaptations)
    adapt.push_back({{"invariant", a.invariant},
                     {"predicate", toJson(a.predicate)},
                     {"rendered", a.rendered},
                     {"conjecture", a.conjecture}});
  Json props = Json::array();
  for (auto& p : r.nearProperties) props.push_back(nearPropertyJson(p));
  return {{"focus", {{"events", stringArray(r.focusEvents)}, {"variables", stringArray(r.focusVariables)}}},
          {"failure", {{"events", stringArray(r.failureEvents)}, {"variables", stringArray(r.failureVariables)}}},
          {"conjectures", std::move(conj)},
          {"adaptations", std::move(adapt)},
          {"gluing", std::move(glue)},
          {"nearProperties", std::move(props)},
          {"budgetExceeded", r.budgetExceeded}};
}

former::AnalysisReport analysisFromJson(const Json& j) {
  former::AnalysisReport r;
  const auto& focus = field(j, "focus");
  for (auto& s : strings(field(focus, "events"))) r.focusEvents.insert(s);
  for (auto& s : strings(field(focus, "variables"))) r.focusVariables.insert(s);
  const auto& fail = field(j, "failure");
  for (auto& s : strings(field(fail, "events"))) r.failureEvents.insert(s);
  for (auto& s : strings(field(fail, "variables"))) r.failureVariables.insert(s);
  for (auto& c : arr(j, "conjectures")) r.conjectures.push_back(conjectureFromJson(c));
  for (auto& a : arr(j, "adaptations"))
    r.adaptations.push_back({str(a, "invariant"), exprFromJson(field(a, "predicate")), str(a, "rendered"),
                             num<std::size_t>(a, "conjecture")});
  for (auto& c : arr(j, "gluing")) r.gluing.push_back(conjectureFromJson(c));
  for (auto& p : arr(j, "nearProperties")) r.nearProperties.push_back(nearPropertyFromJson(p));
  r.budgetExceeded = flag(j, "budgetExceeded");
  return r;
}

Json toJson(const kernel::Span& s) {
  return {{"file", s.file}, {"line", s.line}, {"column", s.column}, {"offset", s.offset}, {"length", s.length}};
}

Json toJson(const kernel::Diagnostic& d) {
  Json j = {{"code", kernel::kindName(d.kind)}, {"message", d.message}};
  if (d.span.valid()) j["span"] = toJson(d.span);
  return j;
}

Json toJson(const kernel::EditScript& script) {
  Json a = Json::array();
  for (auto& e : script)
    a.push_back({{"kind", kernel::kindName(e.kind)},
                 {"target", kernel::targetName(e.target)},
                 {"machine", e.machine},
                 {"name", e.name},
                 {"description", e.describe()}});
  return a;
}

Json toJson(const std::vector<surface::SourceUnit>& units, const std::string& root) {
  Json files = Json::array();
  for (auto& u : units) files.push_back({{"path", u.path}, {"text", u.text}});
  return {{"root", root}, {"files", std::move(files)}};
}

std::vector<surface::SourceUnit> sourcesFromJson(const Json& j) {
  std::vector<surface::SourceUnit> out;
  for (auto& f : arr(j, "files")) out.push_back({str(f, "path"), str(f, "text")});
  if (out.empty()) throw BadDocument("no source files given");
  return out;
}

Json toJson(const forge::ProvenanceStep& s) { return {{"op", s.op}, {"args", s.args}}; }

Json toJson(const forge::Focus& f) {
  return {{"events", stringArray(f.events)},
          {"variables", stringArray(f.variables)},
          {"invariants", stringArray(f.invariants)}};
}

forge::Focus focusFromJson(const Json& j) {
  if (!j.is_object()) throw BadDocument("focus must be an object");
  forge::Focus f;
  if (j.contains("events"))
    for (auto& s : strings(j["events"])) f.events.insert(s);
  if (j.contains("variables"))
    for (auto& s : strings(j["variables"])) f.variables.insert(s);
  if (j.contains("invariants"))
    for (auto& s : strings(j["invariants"])) f.invariants.insert(s);
  return f;
}

Json readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadDocument("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw BadDocument(path + ": " + e.what());
  }
}

void writeFile(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace dse::json
