#include <algorithm>
#include <map>
#include <unordered_map>

#include "dse/former/former.hpp"
#include "dse/kernel/exprs.hpp"
#include "dse/surface/surface.hpp"

namespace dse::former {

using kernel::Expr;
using kernel::Op;

const char* kindName(Conjecture::Kind k) {
  switch (k) {
    case Conjecture::Kind::Implies: return "implies";
    case Conjecture::Kind::Iff: return "iff";
    case Conjecture::Kind::NearImplies: return "near-implies";
    case Conjecture::Kind::NearIff: return "near-iff";
  }
  return "?";
}

void FormerConfig::validate() const {
  if (depth < 1) throw std::invalid_argument("theory formation depth must be at least 1");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("near threshold must lie in (0, 1]");
}

const DataTable* Theory::find(const std::string& name) const {
  for (auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

namespace {

using Rule = PRKind::Rule;

std::string classKey(const DataTable& t) {
  std::string k;
  for (auto& s : t.signature()) k += s + ",";
  k += "|";
  for (auto& r : t.rows) {
    for (auto& c : r) k += (c.index() ? "s" : "i") + toString(c) + ",";
    k += ";";
  }
  return k;
}

std::size_t intersectionSize(const DataTable& a, const DataTable& b) {
  std::size_t n = 0;
  auto i = a.rows.begin();
  auto j = b.rows.begin();
  while (i != a.rows.end() && j != b.rows.end()) {
    if (rowLess(*i, *j))
      ++i;
    else if (rowLess(*j, *i))
      ++j;
    else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

class Former {
 public:
  Former(const FormerConfig& config) : config_(config) {}

  Theory run(std::vector<DataTable> background) {
    for (auto& t : background)
      if (t.universe) universes_[t.columns[0].sort] = [&] {
          std::vector<Cell> xs;
          for (auto& r : t.rows) xs.push_back(r[0]);
          return xs;
        }();
    std::vector<std::size_t> frontier;
    for (auto& t : background) {
      t.depth = 0;
      if (auto id = add(std::move(t))) frontier.push_back(*id);
    }
    for (int d = 1; d <= config_.depth && !theory_.budgetExceeded; ++d) {
      prioritise(frontier);
      std::vector<std::size_t> next;
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < theory_.tables.size(); ++i)
        if (theory_.tables[i].expandable && keyed(theory_.tables[i])) pool.push_back(i);
      std::set<std::size_t> inFrontier(frontier.begin(), frontier.end());

      for (auto t : frontier) {
        if (theory_.budgetExceeded) break;
        if (!keyed(theory_.tables[t])) continue;
        for (auto& k : unaryCandidates(theory_.tables[t])) tryApply({t}, k, next);
        for (auto u : pool) {
          if (theory_.budgetExceeded) break;
          if (u == t || (inFrontier.count(u) && u > t)) continue;
          binary(t, u, next);
        }
      }
      frontier = std::move(next);
    }
    return std::move(theory_);
  }

 private:
  bool keyed(const DataTable& t) const {
    return !t.universe && !t.columns.empty() && t.columns[0].sort == config_.objectSort;
  }

  bool enabled(Rule r) const { return config_.rules.count(r) > 0; }

  void prioritise(std::vector<std::size_t>& ids) const {
    if (config_.priority.empty()) return;
    auto isPriority = [&](std::size_t id) {
      auto& t = theory_.tables[id];
      for (auto& p : config_.priority) {
        if (t.name == p || t.variables.count(p) || t.events.count(p)) return true;
        if (t.history && std::find(t.history->parents.begin(), t.history->parents.end(), p) != t.history->parents.end())
          return true;
      }
      return false;
    };
    std::stable_partition(ids.begin(), ids.end(), isPriority);
  }

  std::vector<PRKind> unaryCandidates(const DataTable& t) const {
    std::vector<PRKind> out;
    bool negated = t.history && t.history->rule == "negate";
    if (enabled(Rule::Negate) && t.arity() == 1 && !negated && !t.failure) out.push_back(PRKind::negate());
    if (t.arity() >= 2) {
      if (enabled(Rule::Exists)) {
        std::vector<std::size_t> all;
        for (std::size_t c = 1; c < t.arity(); ++c) all.push_back(c);
        out.push_back(PRKind::exists(all));
        if (t.arity() >= 3)
          for (std::size_t c = 1; c < t.arity(); ++c) out.push_back(PRKind::exists({c}));
      }
      if (enabled(Rule::Split))
        for (std::size_t c = 1; c < t.arity(); ++c) {
          std::vector<Cell> values;
          for (auto& r : t.rows) values.push_back(r[c]);
          std::sort(values.begin(), values.end(), cellLess);
          values.erase(std::unique(values.begin(), values.end()), values.end());
          if (values.size() > kMaxSplitValues) continue;
          for (auto& v : values) out.push_back(PRKind::split(c, v));
        }
      bool functional = true;
      for (std::size_t i = 1; i < t.rows.size() && functional; ++i) functional = t.rows[i][0] != t.rows[i - 1][0];
      if (enabled(Rule::Size) && !(functional && t.arity() == 2)) out.push_back(PRKind::size({0}));
      if (enabled(Rule::Sum) && t.arity() >= 3 && t.columns.back().sort == "integer")
        out.push_back(PRKind::sum(t.arity() - 1, {0}));
    }
    return out;
  }

  void binary(std::size_t t, std::size_t u, std::vector<std::size_t>& next) {
    auto& a = theory_.tables[t];
    auto& b = theory_.tables[u];
    if (enabled(Rule::Compose) && (a.arity() == 1 || b.arity() == 1) && !a.conjuncts.count(b.name) &&
        !b.conjuncts.count(a.name)) {
      auto first = std::min(t, u), second = std::max(t, u);
      // Keep the wider table on the left so the key stays in column 0.
      if (theory_.tables[first].arity() < theory_.tables[second].arity()) std::swap(first, second);
      tryApply({first, second}, PRKind::compose(), next);
    }
    auto scalar = [](const DataTable& x) { return x.arity() == 2 && x.columns[1].sort == "integer"; };
    if (enabled(Rule::Arith) && scalar(theory_.tables[t]) && scalar(theory_.tables[u])) {
      tryApply({std::min(t, u), std::max(t, u)}, PRKind::arith('+'), next);
      tryApply({t, u}, PRKind::arith('-'), next);
      tryApply({u, t}, PRKind::arith('-'), next);
    }
  }

  void tryApply(std::vector<std::size_t> ids, const PRKind& kind, std::vector<std::size_t>& next) {
    if (theory_.tables.size() >= config_.maxTables) {
      theory_.budgetExceeded = true;
      return;
    }
    std::vector<const DataTable*> parents;
    for (auto i : ids) parents.push_back(&theory_.tables[i]);
    DataTable out;
    try {
      out = applyPR(parents, kind, universes_);
    } catch (const InvalidRule&) {
      return;
    }
    if (names_.count(out.name) || out.complexity > config_.maxComplexity) return;
    if (auto id = add(std::move(out))) next.push_back(*id);
  }

  bool isUniverse(const DataTable& t) const {
    if (t.arity() != 1) return false;
    auto u = universes_.find(t.columns[0].sort);
    return u != universes_.end() && u->second.size() == t.rows.size();
  }

  static bool trivial(const DataTable& l, const DataTable& r) {
    return l.conjuncts.count(r.name) || r.conjuncts.count(l.name);
  }

  // Registers a table and emits its conjectures. Returns the id when the
  // table opens a new equivalence class and may be expanded.
  std::optional<std::size_t> add(DataTable t) {
    if (t.universe) {
      names_.insert(t.name);
      t.expandable = false;
      theory_.tables.push_back(std::move(t));
      return std::nullopt;
    }
    if (t.rows.empty() || isUniverse(t)) return std::nullopt;
    auto id = theory_.tables.size();
    names_.insert(t.name);
    auto key = classKey(t);
    auto cls = classes_.find(key);
    if (cls != classes_.end()) {
      t.expandable = false;
      theory_.tables.push_back(std::move(t));
      for (auto member : cls->second) emitIff(member, id);
      cls->second.push_back(id);
      return std::nullopt;
    }
    theory_.tables.push_back(std::move(t));
    auto& n = theory_.tables[id];
    auto& peers = bySignature_[n.signature()];
    for (auto e : peers) compare(e, id);
    peers.push_back(id);
    classes_[key] = {id};
    return id;
  }

  Conjecture make(Conjecture::Kind kind, std::size_t l, std::size_t r, Support s) {
    auto& L = theory_.tables[l];
    auto& R = theory_.tables[r];
    Conjecture c;
    c.kind = kind;
    c.lhs = L.name;
    c.rhs = R.name;
    for (std::size_t i = 0; i < L.arity(); ++i) c.alignment.emplace_back(L.columns[i].name, R.columns[i].name);
    c.support = s;
    bool iff = kind == Conjecture::Kind::Iff || kind == Conjecture::Kind::NearIff;
    c.definition = L.definition + (iff ? " <=> " : " => ") + R.definition;
    if (kind == Conjecture::Kind::Iff && L.term && R.term) c.predicate = Expr::binary(Op::Eq, *R.term, *L.term);
    c.index = theory_.conjectures.size();
    return c;
  }

  void emitIff(std::size_t a, std::size_t b) {
    auto& A = theory_.tables[a];
    auto& B = theory_.tables[b];
    if (trivial(A, B)) return;
    theory_.conjectures.push_back(make(Conjecture::Kind::Iff, a, b, {A.rows.size(), A.rows.size()}));
  }

  // `e` existing, `n` new; rows differ.
  void compare(std::size_t e, std::size_t n) {
    auto& E = theory_.tables[e];
    auto& N = theory_.tables[n];
    auto common = intersectionSize(E, N);
    auto u = E.rows.size() + N.rows.size() - common;
    auto emit = [&](Conjecture::Kind k, std::size_t l, std::size_t r, Support s) {
      if (!trivial(theory_.tables[l], theory_.tables[r])) theory_.conjectures.push_back(make(k, l, r, s));
    };
    bool nInE = common == N.rows.size();
    bool eInN = common == E.rows.size();
    if (nInE) emit(Conjecture::Kind::Implies, n, e, {common, N.rows.size()});
    if (eInN) emit(Conjecture::Kind::Implies, e, n, {common, E.rows.size()});
    auto ratio = [](std::size_t a, std::size_t b) { return static_cast<double>(a) / static_cast<double>(b); };
    if (common == 0) return;
    if (!nInE && ratio(common, N.rows.size()) >= config_.theta)
      emit(Conjecture::Kind::NearImplies, n, e, {common, N.rows.size()});
    if (!eInN && ratio(common, E.rows.size()) >= config_.theta)
      emit(Conjecture::Kind::NearImplies, e, n, {common, E.rows.size()});
    if (ratio(common, u) >= config_.theta) emit(Conjecture::Kind::NearIff, e, n, {common, u});
  }

  static constexpr std::size_t kMaxSplitValues = 12;

  const FormerConfig& config_;
  Theory theory_;
  Universes universes_;
  std::set<std::string> names_;
  std::unordered_map<std::string, std::vector<std::size_t>> classes_;
  std::map<std::vector<std::string>, std::vector<std::size_t>> bySignature_;
};

std::set<std::string> symbolsOf(const DataTable& t) {
  std::set<std::string> s = t.variables;
  s.insert(t.constants.begin(), t.constants.end());
  return s;
}

std::set<std::string> symbolsOf(const Expr& e) {
  std::set<std::string> s;
  kernel::collectIdentifiers(e, kernel::IdentKind::Variable, s);
  kernel::collectIdentifiers(e, kernel::IdentKind::Constant, s);
  return s;
}

bool isFailureConcept(const DataTable& t) {
  return t.failure && t.history && t.history->rule == "negate" && t.depth <= 1;
}

}  // namespace

Theory formTheory(std::vector<DataTable> background, const FormerConfig& config) {
  config.validate();
  return Former(config).run(std::move(background));
}

Theory formTheory(const TableBundle& bundle, const FormerConfig& config, const kernel::Project* project,
                  const kernel::Machine* machine) {
  if (bundle.tables.empty()) throw std::invalid_argument("empty table bundle");
  auto cfg = config;
  cfg.objectSort = bundle.objectSort;
  return formTheory(background(bundle, project, machine), cfg);
}

AnalysisReport classify(const Theory& theory, const kernel::Project& project, const kernel::Machine& machine,
                        const std::vector<animator::NearProperty>& nearProperties) {
  AnalysisReport report;
  report.nearProperties = nearProperties;
  report.budgetExceeded = theory.budgetExceeded;
  std::map<std::string, const DataTable*> byName;
  for (auto& t : theory.tables) byName.emplace(t.name, &t);

  std::vector<std::pair<std::string, std::set<std::string>>> userInvariants;
  for (auto& inv : machine.invariants)
    if (inv.userGiven) userInvariants.emplace_back(inv.label, symbolsOf(inv.expr));

  for (auto c : theory.conjectures) {
    auto& L = *byName.at(c.lhs);
    auto& R = *byName.at(c.rhs);
    if (L.failure || R.failure) {
      c.tags.insert("failure-linked");
      if (c.exact()) {
        for (auto* t : {&L, &R}) {
          report.focusEvents.insert(t->events.begin(), t->events.end());
          report.focusVariables.insert(t->variables.begin(), t->variables.end());
        }
        // Direct templates: event => failure, failure => variable.
        bool iff = c.kind == Conjecture::Kind::Iff;
        if (isFailureConcept(R) && L.depth <= 1 && !L.failure) report.failureEvents.insert(L.events.begin(), L.events.end());
        if (isFailureConcept(L) && R.depth <= 1 && !R.failure)
          report.failureVariables.insert(R.variables.begin(), R.variables.end());
        if (iff && isFailureConcept(R) && L.depth <= 1 && !L.failure)
          report.failureVariables.insert(L.variables.begin(), L.variables.end());
        if (iff && isFailureConcept(L) && R.depth <= 1 && !R.failure)
          report.failureEvents.insert(R.events.begin(), R.events.end());
      }
    }
    if (c.predicate && c.kind == Conjecture::Kind::Iff) {
      auto symbols = symbolsOf(L);
      auto rs = symbolsOf(R);
      symbols.insert(rs.begin(), rs.end());
      for (auto& [label, inv] : userInvariants) {
        if (inv.empty() || !std::includes(symbols.begin(), symbols.end(), inv.begin(), inv.end()) ||
            symbols.size() == inv.size())
          continue;
        c.tags.insert("invariant-adaptation");
        report.adaptations.push_back({label, *c.predicate, surface::renderExpr(*c.predicate), c.index});
        break;
      }
    }
    auto layered = [](const DataTable& a, const DataTable& b) {
      return a.layer == Layer::Abstract && b.layer == Layer::Concrete && !a.variables.empty() && !b.variables.empty();
    };
    if (layered(L, R) || layered(R, L)) {
      c.tags.insert("gluing");
      if (c.kind == Conjecture::Kind::Iff) report.gluing.push_back(c);
    }
    if (c.tags.empty()) c.tags.insert("plain");
    report.conjectures.push_back(std::move(c));
  }

  for (auto& ev : report.focusEvents)
    if (auto* e = machine.findEvent(ev))
      for (auto& g : e->guards) {
        auto vs = kernel::variablesOf(g.expr);
        report.focusVariables.insert(vs.begin(), vs.end());
      }

  auto rank = [](const Conjecture& c) {
    if (c.tags.count("failure-linked")) return 0;
    if (c.tags.count("invariant-adaptation")) return 1;
    if (c.tags.count("gluing")) return 2;
    return 3;
  };
  auto size = [&](const Conjecture& c) { return byName.at(c.lhs)->complexity + byName.at(c.rhs)->complexity; };
  auto order = [&](const Conjecture& a, const Conjecture& b) {
    if (rank(a) != rank(b)) return rank(a) < rank(b);
    if (a.exact() != b.exact()) return a.exact();
    if (a.support.ratio() != b.support.ratio()) return a.support.ratio() > b.support.ratio();
    if (size(a) != size(b)) return size(a) < size(b);
    return a.index < b.index;
  };
  std::stable_sort(report.conjectures.begin(), report.conjectures.end(), order);
  std::stable_sort(report.gluing.begin(), report.gluing.end(), order);
  return report;
}

std::vector<Conjecture> findGluing(const TableBundle& abstractBundle, const kernel::Project& abstractProject,
                                   const kernel::Machine& abstractMachine, const TableBundle& concreteBundle,
                                   const kernel::Project& concreteProject, const kernel::Machine& concreteMachine,
                                   const FormerConfig& config) {
  auto* as = abstractBundle.find(abstractBundle.objectSort);
  auto* cs = concreteBundle.find(concreteBundle.objectSort);
  if (!as || !cs || as->rows != cs->rows)
    throw MismatchedStates("abstract and concrete traces do not cover the same states");
  if (abstractMachine.variables.empty()) return {};

  auto concrete = background(concreteBundle, &concreteProject, &concreteMachine, Layer::Concrete);
  auto abstract = background(abstractBundle, &abstractProject, &abstractMachine, Layer::Abstract);
  std::set<std::string> taken;
  for (auto& t : concrete) taken.insert(t.name);
  std::vector<DataTable> merged;
  for (auto& t : abstract) {
    if (t.universe) {
      auto it = std::find_if(concrete.begin(), concrete.end(), [&](auto& c) { return c.name == t.name; });
      if (it == concrete.end()) {
        merged.push_back(t);
      } else {
        // Same sort on both sides: keep one universe covering both.
        it->rows.insert(it->rows.end(), t.rows.begin(), t.rows.end());
        std::sort(it->rows.begin(), it->rows.end(), rowLess);
        it->rows.erase(std::unique(it->rows.begin(), it->rows.end()), it->rows.end());
      }
      continue;
    }
    if (taken.count(t.name)) {
      if (t.definition.rfind(t.name, 0) == 0) t.definition = "abs_" + t.definition;
      t.name = "abs_" + t.name;
    }
    merged.push_back(t);
  }
  merged.insert(merged.end(), concrete.begin(), concrete.end());

  auto cfg = config;
  cfg.objectSort = concreteBundle.objectSort;
  auto theory = formTheory(std::move(merged), cfg);
  auto report = classify(theory, concreteProject, concreteMachine);
  return report.gluing;
}

}  // namespace dse::former
