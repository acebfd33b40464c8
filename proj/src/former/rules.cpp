#include <algorithm>
#include <map>

#include "dse/former/former.hpp"
#include "dse/kernel/exprs.hpp"
#include "dse/surface/surface.hpp"

namespace dse::former {

using kernel::Expr;
using kernel::Op;

std::vector<std::string> DataTable::signature() const {
  std::vector<std::string> out;
  for (auto& c : columns) out.push_back(c.sort);
  return out;
}

bool DataTable::contains(const Row& r) const { return std::binary_search(rows.begin(), rows.end(), r, rowLess); }

std::string PRKind::name() const {
  switch (rule) {
    case Rule::Negate: return "negate";
    case Rule::Size: return "size";
    case Rule::Split: return "split";
    case Rule::Compose: return "compose";
    case Rule::Exists: return "exists";
    case Rule::Sum: return "sum";
    case Rule::Arith: return "arith";
  }
  return "?";
}

namespace {

void normalize(std::vector<Row>& rows) {
  std::sort(rows.begin(), rows.end(), rowLess);
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

std::string joinNames(const std::vector<Column>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i].name;
  return out;
}

std::string cellText(const Cell& c) { return toString(c); }

void inherit(DataTable& out, const DataTable& p) {
  out.variables.insert(p.variables.begin(), p.variables.end());
  out.events.insert(p.events.begin(), p.events.end());
  out.constants.insert(p.constants.begin(), p.constants.end());
  out.failure = out.failure || p.failure;
  out.complexity += p.complexity;
  out.depth = std::max(out.depth, p.depth + 1);
  if (out.layer == Layer::Shared)
    out.layer = p.layer;
  else if (p.layer != Layer::Shared && p.layer != out.layer)
    out.layer = Layer::Mixed;
}

void checkColumn(const DataTable& t, std::size_t c) {
  if (c >= t.arity())
    throw InvalidRule("column " + std::to_string(c) + " does not exist in '" + t.name + "'");
}

std::string valueDefinition(const Expr& term, const std::string& col) {
  return surface::renderExpr(term) + " = " + col;
}

// Groups rows by `group` columns; `fold` reduces each group's rows to a cell.
template <typename Fold>
std::vector<Row> groupBy(const DataTable& t, const std::vector<std::size_t>& group, const Universes& universes,
                         Fold fold, Cell zero) {
  std::map<Row, std::vector<const Row*>, decltype(&rowLess)> groups(&rowLess);
  for (auto& r : t.rows) {
    Row key;
    for (auto c : group) key.push_back(r[c]);
    groups[key].push_back(&r);
  }
  if (group.size() == 1) {
    auto u = universes.find(t.columns[group[0]].sort);
    if (u != universes.end())
      for (auto& x : u->second) groups.try_emplace(Row{x});
  }
  std::vector<Row> out;
  for (auto& [key, members] : groups) {
    Row r = key;
    r.push_back(members.empty() ? zero : fold(members));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

DataTable applyPR(const std::vector<const DataTable*>& parents, const PRKind& kind, const Universes& universes) {
  bool binary = kind.rule == PRKind::Rule::Compose || kind.rule == PRKind::Rule::Arith;
  if (parents.size() != (binary ? 2u : 1u) || std::count(parents.begin(), parents.end(), nullptr))
    throw InvalidRule(kind.name() + " expects " + (binary ? "two parents" : "one parent"));
  const DataTable& p = *parents[0];

  DataTable out;
  out.complexity = 1;
  out.history = History{kind.name(), {}, {}};
  for (auto* x : parents) {
    out.history->parents.push_back(x->name);
    inherit(out, *x);
  }

  switch (kind.rule) {
    case PRKind::Rule::Negate: {
      if (p.arity() != 1) throw InvalidRule("negate applies to unary tables only");
      auto u = universes.find(p.columns[0].sort);
      if (u == universes.end()) throw InvalidRule("no universe for sort '" + p.columns[0].sort + "'");
      out.name = "not(" + p.name + ")";
      out.columns = p.columns;
      for (auto& x : u->second)
        if (!p.contains(Row{x})) out.rows.push_back(Row{x});
      out.failure = p.goodConcept;
      out.history->params = p.columns[0].sort;
      out.definition = "not " + p.definition;
      break;
    }
    case PRKind::Rule::Size: {
      if (kind.columns.empty()) throw InvalidRule("size needs at least one group column");
      for (auto c : kind.columns) checkColumn(p, c);
      for (auto c : kind.columns) out.columns.push_back(p.columns[c]);
      out.columns.push_back({"n", "integer"});
      out.rows = groupBy(p, kind.columns, universes,
                         [](const std::vector<const Row*>& m) { return Cell(static_cast<std::int64_t>(m.size())); },
                         Cell(std::int64_t{0}));
      out.name = "size(" + p.name + (kind.columns == std::vector<std::size_t>{0} ? "" : "," + joinNames(out.columns)) + ")";
      out.history->params = joinNames({out.columns.begin(), out.columns.end() - 1});
      if (kind.columns == std::vector<std::size_t>{0} && p.setTerm) out.term = Expr::unary(Op::Card, *p.setTerm);
      out.definition = out.term ? valueDefinition(*out.term, "n")
                                : "n = card {" + p.definition + "} by " + out.history->params;
      break;
    }
    case PRKind::Rule::Split: {
      checkColumn(p, kind.column);
      if (p.arity() < 2) throw InvalidRule("split needs a table with at least two columns");
      auto& col = p.columns[kind.column];
      out.columns = p.columns;
      out.columns.erase(out.columns.begin() + static_cast<std::ptrdiff_t>(kind.column));
      for (auto& r : p.rows)
        if (r[kind.column] == kind.value) {
          Row x = r;
          x.erase(x.begin() + static_cast<std::ptrdiff_t>(kind.column));
          out.rows.push_back(std::move(x));
        }
      out.name = p.name + "[" + col.name + "=" + cellText(kind.value) + "]";
      out.history->params = col.name + "=" + cellText(kind.value);
      if (col.sort == "event") out.events.insert(cellText(kind.value));
      out.conjuncts = p.conjuncts;
      out.conjuncts.insert(p.arity() == 2 ? "exists(" + p.name + ")" : "exists(" + p.name + "," + col.name + ")");
      out.definition = p.definition + " & " + col.name + " = " + cellText(kind.value);
      break;
    }
    case PRKind::Rule::Exists: {
      if (kind.columns.empty()) throw InvalidRule("exists needs at least one dropped column");
      for (auto c : kind.columns) checkColumn(p, c);
      std::vector<std::size_t> kept;
      for (std::size_t c = 0; c < p.arity(); ++c)
        if (std::find(kind.columns.begin(), kind.columns.end(), c) == kind.columns.end()) kept.push_back(c);
      if (kept.empty()) throw InvalidRule("exists cannot drop every column");
      for (auto c : kept) out.columns.push_back(p.columns[c]);
      for (auto& r : p.rows) {
        Row x;
        for (auto c : kept) x.push_back(r[c]);
        out.rows.push_back(std::move(x));
      }
      std::vector<Column> dropped;
      for (auto c : kind.columns) dropped.push_back(p.columns[c]);
      bool allButKey = kept == std::vector<std::size_t>{0};
      out.name = "exists(" + p.name + (allButKey ? "" : "," + joinNames(dropped)) + ")";
      out.history->params = joinNames(dropped);
      out.definition = "exists " + joinNames(dropped) + ". " + p.definition;
      break;
    }
    case PRKind::Rule::Sum: {
      checkColumn(p, kind.column);
      if (p.columns[kind.column].sort != "integer") throw InvalidRule("sum needs an integer value column");
      for (auto c : kind.columns) {
        checkColumn(p, c);
        if (c == kind.column) throw InvalidRule("sum cannot group by its value column");
      }
      if (kind.columns.empty()) throw InvalidRule("sum needs at least one group column");
      for (auto c : kind.columns) out.columns.push_back(p.columns[c]);
      out.columns.push_back({"b", "integer"});
      auto vc = kind.column;
      out.rows = groupBy(
          p, kind.columns, universes,
          [vc](const std::vector<const Row*>& m) {
            std::int64_t s = 0;
            for (auto* r : m) s += std::get<std::int64_t>((*r)[vc]);
            return Cell(s);
          },
          Cell(std::int64_t{0}));
      bool standard = kind.columns == std::vector<std::size_t>{0} && kind.column + 1 == p.arity();
      out.name = "sum(" + p.name + (standard ? "" : "," + p.columns[vc].name + "," + joinNames({out.columns.begin(), out.columns.end() - 1})) + ")";
      out.history->params = p.columns[vc].name;
      if (standard && p.setTerm && p.arity() >= 3) out.term = Expr::unary(Op::Sigma, *p.setTerm);
      out.definition = out.term ? valueDefinition(*out.term, "b")
                                : "b = sum " + p.columns[vc].name + " of " + p.definition;
      break;
    }
    case PRKind::Rule::Compose: {
      const DataTable& q = *parents[1];
      std::vector<std::pair<std::size_t, std::size_t>> shared;
      std::vector<std::size_t> extra;
      for (std::size_t j = 0; j < q.arity(); ++j) {
        bool found = false;
        for (std::size_t i = 0; i < p.arity() && !found; ++i)
          if (p.columns[i] == q.columns[j]) {
            shared.emplace_back(i, j);
            found = true;
          }
        if (!found) extra.push_back(j);
      }
      if (shared.empty()) throw InvalidRule("compose: '" + p.name + "' and '" + q.name + "' share no column");
      out.columns = p.columns;
      for (auto j : extra) out.columns.push_back(q.columns[j]);
      for (auto& a : p.rows)
        for (auto& b : q.rows) {
          bool match = std::all_of(shared.begin(), shared.end(), [&](auto& s) { return a[s.first] == b[s.second]; });
          if (!match) continue;
          Row r = a;
          for (auto j : extra) r.push_back(b[j]);
          out.rows.push_back(std::move(r));
        }
      out.name = "compose(" + p.name + "," + q.name + ")";
      out.conjuncts = {p.name, q.name};
      out.conjuncts.insert(p.conjuncts.begin(), p.conjuncts.end());
      out.conjuncts.insert(q.conjuncts.begin(), q.conjuncts.end());
      out.definition = p.definition + " & " + q.definition;
      break;
    }
    case PRKind::Rule::Arith: {
      const DataTable& q = *parents[1];
      if (kind.op != '+' && kind.op != '-') throw InvalidRule("arith supports + and - only");
      for (auto* t : {&p, &q})
        if (t->arity() != 2 || t->columns[1].sort != "integer")
          throw InvalidRule("arith needs (key, integer) tables; '" + t->name + "' is not one");
      if (p.columns[0].sort != q.columns[0].sort) throw InvalidRule("arith: key sorts differ");
      auto functional = [](const DataTable& t) {
        for (std::size_t i = 1; i < t.rows.size(); ++i)
          if (t.rows[i][0] == t.rows[i - 1][0]) return false;
        return true;
      };
      if (!functional(p) || !functional(q)) throw InvalidRule("arith needs functional tables");
      out.columns = {p.columns[0], {"b", "integer"}};
      std::size_t j = 0;
      for (auto& a : p.rows) {
        while (j < q.rows.size() && cellLess(q.rows[j][0], a[0])) ++j;
        if (j < q.rows.size() && q.rows[j][0] == a[0]) {
          auto x = std::get<std::int64_t>(a[1]);
          auto y = std::get<std::int64_t>(q.rows[j][1]);
          out.rows.push_back({a[0], Cell(kind.op == '+' ? x + y : x - y)});
        }
      }
      out.name = std::string(kind.op == '+' ? "plus(" : "minus(") + p.name + "," + q.name + ")";
      out.history->params = std::string(1, kind.op);
      if (p.term && q.term) out.term = Expr::binary(kind.op == '+' ? Op::Add : Op::Sub, *p.term, *q.term);
      out.definition = out.term ? valueDefinition(*out.term, "b")
                                : "b = (" + p.definition + ") " + kind.op + " (" + q.definition + ")";
      break;
    }
  }
  normalize(out.rows);
  return out;
}

std::vector<DataTable> background(const TableBundle& bundle, const kernel::Project* project,
                                  const kernel::Machine* machine, Layer layer) {
  std::vector<DataTable> out;
  for (auto& t : bundle.tables) {
    DataTable d;
    d.name = t.name;
    d.columns = t.columns;
    d.rows = t.rows;
    normalize(d.rows);
    d.definition = t.name + "(" + joinNames(t.columns) + ")";
    d.complexity = 1;
    d.universe = t.columns.size() == 1 && t.columns[0].sort == t.name;
    d.layer = d.universe ? Layer::Shared : layer;
    if (machine && project) {
      if (t.name == "good") d.goodConcept = true;
      if (auto* v = machine->findVariable(t.name)) {
        d.variables.insert(t.name);
        (v->type.isSet() ? d.setTerm : d.term) = Expr::ident(t.name, kernel::IdentKind::Variable);
      } else if (t.columns.size() == 2 && project->findConstant(*machine, t.name)) {
        d.constants.insert(t.name);
        d.term = Expr::ident(t.name, kernel::IdentKind::Constant);
      }
      if (d.term) d.definition = valueDefinition(*d.term, t.columns.back().name);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace dse::former
