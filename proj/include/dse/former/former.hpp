#pragma once

// Theory formation over concept tables: production rules, conjecture making
// and the analysis templates used to steer model generation.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dse/animator/animator.hpp"
#include "dse/kernel/model.hpp"
#include "dse/tables.hpp"

namespace dse::former {

struct History {
  std::string rule;
  std::string params;
  std::vector<std::string> parents;
};

enum class Layer { Shared, Abstract, Concrete, Mixed };

struct DataTable {
  std::string name;
  std::vector<Column> columns;
  std::vector<Row> rows;  // sorted, duplicate-free
  std::string definition;
  std::optional<History> history;  // absent for background tables

  // Analysis metadata.
  std::set<std::string> variables;
  std::set<std::string> events;
  std::set<std::string> constants;
  bool goodConcept = false;         // the good(s) table
  bool failure = false;             // derived from the complement of good
  std::optional<kernel::Expr> term; // per-object value, for (key, value) tables
  std::optional<kernel::Expr> setTerm;  // per-object set, for set-valued variable tables
  std::set<std::string> conjuncts;  // tables that hold wherever this one does, by construction
  Layer layer = Layer::Shared;
  int depth = 0;
  int complexity = 1;
  bool universe = false;  // a sort table
  bool expandable = true;

  std::size_t arity() const { return columns.size(); }
  std::vector<std::string> signature() const;
  bool contains(const Row& r) const;
  Table table() const { return {name, columns, rows}; }
};

// Elements of each sort, taken from the unary sort tables.
using Universes = std::map<std::string, std::vector<Cell>>;

struct PRKind {
  enum class Rule { Negate, Size, Split, Compose, Exists, Sum, Arith };

  Rule rule = Rule::Negate;
  std::vector<std::size_t> columns;  // size/sum: group columns; exists: dropped columns
  std::size_t column = 0;            // split: tested column; sum: value column
  Cell value;                        // split constant
  char op = '+';                     // arith

  static PRKind negate() { return {Rule::Negate}; }
  static PRKind size(std::vector<std::size_t> group) { return {Rule::Size, std::move(group)}; }
  static PRKind split(std::size_t col, Cell v) { return {Rule::Split, {}, col, std::move(v)}; }
  static PRKind compose() { return {Rule::Compose}; }
  static PRKind exists(std::vector<std::size_t> dropped) { return {Rule::Exists, std::move(dropped)}; }
  static PRKind sum(std::size_t valueCol, std::vector<std::size_t> group) {
    return {Rule::Sum, std::move(group), valueCol};
  }
  static PRKind arith(char op) { return {Rule::Arith, {}, 0, {}, op}; }

  std::string name() const;
};

class InvalidRule : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Column indices are 0-based. Size and sum grouped by a key whose sort has a
// universe are zero-filled over that universe.
DataTable applyPR(const std::vector<const DataTable*>& parents, const PRKind& kind, const Universes& universes);

struct Support {
  std::size_t satisfying = 0;
  std::size_t total = 0;
  double ratio() const { return total ? static_cast<double>(satisfying) / total : 0.0; }
};

struct Conjecture {
  enum class Kind { Implies, Iff, NearImplies, NearIff };

  Kind kind = Kind::Implies;
  std::string lhs;
  std::string rhs;
  std::vector<std::pair<std::string, std::string>> alignment;
  Support support;
  std::set<std::string> tags;
  std::string definition;
  std::optional<kernel::Expr> predicate;  // value equation, when both sides carry terms
  std::size_t index = 0;

  bool exact() const { return kind == Kind::Implies || kind == Kind::Iff; }
};

const char* kindName(Conjecture::Kind k);

struct FormerConfig {
  int depth = 2;
  std::vector<std::string> priority;
  std::set<PRKind::Rule> rules{PRKind::Rule::Negate, PRKind::Rule::Size,   PRKind::Rule::Split,
                               PRKind::Rule::Compose, PRKind::Rule::Exists, PRKind::Rule::Sum,
                               PRKind::Rule::Arith};
  double theta = 0.4;
  std::size_t maxTables = 20000;
  int maxComplexity = 5;  // definition size: one per rule application plus background leaves
  std::string objectSort = "state";

  void validate() const;
};

struct Theory {
  std::vector<DataTable> tables;
  std::vector<Conjecture> conjectures;
  bool budgetExceeded = false;

  const DataTable* find(const std::string& name) const;
};

// Background tables of a bundle with analysis metadata. When `machine` is
// given, variable, constant, good and event tables are recognised.
std::vector<DataTable> background(const TableBundle& bundle, const kernel::Project* project = nullptr,
                                  const kernel::Machine* machine = nullptr, Layer layer = Layer::Shared);

Theory formTheory(const TableBundle& bundle, const FormerConfig& config, const kernel::Project* project = nullptr,
                  const kernel::Machine* machine = nullptr);
Theory formTheory(std::vector<DataTable> background, const FormerConfig& config);

struct Adaptation {
  std::string invariant;  // label of the user invariant being adapted
  kernel::Expr predicate;
  std::string rendered;
  std::size_t conjecture = 0;
};

struct AnalysisReport {
  std::vector<Conjecture> conjectures;  // ranked
  std::set<std::string> focusEvents;
  std::set<std::string> focusVariables;
  // Elements named by the direct failure templates: an event concept implying
  // the failure concept, or the failure concept related to a variable concept.
  std::set<std::string> failureEvents;
  std::set<std::string> failureVariables;
  std::vector<Adaptation> adaptations;
  std::vector<Conjecture> gluing;
  std::vector<animator::NearProperty> nearProperties;
  bool budgetExceeded = false;
};

AnalysisReport classify(const Theory& theory, const kernel::Project& project, const kernel::Machine& machine,
                        const std::vector<animator::NearProperty>& nearProperties = {});

class MismatchedStates : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Gluing conjectures between the variables of an abstract machine and those
// of a concrete one, from bundles of step-paired traces.
std::vector<Conjecture> findGluing(const TableBundle& abstractBundle, const kernel::Project& abstractProject,
                                   const kernel::Machine& abstractMachine, const TableBundle& concreteBundle,
                                   const kernel::Project& concreteProject, const kernel::Machine& concreteMachine,
                                   const FormerConfig& config = {});

}  // namespace dse::former
