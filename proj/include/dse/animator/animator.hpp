#pragma once

// Bounded explicit-state simulator for a single machine of a project.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dse/animator/value.hpp"
#include "dse/kernel/model.hpp"
#include "dse/tables.hpp"

namespace dse::animator {

class EvalFault : public std::runtime_error {
 public:
  enum class Kind { OutsideDomain, NonFunctional, ConflictingUpdate, Unbound, Other };

  EvalFault(Kind kind, std::string what) : std::runtime_error(std::move(what)), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct State {
  std::string machine;
  std::map<std::string, Value> vars;

  const Value& at(const std::string& v) const;
  auto operator<=>(const State&) const = default;
};

using Binding = std::vector<std::pair<std::string, Value>>;

struct EventInstance {
  std::string event;
  Binding binding;

  std::string toString() const;
  auto operator<=>(const EventInstance&) const = default;
};

// Raised by enabled() and step() with the instance that faulted.
class InstanceFault : public std::runtime_error {
 public:
  InstanceFault(EventInstance inst, std::string where, const EvalFault& cause);
  const EventInstance& instance() const { return instance_; }
  const std::string& where() const { return where_; }

 private:
  EventInstance instance_;
  std::string where_;
};

class NotEnabled : public std::runtime_error {
 public:
  NotEnabled(std::size_t index, const std::string& what) : std::runtime_error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct Step {
  EventInstance instance;
  State post;
  std::vector<std::string> violated;
};

struct Trace {
  std::string machine;
  State initial;
  std::vector<std::string> initialViolations;
  std::vector<Step> steps;
};

struct SimConfig {
  enum class Mode { RandomWalk, BreadthFirst };

  Mode mode = Mode::RandomWalk;
  std::size_t maxSteps = 50;
  std::size_t maxTraces = 3;
  std::uint64_t seed = 0;
  std::int64_t intMin = 1;
  std::int64_t intMax = 3;
  std::size_t maxStates = 200000;

  void validate() const;
};

struct InvariantResult {
  std::string label;
  bool faulted = false;
};

struct DeadlockWitness {
  State state;
  std::vector<EventInstance> schedule;
};

struct Violation {
  std::string label;
  std::string stateId;
  EventInstance producer;
  bool faulted = false;
  auto operator<=>(const Violation&) const = default;
};

struct NearInvariant {
  std::string label;
  std::size_t holds = 0;
  std::size_t total = 0;
  double ratio() const { return total ? static_cast<double>(holds) / total : 1.0; }
};

struct NearProperty {
  std::string invariant;
  std::string violator;
  std::string restorer;
  auto operator<=>(const NearProperty&) const = default;
};

struct FlawReport {
  std::vector<DeadlockWitness> deadlocks;
  std::vector<Violation> violations;  // sorted, unique
  std::vector<NearInvariant> nearInvariants;
  std::vector<NearProperty> nearProperties;
  std::vector<std::string> faults;
  bool budgetExceeded = false;
  std::size_t statesVisited = 0;

  // deadlock, invariant-violation, step-fault
  std::size_t flawClasses() const;
};

struct Exploration {
  std::vector<Trace> traces;
  FlawReport report;
};

class Animator {
 public:
  Animator(const kernel::Project& project, std::string machine, SimConfig config = {});

  const kernel::Machine& machine() const { return *machine_; }
  const SimConfig& config() const { return config_; }

  Value eval(const kernel::Expr& e, const State& state, const Binding& binding) const;
  State initialState() const;
  std::vector<EventInstance> enabled(const State& state) const;
  bool isEnabled(const State& state, const EventInstance& inst) const;
  State step(const State& state, const EventInstance& inst) const;
  std::vector<InvariantResult> checkInvariants(const State& state) const;
  std::vector<std::string> violatedLabels(const State& state) const;

  Exploration explore() const;
  Trace replay(const std::vector<EventInstance>& schedule) const;

  // Domain of a parameter type under the configured bounds.
  std::vector<Value> domain(const kernel::Type& t) const;

 private:
  Exploration randomWalk() const;
  Exploration breadthFirst() const;
  std::vector<Binding> bindings(const kernel::Event& ev) const;
  bool guardsHold(const kernel::Event& ev, const State& s, const Binding& b) const;

  const kernel::Project* project_;
  const kernel::Machine* machine_;
  SimConfig config_;
  std::map<std::string, Value> constants_;
};

// Replays a concrete trace on an abstract machine, one abstract step per
// concrete step. A concrete event named in `eventMap` fires the mapped abstract
// event with the binding restricted to the abstract parameters; any other step
// stutters as a `skip` step. Throws NotEnabled when a mapped event is refused.
Trace refineReplay(const Animator& abstractAnimator, const Trace& concrete,
                   const std::map<std::string, std::string>& eventMap);

// Near-property detection over traces (see FlawReport::nearProperties).
std::vector<NearProperty> findNearProperties(const std::vector<Trace>& traces,
                                             const std::vector<std::string>& invariantLabels);
std::vector<NearInvariant> nearInvariantStats(const std::vector<Trace>& traces,
                                              const std::vector<std::string>& invariantLabels);

// Concept tables of the traces: sort tables, good, event(s,e), one table per
// variable and per integer constant. Post-states are numbered S0, S1, ...
// across the concatenated traces; initial states are not exported.
TableBundle exportTables(const kernel::Project& project, const std::vector<Trace>& traces);

// Row shape of a variable's values (state column excluded).
std::vector<Column> variableColumns(const kernel::Project& project, const kernel::Machine& m, const kernel::Variable& v);
std::vector<Row> valueRows(const Value& v, const kernel::Type& t);

std::string stateId(std::size_t index);

}  // namespace dse::animator
