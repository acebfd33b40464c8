#pragma once

// Model transformation: atomic operators, conditions and pipeline combinators.

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dse/kernel/model.hpp"

namespace dse::forge {

enum class OperatorKind {
  DeleteArgument,
  DeleteWitness,
  DeleteGuard,
  DeleteVariable,
  DeleteInvariant,
  DeleteAction,
  NegateGuard,
  NegateAction,
  MergeEvents,
  CombineEvents,
  UndoActions,
  InsertAbstractLayer,
  AddAbstractLayer,
  AddSeesContextToAbstractLayer,
  MoveVariableToAbstractLayer,
  MergeVariable,
};

enum class ConditionKind {
  HasAbstractLayer,
  HasVariableOfTypePartialFunction,
  HasVariableOfTypePowerset,
  HasAbstractablePartialFunctionVariable,
  HasOneEvent,
};

const char* operatorName(OperatorKind k);
std::optional<OperatorKind> operatorFromName(std::string_view name);
const char* conditionName(ConditionKind k);
std::optional<ConditionKind> conditionFromName(std::string_view name);
const std::vector<OperatorKind>& allOperators();

struct Focus {
  std::set<std::string> events;
  std::set<std::string> variables;
  std::set<std::string> invariants;

  bool empty() const { return events.empty() && variables.empty() && invariants.empty(); }
};

// How negateGuard fans out over an event's guard conjuncts.
enum class NegateMode {
  PerConjunctAndWhole,  // one alternative per conjunct, plus the whole conjunction when there are several
  PerConjunct,
  Whole,
};

struct ForgeConfig {
  NegateMode negate = NegateMode::PerConjunctAndWhole;
  bool arithmeticReversible = true;  // v := v + k and v := v - k count as reversible
  int iterationCap = 8;

  // Named presets: "default", "conjuncts", "whole", "strict".
  static ForgeConfig calibration(const std::string& name);
  static std::vector<std::string> calibrations();
};

struct ProvenanceStep {
  std::string op;
  std::string args;
  bool operator==(const ProvenanceStep&) const = default;
  auto operator<=>(const ProvenanceStep&) const = default;
};

struct Alternative {
  kernel::Project project;
  std::vector<ProvenanceStep> provenance;
  std::string parent;               // model the pipeline started from
  std::set<std::string> freshEvents; // events created earlier in this pipeline

  std::string describe() const;
};

struct Discard {
  std::vector<ProvenanceStep> provenance;
  std::string reason;
};

using DiscardLog = std::vector<Discard>;

class UnresolvedFocus : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Well-formedness gate used on every generated model: type checks, structure
// checks and triple round-trip consistency. Returns the first problem found.
std::optional<std::string> validate(kernel::Project& project);

// Fanout over all argument bindings permitted by `focus`. Ill-formed results
// go to `log` instead of the returned list.
std::vector<Alternative> applyAtomic(const Alternative& model, OperatorKind kind, const Focus& focus,
                                     const ForgeConfig& config = {}, DiscardLog* log = nullptr);
std::vector<Alternative> applyAtomic(const kernel::Project& model, OperatorKind kind, const Focus& focus,
                                     const ForgeConfig& config = {}, DiscardLog* log = nullptr);

bool evalCondition(const kernel::Project& model, ConditionKind kind);

// Reverses a single action under the reversibility table; nullopt when the
// action is irreversible.
std::optional<kernel::Action> reverseAction(const kernel::Action& a, const ForgeConfig& config = {});
// Reverses every action of an event; nullopt when one of them is irreversible.
std::optional<kernel::Event> undoEvent(const kernel::Event& e, const ForgeConfig& config = {});

// Clones `source` (a machine of `project`) as a new abstract layer under the
// root machine, prefixing variables with `a`. The root refines the clone.
kernel::Project withAbstractLayer(const kernel::Project& project, const kernel::Machine& source);

struct Pipeline;
using PipelinePtr = std::shared_ptr<const Pipeline>;

struct Pipeline {
  enum class Kind { Atomic, AndApply, If, IfElse, RepeatUntil, While, Accumulator };

  Kind kind = Kind::Atomic;
  OperatorKind op = OperatorKind::DeleteVariable;
  ConditionKind condition = ConditionKind::HasOneEvent;
  std::vector<PipelinePtr> parts;

  static PipelinePtr atomic(OperatorKind op);
  static PipelinePtr andApply(PipelinePtr a, PipelinePtr b);
  static PipelinePtr ifRule(ConditionKind c, PipelinePtr p);
  static PipelinePtr ifElseRule(ConditionKind c, PipelinePtr a, PipelinePtr b);
  static PipelinePtr repeatUntilRule(PipelinePtr p, ConditionKind c);
  static PipelinePtr whileRule(ConditionKind c, PipelinePtr p);
  static PipelinePtr accumulatorRule(PipelinePtr p);

  std::string toString() const;
};

// `Apply (<p>) On <model-id> [WithActiveElements (Event(x), Variable(y), Invariant(z), ...)]`
struct PipelineRequest {
  PipelinePtr pipeline;
  std::string model;
  Focus focus;

  std::string toString() const;
};

class PipelineSyntaxError : public std::invalid_argument {
 public:
  PipelineSyntaxError(const std::string& what, std::size_t offset)
      : std::invalid_argument(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

PipelineRequest parsePipeline(const std::string& text);

struct PipelineResult {
  std::vector<Alternative> alternatives;  // provenance-lexicographic order
  DiscardLog discards;
  std::vector<std::string> capExceeded;   // branches stopped by the iteration cap
};

PipelineResult runPipeline(const kernel::Project& model, const Pipeline& pipeline, const Focus& focus = {},
                           const ForgeConfig& config = {}, const std::string& modelId = {});

}  // namespace dse::forge
