#pragma once

#include <string>
#include <variant>
#include <vector>

#include "dse/kernel/model.hpp"

namespace dse::kernel {

// One entity-level change. `machine` names the owning machine for
// variable/invariant/event edits; `payload` carries the new entity for
// adds and modifies.
struct Edit {
  enum class Kind { Add, Remove, Modify };
  enum class Target { Root, Context, Machine, MachineHeader, Variable, Invariant, Event };

  Kind kind = Kind::Add;
  Target target = Target::Machine;
  std::string machine;
  std::string name;
  std::variant<std::monostate, std::string, Context, Machine, Variable, Invariant, Event> payload;

  std::string describe() const;
};

using EditScript = std::vector<Edit>;

EditScript diff(const Project& a, const Project& b);
Project applyEdits(const Project& a, const EditScript& script);

const char* kindName(Edit::Kind k);
const char* targetName(Edit::Target t);

}  // namespace dse::kernel
