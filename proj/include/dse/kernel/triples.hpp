#pragma once

// Entity-relation-entity representation of a project. Every AST component
// becomes an entity; structure is carried by triples.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dse/kernel/model.hpp"

namespace dse::kernel {

enum class EntityKind {
  Machine,
  Context,
  Variable,
  Invariant,
  Event,
  Parameter,
  Guard,
  Action,
  Witness,
  CarrierSet,
  Constant,
};

enum class Relation {
  Refines,
  Sees,
  HasVariable,
  HasInvariant,
  HasEvent,
  HasParameter,
  HasGuard,
  HasAction,
  HasWitness,
  Assigns,
  RefersTo,
};

const char* kindName(EntityKind k);
const char* relationName(Relation r);

struct Entity {
  std::string id;
  EntityKind kind = EntityKind::Machine;
  std::string name;  // label for guards/actions/invariants/witnesses
  int order = 0;     // declaration position within its owner
  std::string owner; // owning context for carrier sets and constants
  std::optional<Type> type;
  std::optional<Expr> expr;   // predicate, action rhs, constant value
  std::optional<Expr> index;  // point-update index
  std::vector<std::string> elements;  // carrier enumeration
  bool flag = false;  // functional / user-given / initialisation
  std::string provenance;
};

struct Triple {
  std::string subject;
  Relation relation = Relation::RefersTo;
  std::string object;

  auto operator<=>(const Triple&) const = default;
};

class InconsistentStore : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TripleStore {
 public:
  const std::map<std::string, Entity>& entities() const { return entities_; }
  const std::vector<Triple>& triples() const { return triples_; }
  std::string rootMachine;

  const Entity& entity(const std::string& id) const;
  std::string add(Entity e);
  void relate(const std::string& s, Relation r, const std::string& o);
  void removeTriple(const Triple& t);

  std::vector<std::string> objects(const std::string& subject, Relation r) const;
  std::vector<std::string> subjects(Relation r, const std::string& object) const;
  bool has(const std::string& s, Relation r, const std::string& o) const;
  std::size_t count(Relation r) const;
  std::vector<const Entity*> ofKind(EntityKind k) const;

  // Rebuilds every refersTo triple from the expression payloads.
  void refreshReferences();

 private:
  std::map<std::string, Entity> entities_;
  std::vector<Triple> triples_;
  int next_ = 0;
};

TripleStore toTriples(const Project& project);
Project fromTriples(const TripleStore& store);

}  // namespace dse::kernel
