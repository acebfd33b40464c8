#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dse/kernel/model.hpp"

namespace dse::kernel {

struct Diagnostic {
  enum class Kind { Lex, Parse, Type, Unresolved, Structure };

  Kind kind = Kind::Structure;
  Span span;
  std::string message;
};

const char* kindName(Diagnostic::Kind k);

class DiagnosticError : public std::runtime_error {
 public:
  explicit DiagnosticError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

// Resolves identifier kinds (and turns carrier elements into atoms) in place,
// then type-checks and validates structure. Returns all problems found.
std::vector<Diagnostic> check(Project& project);

// Throws DiagnosticError when `check` reports anything.
void checkOrThrow(Project& project);

// Type of a resolved expression in the scope of `event` (may be null).
// Returns nullopt when the expression is ill-typed.
std::optional<Type> typeOf(const Project& project, const Machine& machine, const Event* event,
                           const Expr& e);

}  // namespace dse::kernel
