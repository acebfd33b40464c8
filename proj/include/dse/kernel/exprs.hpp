#pragma once

#include <set>
#include <string>
#include <vector>

#include "dse/kernel/model.hpp"

namespace dse::kernel {

// Names of identifiers occurring in `e`, optionally restricted to one kind.
void collectIdentifiers(const Expr& e, std::set<std::string>& out);
void collectIdentifiers(const Expr& e, IdentKind kind, std::set<std::string>& out);
std::set<std::string> variablesOf(const Expr& e);
bool refersTo(const Expr& e, std::string_view name);

// Variables read by an action: right-hand side plus the point-update index.
std::set<std::string> variablesRead(const Action& a);

// Replaces every identifier `name` by `replacement`.
Expr substitute(const Expr& e, std::string_view name, const Expr& replacement);
Expr renameIdentifier(const Expr& e, std::string_view from, std::string_view to);

// Pushes a negation one level down where a dual operator exists.
Expr negate(const Expr& e);

std::vector<Expr> conjuncts(const Expr& e);
Expr conjunction(const std::vector<Expr>& parts);

// Strips spans, used before structural comparison of generated models.
void clearSpans(Expr& e);

}  // namespace dse::kernel
