#pragma once

#include <cstdint>
#include <string>

#include "dse/kernel/model.hpp"

namespace dse::kernel {

struct Digest {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  std::string hex() const;
  auto operator<=>(const Digest&) const = default;
};

// Order-insensitive textual forms. Labels of guards, actions, witnesses and
// invariants are not semantic and are left out.
std::string canonicalForm(const Expr& e);
std::string canonicalForm(const Type& t);
std::string canonicalForm(const Event& e);
std::string canonicalForm(const Machine& m);
std::string canonicalForm(const Context& c);
std::string canonicalForm(const Project& p);

Digest digestOf(std::string_view text);
Digest canonicalHash(const Project& project);

}  // namespace dse::kernel
