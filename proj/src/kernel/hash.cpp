#include "dse/kernel/hash.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

#include "dse/kernel/exprs.hpp"

namespace dse::kernel {

std::string Digest::hex() const {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

namespace {

std::string joinSorted(std::vector<std::string> parts) {
  std::sort(parts.begin(), parts.end());
  std::string out = "[";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += parts[i];
  }
  return out + "]";
}

}  // namespace

std::string canonicalForm(const Type& t) { return toString(t); }

std::string canonicalForm(const Expr& e) {
  switch (e.op) {
    case Op::IntLit: return std::to_string(e.intValue);
    case Op::BoolLit: return e.boolValue ? "TRUE" : "FALSE";
    case Op::Atom: return "'" + e.name;
    case Op::Ident: return e.name;
    case Op::SetLit: {
      std::vector<std::string> parts;
      for (auto& a : e.args) parts.push_back(canonicalForm(a));
      std::sort(parts.begin(), parts.end());
      parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
      return "{" + joinSorted(std::move(parts)) + "}";
    }
    default: {
      std::string out = opName(e.op);
      out += "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ",";
        out += canonicalForm(e.args[i]);
      }
      return out + ")";
    }
  }
}

static std::string predicateList(const std::vector<Labeled>& xs) {
  std::vector<std::string> parts;
  for (auto& x : xs)
    for (auto& c : conjuncts(x.expr)) parts.push_back(canonicalForm(c));
  return joinSorted(std::move(parts));
}

std::string canonicalForm(const Event& e) {
  std::vector<std::string> params, actions;
  for (auto& p : e.parameters) params.push_back(p.name + ":" + canonicalForm(p.type));
  for (auto& a : e.actions) {
    std::string s = a.target;
    if (a.index) s += "(" + canonicalForm(*a.index) + ")";
    actions.push_back(s + ":=" + canonicalForm(a.rhs));
  }
  return "event " + e.name + " any" + joinSorted(params) + " when" + predicateList(e.guards) + " with" +
         predicateList(e.witnesses) + " then" + joinSorted(actions);
}

std::string canonicalForm(const Machine& m) {
  std::vector<std::string> vars, invs, events;
  for (auto& v : m.variables) vars.push_back(v.name + ":" + canonicalForm(v.type) + (v.functional ? "!f" : ""));
  for (auto& i : m.invariants)
    for (auto& c : conjuncts(i.expr)) invs.push_back(canonicalForm(c) + (i.userGiven ? "" : "!g"));
  for (auto& e : m.events) events.push_back(canonicalForm(e));
  std::vector<std::string> sees(m.sees.begin(), m.sees.end());
  return "machine " + m.name + " refines " + m.refines.value_or("-") + " sees" + joinSorted(sees) + " vars" +
         joinSorted(vars) + " inv" + joinSorted(invs) + " init{" + canonicalForm(m.initialisation) + "} events" +
         joinSorted(events);
}

std::string canonicalForm(const Context& c) {
  std::vector<std::string> sets, consts;
  for (auto& s : c.sets) {
    std::vector<std::string> els(s.elements.begin(), s.elements.end());
    sets.push_back(s.name + "=" + joinSorted(els));
  }
  for (auto& k : c.constants) consts.push_back(k.name + ":" + canonicalForm(k.type) + "=" + canonicalForm(k.value));
  return "context " + c.name + " sets" + joinSorted(sets) + " constants" + joinSorted(consts);
}

std::string canonicalForm(const Project& p) {
  std::vector<std::string> parts;
  for (auto& c : p.contexts) parts.push_back(canonicalForm(c));
  for (auto& m : p.machines) parts.push_back(canonicalForm(m));
  return "root " + p.root + " " + joinSorted(std::move(parts));
}

Digest digestOf(std::string_view text) {
  // Two independent FNV-1a lanes give a 128-bit digest.
  std::uint64_t a = 14695981039346656037ull;
  std::uint64_t b = 0x6c62272e07bb0142ull;
  for (unsigned char c : text) {
    a = (a ^ c) * 1099511628211ull;
    b = (b ^ (c + 0x9e)) * 0x100000001b3ull;
    b ^= b >> 29;
  }
  return {a, b};
}

Digest canonicalHash(const Project& project) { return digestOf(canonicalForm(project)); }

}  // namespace dse::kernel
