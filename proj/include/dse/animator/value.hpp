#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dse::animator {

// Semantic values. Sets keep their items sorted and duplicate-free; n-tuples
// nest pairs to the left.
struct Value {
  enum class Kind { Int, Bool, Atom, Pair, Set };

  Kind kind = Kind::Int;
  std::int64_t number = 0;  // integer, or 0/1 for booleans
  std::string atom;
  std::vector<Value> items;

  static Value integer(std::int64_t v) { return {Kind::Int, v, {}, {}}; }
  static Value boolean(bool v) { return {Kind::Bool, v ? 1 : 0, {}, {}}; }
  static Value atomOf(std::string a) { return {Kind::Atom, 0, std::move(a), {}}; }
  static Value pair(Value a, Value b) { return {Kind::Pair, 0, {}, {std::move(a), std::move(b)}}; }
  static Value set(std::vector<Value> xs);  // sorts and dedups
  static Value emptySet() { return {Kind::Set, 0, {}, {}}; }

  bool asBool() const;
  std::int64_t asInt() const;
  const Value& first() const { return items.at(0); }
  const Value& second() const { return items.at(1); }
  bool contains(const Value& v) const;

  std::strong_ordering operator<=>(const Value&) const = default;
  bool operator==(const Value&) const = default;
};

std::string toString(const Value& v);

Value setUnion(const Value& a, const Value& b);
Value setMinus(const Value& a, const Value& b);

}  // namespace dse::animator
