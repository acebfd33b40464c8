#include "dse/animator/value.hpp"

#include <algorithm>

namespace dse::animator {

Value Value::set(std::vector<Value> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return {Kind::Set, 0, {}, std::move(xs)};
}

bool Value::asBool() const {
  if (kind != Kind::Bool) throw std::logic_error("value is not a boolean: " + toString(*this));
  return number != 0;
}

std::int64_t Value::asInt() const {
  if (kind != Kind::Int) throw std::logic_error("value is not an integer: " + toString(*this));
  return number;
}

bool Value::contains(const Value& v) const { return std::binary_search(items.begin(), items.end(), v); }

std::string toString(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Int: return std::to_string(v.number);
    case Value::Kind::Bool: return v.number ? "TRUE" : "FALSE";
    case Value::Kind::Atom: return v.atom;
    case Value::Kind::Pair: return "(" + toString(v.items[0]) + ", " + toString(v.items[1]) + ")";
    case Value::Kind::Set: {
      std::string out = "{";
      for (std::size_t i = 0; i < v.items.size(); ++i) {
        if (i) out += ", ";
        out += toString(v.items[i]);
      }
      return out + "}";
    }
  }
  return "?";
}

Value setUnion(const Value& a, const Value& b) {
  std::vector<Value> out;
  std::set_union(a.items.begin(), a.items.end(), b.items.begin(), b.items.end(), std::back_inserter(out));
  return {Value::Kind::Set, 0, {}, std::move(out)};
}

Value setMinus(const Value& a, const Value& b) {
  std::vector<Value> out;
  std::set_difference(a.items.begin(), a.items.end(), b.items.begin(), b.items.end(), std::back_inserter(out));
  return {Value::Kind::Set, 0, {}, std::move(out)};
}

}  // namespace dse::animator
