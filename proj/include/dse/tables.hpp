#pragma once

// Data tables shared by the animator (export) and the theory former.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace dse {

using Cell = std::variant<std::int64_t, std::string>;
using Row = std::vector<Cell>;

std::string toString(const Cell& c);

// Integers before strings; strings compare digit runs numerically (S2 < S10).
bool cellLess(const Cell& a, const Cell& b);
bool rowLess(const Row& a, const Row& b);

struct Column {
  std::string name;
  std::string sort;
  bool operator==(const Column&) const = default;
};

struct Table {
  std::string name;
  std::vector<Column> columns;
  std::vector<Row> rows;

  // Sorts rows canonically and drops duplicates.
  void normalize();
  std::size_t arity() const { return columns.size(); }
  bool contains(const Row& r) const;  // requires normalized rows
  bool operator==(const Table&) const = default;
};

struct TableBundle {
  std::string objectSort = "state";
  std::vector<Table> tables;

  const Table* find(std::string_view name) const;
  Table* find(std::string_view name);
};

}  // namespace dse
