#include "dse/tables.hpp"

#include <algorithm>
#include <cctype>

namespace dse {

std::string toString(const Cell& c) {
  if (auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

static int naturalCompare(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t i2 = i, j2 = j;
      while (i2 < a.size() && std::isdigit(static_cast<unsigned char>(a[i2]))) ++i2;
      while (j2 < b.size() && std::isdigit(static_cast<unsigned char>(b[j2]))) ++j2;
      auto da = a.substr(i, i2 - i), db = b.substr(j, j2 - j);
      da.erase(0, std::min(da.find_first_not_of('0'), da.size() - 1));
      db.erase(0, std::min(db.find_first_not_of('0'), db.size() - 1));
      if (da.size() != db.size()) return da.size() < db.size() ? -1 : 1;
      if (int c = da.compare(db)) return c;
      i = i2;
      j = j2;
    } else {
      if (a[i] != b[j]) return a[i] < b[j] ? -1 : 1;
      ++i;
      ++j;
    }
  }
  if (i < a.size()) return 1;
  if (j < b.size()) return -1;
  return a.compare(b);
}

bool cellLess(const Cell& a, const Cell& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (a.index() == 0) return std::get<0>(a) < std::get<0>(b);
  return naturalCompare(std::get<1>(a), std::get<1>(b)) < 0;
}

bool rowLess(const Row& a, const Row& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cellLess);
}

void Table::normalize() {
  std::sort(rows.begin(), rows.end(), rowLess);
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

bool Table::contains(const Row& r) const { return std::binary_search(rows.begin(), rows.end(), r, rowLess); }

const Table* TableBundle::find(std::string_view name) const {
  for (auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

Table* TableBundle::find(std::string_view name) {
  for (auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

}  // namespace dse
