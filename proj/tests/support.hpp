#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dse/animator/animator.hpp"
#include "dse/surface/surface.hpp"

namespace dse::test {

inline std::filesystem::path modelsDir() { return DSE_MODELS_DIR; }

inline kernel::Project loadModel(const std::string& name) {
  return surface::loadProjectOrThrow(modelsDir() / name);
}

inline kernel::Project parse(const std::string& text, const std::string& root = {}) {
  return surface::parseProjectOrThrow({{"<test>", text}}, root);
}

inline animator::EventInstance transfer(const std::string& ev, const std::string& a1, const std::string& a2,
                                        std::int64_t m) {
  using animator::Value;
  return {ev, {{"a1", Value::atomOf(a1)}, {"a2", Value::atomOf(a2)}, {"m", Value::integer(m)}}};
}

// Schedule behind the background-knowledge tables of the bank case study.
inline std::vector<animator::EventInstance> goldenSchedule() {
  return {transfer("start", "A1", "A2", 1), transfer("debit", "A1", "A2", 1),  transfer("credit", "A1", "A2", 1),
          transfer("start", "A2", "A4", 1), transfer("debit", "A2", "A4", 1),  transfer("start", "A3", "A1", 3),
          transfer("debit", "A3", "A1", 3), transfer("credit", "A2", "A4", 1), transfer("credit", "A3", "A1", 3)};
}

inline std::vector<std::vector<std::string>> rowsOf(const Table& t) {
  std::vector<std::vector<std::string>> out;
  for (auto& r : t.rows) {
    std::vector<std::string> row;
    for (auto& c : r) row.push_back(toString(c));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace dse::test
