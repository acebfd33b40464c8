#pragma once

// Exploration tree: analysis of nodes, pattern-driven expansion, ranking of
// the generated children, the accept/reject status machine and persistence.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "dse/animator/animator.hpp"
#include "dse/forge/forge.hpp"
#include "dse/former/former.hpp"
#include "dse/gateway/json.hpp"
#include "dse/kernel/hash.hpp"
#include "dse/kernel/model.hpp"

namespace dse::navigator {

enum class Status { Unexplored, Analyzed, Expanded, Accepted, Rejected };

const char* statusName(Status s);
std::optional<Status> statusFromName(std::string_view s);

struct Pattern {
  enum class Kind { AbstractAway, ErrorCase };

  Kind kind = Kind::AbstractAway;
  int k = 1;  // variables abstracted away, 1 or 2

  static Pattern abstractAway(int k) { return {Kind::AbstractAway, k}; }
  static Pattern errorCase() { return {Kind::ErrorCase, 0}; }
  std::string toString() const;  // "abstractAway(1)", "errorCase"
};

// Accepts "abstractAway" (with k) and "errorCase".
std::optional<Pattern> patternFromName(std::string_view name, int k = 1);

struct Analysis {
  animator::FlawReport flaws;
  former::AnalysisReport analysis;
};

// Short re-simulation used to order siblings.
struct QuickRank {
  bool simulated = false;
  std::string error;
  std::size_t flawClasses = 0;
  std::size_t deadlocks = 0;
  std::size_t violations = 0;
  std::size_t diffSize = 0;
  bool operator==(const QuickRank&) const = default;
};

struct Provenance {
  std::string pattern;
  std::string pipeline;
  forge::Focus focus;
  std::vector<forge::ProvenanceStep> steps;
};

struct Node {
  std::string id;
  std::string parent;  // empty for the root
  kernel::Project project;
  kernel::Digest hash;
  Status status = Status::Unexplored;
  Provenance provenance;
  std::optional<Analysis> report;
  std::optional<QuickRank> quick;
  int rank = 0;  // 1-based position among siblings; 0 for the root
  std::vector<std::string> children;  // creation order
  std::string error;
};

struct NavigatorConfig {
  animator::SimConfig sim;                  // random walks feeding the theory
  std::size_t deadlockProbeStates = 20000;  // breadth-first deadlock search, 0 disables
  former::FormerConfig former;
  forge::ForgeConfig forge;
  std::size_t rankSteps = 200;
  std::vector<std::uint64_t> rankSeeds{0, 1, 2};
};

class UnknownNode : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InvalidTransition : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class PatternInapplicable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class AnalysisFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Random walks for the theory, plus the breadth-first deadlock probe whose
// witnesses are merged into the flaw report.
Analysis analyzeProject(const kernel::Project& project, const NavigatorConfig& config);

// Pipeline and focus suggested by a report for `project`'s root machine.
forge::PipelineRequest instantiatePattern(const Pattern& pattern, const former::AnalysisReport& report,
                                          const kernel::Project& project, const std::string& modelId = "model");

QuickRank quickRank(const kernel::Project& child, const kernel::Project& parent, const NavigatorConfig& config);

// Indices of `children` best first. Failed simulations go last; then
// deadlock-free before deadlocking, fewer flaw classes than the parent,
// fewer violations, smaller diff, and input order.
std::vector<std::size_t> rankOrder(const std::vector<QuickRank>& children, std::size_t parentFlawClasses);

class Tree {
 public:
  explicit Tree(kernel::Project root, NavigatorConfig config = {});

  const NavigatorConfig& config() const { return config_; }

  Node node(const std::string& id) const;
  std::vector<Node> nodes() const;  // creation order
  std::optional<std::string> findByHash(const kernel::Digest& h) const;
  std::size_t size() const;

  Analysis analyze(const std::string& id);
  forge::PipelineRequest instantiate(const std::string& id, const Pattern& pattern,
                                     const std::optional<forge::Focus>& focusOverride = {}) const;
  // New child ids, best ranked first. Children whose hash is already in the
  // tree are dropped.
  std::vector<std::string> expand(const std::string& id, const Pattern& pattern,
                                  const std::optional<forge::Focus>& focusOverride = {});
  void accept(const std::string& id);
  void reject(const std::string& id);

  json::Json treeJson() const;
  static json::Json nodeJson(const Node& n);

  void save(const std::filesystem::path& dir) const;
  static std::unique_ptr<Tree> load(const std::filesystem::path& dir, NavigatorConfig config = {});

 private:
  Tree() = default;
  Node& at(const std::string& id);
  const Node& at(const std::string& id) const;
  void rerank(Node& parent);

  NavigatorConfig config_;
  std::vector<Node> nodes_;
  std::map<std::string, std::size_t> index_;
  std::map<kernel::Digest, std::string> byHash_;
  int nextId_ = 1;
  mutable std::shared_mutex mu_;
  mutable std::mutex saveMu_;
};

}  // namespace dse::navigator
