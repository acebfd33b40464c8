#include "dse/navigator/navigator.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "dse/kernel/diff.hpp"
#include "dse/kernel/exprs.hpp"
#include "dse/surface/surface.hpp"

namespace dse::navigator {

namespace fs = std::filesystem;
using json::Json;

const char* statusName(Status s) {
  switch (s) {
    case Status::Unexplored: return "unexplored";
    case Status::Analyzed: return "analyzed";
    case Status::Expanded: return "expanded";
    case Status::Accepted: return "accepted";
    case Status::Rejected: return "rejected";
  }
  return "?";
}

std::optional<Status> statusFromName(std::string_view s) {
  for (Status x : {Status::Unexplored, Status::Analyzed, Status::Expanded, Status::Accepted, Status::Rejected})
    if (s == statusName(x)) return x;
  return std::nullopt;
}

std::string Pattern::toString() const {
  if (kind == Kind::ErrorCase) return "errorCase";
  return "abstractAway(" + std::to_string(k) + ")";
}

std::optional<Pattern> patternFromName(std::string_view name, int k) {
  if (name == "errorCase") return Pattern::errorCase();
  if (name == "abstractAway") return Pattern::abstractAway(k);
  if (name == "abstractAway(1)") return Pattern::abstractAway(1);
  if (name == "abstractAway(2)") return Pattern::abstractAway(2);
  return std::nullopt;
}

Analysis analyzeProject(const kernel::Project& project, const NavigatorConfig& config) {
  try {
    const auto& m = project.rootMachine();
    animator::Animator sim(project, m.name, config.sim);
    auto ex = sim.explore();
    Analysis out;
    out.flaws = ex.report;

    if (config.deadlockProbeStates > 0 && config.sim.mode == animator::SimConfig::Mode::RandomWalk) {
      auto probeCfg = config.sim;
      probeCfg.mode = animator::SimConfig::Mode::BreadthFirst;
      probeCfg.maxStates = config.deadlockProbeStates;
      auto probe = animator::Animator(project, m.name, probeCfg).explore();
      for (auto& d : probe.report.deadlocks) {
        bool known = std::any_of(out.flaws.deadlocks.begin(), out.flaws.deadlocks.end(),
                                 [&](const animator::DeadlockWitness& w) { return w.state == d.state; });
        if (!known) out.flaws.deadlocks.push_back(d);
      }
    }

    auto bundle = animator::exportTables(project, ex.traces);
    auto theory = former::formTheory(bundle, config.former, &project, &m);
    out.analysis = former::classify(theory, project, m, ex.report.nearProperties);
    return out;
  } catch (const std::exception& e) {
    throw AnalysisFailed(e.what());
  }
}

namespace {

std::set<std::string> userInvariantVariables(const kernel::Machine& m) {
  std::set<std::string> out;
  for (auto& inv : m.invariants)
    if (inv.userGiven)
      for (auto& v : kernel::variablesOf(inv.expr)) out.insert(v);
  return out;
}

std::set<std::string> writtenBy(const kernel::Event& e) {
  std::set<std::string> out;
  for (auto& a : e.actions) out.insert(a.target);
  return out;
}

}  // namespace

forge::PipelineRequest instantiatePattern(const Pattern& pattern, const former::AnalysisReport& report,
                                          const kernel::Project& project, const std::string& modelId) {
  using forge::OperatorKind;
  using forge::Pipeline;
  const auto& m = project.rootMachine();
  forge::PipelineRequest req;
  req.model = modelId;

  if (pattern.kind == Pattern::Kind::ErrorCase) {
    if (report.failureEvents.empty()) throw PatternInapplicable("errorCase needs a failing event in the report");
    req.pipeline = Pipeline::andApply(
        Pipeline::atomic(OperatorKind::CombineEvents),
        Pipeline::andApply(Pipeline::atomic(OperatorKind::NegateGuard), Pipeline::atomic(OperatorKind::UndoActions)));
    req.focus.events = report.failureEvents;
    return req;
  }

  if (pattern.k < 1 || pattern.k > 2) throw PatternInapplicable("abstractAway takes k = 1 or 2");
  if (static_cast<int>(m.variables.size()) < pattern.k)
    throw PatternInapplicable("machine " + m.name + " has fewer than " + std::to_string(pattern.k) + " variables");
  if (m.events.size() < 2) throw PatternInapplicable("abstractAway needs at least two events to merge");

  auto protectedVars = userInvariantVariables(m);
  if (pattern.k == 1) {
    // Atomise the failing event with the event that enables it: the
    // variables it reads in its guards and that another event writes.
    if (report.failureEvents.empty()) throw PatternInapplicable("abstractAway(1) needs a failing event in the report");
    for (auto& name : report.failureEvents) {
      const auto* ev = m.findEvent(name);
      if (!ev) continue;
      std::set<std::string> read;
      for (auto& g : ev->guards)
        for (auto& v : kernel::variablesOf(g.expr)) read.insert(v);
      for (auto& v : read) {
        if (protectedVars.count(v)) continue;
        bool other = std::any_of(m.events.begin(), m.events.end(),
                                 [&](const kernel::Event& e) { return e.name != name && writtenBy(e).count(v); });
        if (other) req.focus.variables.insert(v);
      }
    }
    req.focus.events = report.failureEvents;
  } else {
    for (auto& v : report.failureVariables)
      if (!protectedVars.count(v) && m.findVariable(v)) req.focus.variables.insert(v);
  }
  if (static_cast<int>(req.focus.variables.size()) < pattern.k && pattern.k == 2)
    throw PatternInapplicable("report names fewer than 2 variables that can be abstracted away");
  if (req.focus.variables.empty()) throw PatternInapplicable("report names no variable that can be abstracted away");

  auto p = Pipeline::atomic(OperatorKind::MergeEvents);
  for (int i = 0; i < pattern.k; ++i) p = Pipeline::andApply(Pipeline::atomic(OperatorKind::DeleteVariable), p);
  req.pipeline = p;
  return req;
}

QuickRank quickRank(const kernel::Project& child, const kernel::Project& parent, const NavigatorConfig& config) {
  QuickRank q;
  q.diffSize = kernel::diff(parent, child).size();
  try {
    bool deadlock = false, violation = false, fault = false;
    for (auto seed : config.rankSeeds) {
      auto sc = config.sim;
      sc.mode = animator::SimConfig::Mode::RandomWalk;
      sc.seed = seed;
      sc.maxSteps = config.rankSteps;
      sc.maxTraces = 1;
      auto ex = animator::Animator(child, child.rootMachine().name, sc).explore();
      q.deadlocks += ex.report.deadlocks.size();
      q.violations += ex.report.violations.size();
      deadlock |= !ex.report.deadlocks.empty();
      violation |= !ex.report.violations.empty();
      fault |= !ex.report.faults.empty();
    }
    q.flawClasses = deadlock + violation + fault;
    q.simulated = true;
  } catch (const std::exception& e) {
    q.simulated = false;
    q.error = e.what();
  }
  return q;
}

std::vector<std::size_t> rankOrder(const std::vector<QuickRank>& children, std::size_t parentFlawClasses) {
  std::vector<std::size_t> order(children.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    const auto& q = children[i];
    return std::make_tuple(!q.simulated, q.deadlocks > 0, !(q.flawClasses < parentFlawClasses), q.violations,
                           q.diffSize);
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return order;
}

Tree::Tree(kernel::Project root, NavigatorConfig config) : config_(std::move(config)) {
  Node n;
  n.id = "root";
  n.hash = kernel::canonicalHash(root);
  n.project = std::move(root);
  byHash_[n.hash] = n.id;
  index_[n.id] = 0;
  nodes_.push_back(std::move(n));
}

Node& Tree::at(const std::string& id) {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownNode("no node '" + id + "'");
  return nodes_[it->second];
}

const Node& Tree::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownNode("no node '" + id + "'");
  return nodes_[it->second];
}

Node Tree::node(const std::string& id) const {
  std::shared_lock lock(mu_);
  return at(id);
}

std::vector<Node> Tree::nodes() const {
  std::shared_lock lock(mu_);
  return nodes_;
}

std::optional<std::string> Tree::findByHash(const kernel::Digest& h) const {
  std::shared_lock lock(mu_);
  auto it = byHash_.find(h);
  if (it == byHash_.end()) return std::nullopt;
  return it->second;
}

std::size_t Tree::size() const {
  std::shared_lock lock(mu_);
  return nodes_.size();
}

Analysis Tree::analyze(const std::string& id) {
  kernel::Project project;
  {
    std::shared_lock lock(mu_);
    project = at(id).project;
  }
  try {
    auto result = analyzeProject(project, config_);
    std::unique_lock lock(mu_);
    auto& n = at(id);
    n.report = result;
    n.error.clear();
    if (n.status == Status::Unexplored) n.status = Status::Analyzed;
    return result;
  } catch (const AnalysisFailed& e) {
    std::unique_lock lock(mu_);
    at(id).error = e.what();
    throw;
  }
}

forge::PipelineRequest Tree::instantiate(const std::string& id, const Pattern& pattern,
                                         const std::optional<forge::Focus>& focusOverride) const {
  std::shared_lock lock(mu_);
  const auto& n = at(id);
  if (!n.report) throw InvalidTransition("node " + id + " has not been analyzed");
  if (n.status == Status::Rejected) throw InvalidTransition("node " + id + " is rejected");
  auto req = instantiatePattern(pattern, n.report->analysis, n.project, id);
  if (focusOverride) req.focus = *focusOverride;
  return req;
}

void Tree::rerank(Node& parent) {
  std::vector<QuickRank> qs;
  for (auto& c : parent.children) qs.push_back(at(c).quick.value_or(QuickRank{}));
  std::size_t parentClasses = parent.report ? parent.report->flaws.flawClasses() : 0;
  auto order = rankOrder(qs, parentClasses);
  for (std::size_t r = 0; r < order.size(); ++r) at(parent.children[order[r]]).rank = static_cast<int>(r) + 1;
}

std::vector<std::string> Tree::expand(const std::string& id, const Pattern& pattern,
                                      const std::optional<forge::Focus>& focusOverride) {
  auto req = instantiate(id, pattern, focusOverride);
  kernel::Project project;
  {
    std::shared_lock lock(mu_);
    project = at(id).project;
  }

  forge::PipelineResult result;
  try {
    result = forge::runPipeline(project, *req.pipeline, req.focus, config_.forge, id);
  } catch (const std::exception& e) {
    std::unique_lock lock(mu_);
    at(id).error = e.what();
    throw PatternInapplicable(e.what());
  }

  struct Candidate {
    forge::Alternative alt;
    kernel::Digest hash;
    QuickRank quick;
  };
  std::vector<Candidate> fresh;
  std::set<kernel::Digest> seen;
  for (auto& alt : result.alternatives) {
    auto h = kernel::canonicalHash(alt.project);
    if (!seen.insert(h).second || findByHash(h)) continue;
    fresh.push_back({alt, h, {}});
  }
  for (auto& c : fresh) c.quick = quickRank(c.alt.project, project, config_);

  std::unique_lock lock(mu_);
  std::vector<std::string> added;
  for (auto& c : fresh) {
    if (byHash_.count(c.hash)) continue;
    Node n;
    n.id = "n" + std::to_string(nextId_++);
    n.parent = id;
    n.project = std::move(c.alt.project);
    n.hash = c.hash;
    n.provenance = {pattern.toString(), req.toString(), req.focus, c.alt.provenance};
    n.quick = c.quick;
    byHash_[n.hash] = n.id;
    index_[n.id] = nodes_.size();
    added.push_back(n.id);
    nodes_.push_back(std::move(n));
    at(id).children.push_back(added.back());
  }
  auto& parent = at(id);
  parent.error.clear();
  if (parent.status == Status::Analyzed) parent.status = Status::Expanded;
  rerank(parent);
  std::sort(added.begin(), added.end(), [&](auto& a, auto& b) { return at(a).rank < at(b).rank; });
  return added;
}

void Tree::accept(const std::string& id) {
  std::unique_lock lock(mu_);
  auto& n = at(id);
  if (n.status == Status::Accepted) return;
  if (n.status == Status::Rejected) throw InvalidTransition("node " + id + " is rejected");
  if (!n.report) throw InvalidTransition("node " + id + " must be analyzed before it is accepted");
  if (!n.parent.empty() && at(n.parent).status != Status::Accepted)
    throw InvalidTransition("the parent of " + id + " is not accepted");
  n.status = Status::Accepted;
  if (!n.parent.empty())
    for (auto& s : at(n.parent).children)
      if (s != id) at(s).status = Status::Rejected;
}

void Tree::reject(const std::string& id) {
  std::unique_lock lock(mu_);
  auto& n = at(id);
  if (n.parent.empty()) throw InvalidTransition("the root cannot be rejected");
  if (n.status == Status::Accepted) throw InvalidTransition("node " + id + " is accepted");
  n.status = Status::Rejected;
}

namespace {

Json quickJson(const QuickRank& q) {
  Json j = {{"simulated", q.simulated},
            {"flawClasses", q.flawClasses},
            {"deadlocks", q.deadlocks},
            {"violations", q.violations},
            {"diffSize", q.diffSize}};
  if (!q.error.empty()) j["error"] = q.error;
  return j;
}

QuickRank quickFromJson(const Json& j) {
  QuickRank q;
  q.simulated = j.at("simulated").get<bool>();
  q.flawClasses = j.at("flawClasses").get<std::size_t>();
  q.deadlocks = j.at("deadlocks").get<std::size_t>();
  q.violations = j.at("violations").get<std::size_t>();
  q.diffSize = j.at("diffSize").get<std::size_t>();
  if (j.contains("error")) q.error = j["error"].get<std::string>();
  return q;
}

Json reportJson(const Analysis& a) { return {{"flaws", json::toJson(a.flaws)}, {"analysis", json::toJson(a.analysis)}}; }

Analysis reportFromJson(const Json& j) {
  return {json::flawReportFromJson(j.at("flaws")), json::analysisFromJson(j.at("analysis"))};
}

void writeAtomically(const fs::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

}  // namespace

Json Tree::nodeJson(const Node& n) {
  Json steps = Json::array();
  for (auto& s : n.provenance.steps) steps.push_back(json::toJson(s));
  Json j = {{"id", n.id},
            {"parent", n.parent.empty() ? Json(nullptr) : Json(n.parent)},
            {"hash", n.hash.hex()},
            {"machine", n.project.root},
            {"status", statusName(n.status)},
            {"rank", n.rank},
            {"analyzed", n.report.has_value()},
            {"children", n.children},
            {"provenance",
             {{"pattern", n.provenance.pattern},
              {"pipeline", n.provenance.pipeline},
              {"focus", json::toJson(n.provenance.focus)},
              {"steps", std::move(steps)}}},
            {"quickRank", n.quick ? quickJson(*n.quick) : Json(nullptr)},
            {"error", n.error}};
  if (n.report)
    j["summary"] = {{"flawClasses", n.report->flaws.flawClasses()},
                    {"deadlocks", n.report->flaws.deadlocks.size()},
                    {"violations", n.report->flaws.violations.size()},
                    {"focusEvents", n.report->analysis.focusEvents},
                    {"focusVariables", n.report->analysis.focusVariables}};
  return j;
}

Json Tree::treeJson() const {
  std::shared_lock lock(mu_);
  Json nodes = Json::array();
  Json edges = Json::array();
  for (auto& n : nodes_) {
    nodes.push_back(nodeJson(n));
    if (!n.parent.empty()) edges.push_back({{"from", n.parent}, {"to", n.id}});
  }
  return {{"root", "root"}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

void Tree::save(const fs::path& dir) const {
  std::lock_guard saveLock(saveMu_);
  std::vector<Node> snapshot;
  Json tree;
  int nextId;
  {
    std::shared_lock lock(mu_);
    snapshot = nodes_;
    nextId = nextId_;
  }
  Json nodes = Json::array(), edges = Json::array();
  for (auto& n : snapshot) {
    nodes.push_back(nodeJson(n));
    if (!n.parent.empty()) edges.push_back({{"from", n.parent}, {"to", n.id}});
  }
  tree = {{"root", "root"}, {"nextId", nextId}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};

  fs::create_directories(dir / "nodes");
  fs::create_directories(dir / "reports");
  for (auto& n : snapshot) {
    auto nodeDir = dir / "nodes" / n.id;
    if (!fs::exists(nodeDir / "project.toml")) surface::saveProject(n.project, nodeDir);
    auto reportPath = dir / "reports" / (n.id + ".json");
    if (n.report)
      writeAtomically(reportPath, reportJson(*n.report).dump(2) + "\n");
    else
      fs::remove(reportPath);
  }
  writeAtomically(dir / "tree.json", tree.dump(2) + "\n");
}

std::unique_ptr<Tree> Tree::load(const fs::path& dir, NavigatorConfig config) {
  auto doc = json::readFile((dir / "tree.json").string());
  std::unique_ptr<Tree> t(new Tree());
  t->config_ = std::move(config);
  try {
    t->nextId_ = doc.at("nextId").get<int>();
    for (auto& j : doc.at("nodes")) {
      Node n;
      n.id = j.at("id").get<std::string>();
      n.parent = j.at("parent").is_null() ? "" : j.at("parent").get<std::string>();
      n.project = surface::loadProjectOrThrow(dir / "nodes" / n.id);
      n.hash = kernel::canonicalHash(n.project);
      if (n.hash.hex() != j.at("hash").get<std::string>())
        throw json::BadDocument("stored model of node " + n.id + " does not match its hash");
      auto status = statusFromName(j.at("status").get<std::string>());
      if (!status) throw json::BadDocument("unknown status for node " + n.id);
      n.status = *status;
      n.rank = j.at("rank").get<int>();
      n.children = j.at("children").get<std::vector<std::string>>();
      const auto& prov = j.at("provenance");
      n.provenance.pattern = prov.at("pattern").get<std::string>();
      n.provenance.pipeline = prov.at("pipeline").get<std::string>();
      n.provenance.focus = json::focusFromJson(prov.at("focus"));
      for (auto& s : prov.at("steps")) n.provenance.steps.push_back({s.at("op").get<std::string>(), s.at("args").get<std::string>()});
      if (!j.at("quickRank").is_null()) n.quick = quickFromJson(j.at("quickRank"));
      n.error = j.at("error").get<std::string>();
      if (j.at("analyzed").get<bool>())
        n.report = reportFromJson(json::readFile((dir / "reports" / (n.id + ".json")).string()));
      if (t->byHash_.count(n.hash)) throw json::BadDocument("two nodes share hash " + n.hash.hex());
      t->byHash_[n.hash] = n.id;
      t->index_[n.id] = t->nodes_.size();
      t->nodes_.push_back(std::move(n));
    }
  } catch (const nlohmann::json::exception& e) {
    throw json::BadDocument(std::string("malformed tree.json: ") + e.what());
  }
  if (t->nodes_.empty() || t->nodes_.front().id != "root") throw json::BadDocument("tree.json has no root node");
  return t;
}

}  // namespace dse::navigator
