#include <algorithm>
#include <filesystem>
#include <random>
#include <thread>

#include "doctest.h"
#include "dse/kernel/hash.hpp"
#include "dse/navigator/navigator.hpp"
#include "dse/surface/surface.hpp"
#include "support.hpp"

using namespace dse;
using navigator::Pattern;
using navigator::Status;

namespace {

std::vector<std::string> eventNames(const kernel::Project& p) {
  std::vector<std::string> out;
  for (auto& e : p.rootMachine().events) out.push_back(e.name);
  return out;
}

bool hasEvent(const kernel::Project& p, const std::string& name) {
  auto names = eventNames(p);
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dse_nav_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// Small budgets for tests that run many operations.
navigator::NavigatorConfig cheap() {
  navigator::NavigatorConfig c;
  c.sim.maxSteps = 12;
  c.sim.maxTraces = 1;
  c.deadlockProbeStates = 300;
  c.former.depth = 1;
  c.rankSteps = 20;
  c.rankSeeds = {0};
  return c;
}

}  // namespace

TEST_CASE("bank exploration tree") {
  auto bank = test::loadModel("bank");
  navigator::Tree tree(bank);
  CHECK(tree.node("root").status == Status::Unexplored);
  CHECK_THROWS_AS(tree.expand("root", Pattern::abstractAway(1)), navigator::InvalidTransition);
  CHECK_THROWS_AS(tree.accept("root"), navigator::InvalidTransition);
  CHECK_THROWS_AS(tree.node("n42"), navigator::UnknownNode);

  auto a = tree.analyze("root");
  CHECK(tree.node("root").status == Status::Analyzed);
  CHECK(a.analysis.failureEvents == std::set<std::string>{"debit"});
  for (auto x : {"debit", "active", "pend"})
    CHECK((a.analysis.focusEvents.count(x) || a.analysis.focusVariables.count(x)));
  REQUIRE(!a.flaws.violations.empty());
  CHECK(std::all_of(a.flaws.violations.begin(), a.flaws.violations.end(), [](auto& v) { return v.label == "I1"; }));
  CHECK(std::any_of(a.flaws.violations.begin(), a.flaws.violations.end(),
                    [](auto& v) { return v.producer.event == "debit"; }));
  CHECK(std::count(a.flaws.nearProperties.begin(), a.flaws.nearProperties.end(),
                   animator::NearProperty{"I1", "debit", "credit"}) == 1);

  CHECK(tree.instantiate("root", Pattern::abstractAway(1)).toString() ==
        "Apply (deleteVariable andApply mergeEvents) On root WithActiveElements (Event(debit), Variable(pend))");
  CHECK(tree.instantiate("root", Pattern::errorCase()).toString() ==
        "Apply (combineEvents andApply negateGuard andApply undoActions) On root WithActiveElements (Event(debit))");

  auto kids = tree.expand("root", Pattern::abstractAway(1));
  REQUIRE(kids.size() == 2);
  CHECK(tree.node("root").status == Status::Expanded);
  auto top = tree.node(kids[0]);
  CHECK(top.rank == 1);
  CHECK(hasEvent(top.project, "debit_abs"));
  CHECK(top.hash == kernel::canonicalHash(test::loadModel("a1")));
  CHECK(top.provenance.pattern == "abstractAway(1)");
  CHECK(tree.node(kids[1]).rank == 2);
  CHECK(tree.node(kids[1]).quick->deadlocks > 0);

  CHECK(tree.expand("root", Pattern::abstractAway(1)).empty());

  auto errs = tree.expand("root", Pattern::errorCase());
  CHECK(errs.size() == 8);
  CHECK(std::any_of(errs.begin(), errs.end(), [&](auto& id) { return hasEvent(tree.node(id).project, "debit_err"); }));
  CHECK(tree.node("root").children.size() == 10);
  std::set<int> ranks;
  for (auto& c : tree.node("root").children) ranks.insert(tree.node(c).rank);
  CHECK(ranks.size() == 10);
  CHECK(*ranks.begin() == 1);

  // Status machine along the accepted path.
  CHECK_THROWS_AS(tree.accept(kids[0]), navigator::InvalidTransition);  // parent not accepted
  tree.accept("root");
  CHECK_THROWS_AS(tree.accept(kids[0]), navigator::InvalidTransition);  // not analyzed
  CHECK_THROWS_AS(tree.reject("root"), navigator::InvalidTransition);
  tree.analyze(kids[0]);
  tree.accept(kids[0]);
  CHECK(tree.node(kids[0]).status == Status::Accepted);
  for (auto& c : tree.node("root").children)
    if (c != kids[0]) CHECK(tree.node(c).status == Status::Rejected);
  CHECK_THROWS_AS(tree.accept(kids[1]), navigator::InvalidTransition);
  CHECK_THROWS_AS(tree.reject(kids[0]), navigator::InvalidTransition);

  // Persistence.
  auto dir = scratch("bank");
  tree.save(dir);
  CHECK(std::filesystem::exists(dir / "tree.json"));
  CHECK(std::filesystem::exists(dir / "reports" / "root.json"));
  CHECK(std::filesystem::exists(dir / "nodes" / kids[0] / "project.toml"));
  auto loaded = navigator::Tree::load(dir);
  CHECK(loaded->treeJson() == tree.treeJson());
  auto before = tree.nodes(), after = loaded->nodes();
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(after[i].hash == before[i].hash);
    CHECK(after[i].status == before[i].status);
    CHECK(after[i].rank == before[i].rank);
    CHECK(after[i].quick == before[i].quick);
    REQUIRE(after[i].report.has_value() == before[i].report.has_value());
    if (before[i].report) {
      CHECK(json::toJson(after[i].report->flaws) == json::toJson(before[i].report->flaws));
      CHECK(json::toJson(after[i].report->analysis) == json::toJson(before[i].report->analysis));
    }
  }
  // New ids continue after a reload.
  auto more = loaded->expand(kids[0], Pattern::errorCase());
  for (auto& id : more)
    CHECK(std::none_of(before.begin(), before.end(), [&](const navigator::Node& n) { return n.id == id; }));
  std::filesystem::remove_all(dir);
}

TEST_CASE("A1 node suggests the two-deletion pipeline") {
  navigator::Tree tree(test::loadModel("a1"));
  auto a = tree.analyze("root");
  CHECK(a.analysis.failureVariables == std::set<std::string>{"active", "trans"});
  CHECK(std::any_of(a.analysis.adaptations.begin(), a.analysis.adaptations.end(),
                    [](auto& x) { return x.rendered == "SIGMA(bal) + SIGMA(trans) = C"; }));
  CHECK(tree.instantiate("root", Pattern::abstractAway(2)).toString() ==
        "Apply (deleteVariable andApply deleteVariable andApply mergeEvents) On root "
        "WithActiveElements (Variable(active), Variable(trans))");
  // The two focused alternatives differ only in deletion order and share a hash.
  auto kids = tree.expand("root", Pattern::abstractAway(2));
  REQUIRE(kids.size() == 1);
  CHECK(eventNames(tree.node(kids[0]).project) == std::vector<std::string>{"credit_abs"});

  auto override = tree.expand("root", Pattern::abstractAway(1), forge::Focus{{"credit"}, {"trans"}, {}});
  for (auto& id : override) CHECK(tree.node(id).provenance.focus.events == std::set<std::string>{"credit"});
  CHECK_THROWS_AS(tree.expand("root", Pattern::abstractAway(1), forge::Focus{{"nope"}, {}, {}}),
                  navigator::PatternInapplicable);
  CHECK(!tree.node("root").error.empty());
}

TEST_CASE("deadlocks of the two-account bank reach the report") {
  navigator::Tree tree(test::loadModel("bank2"));
  auto a = tree.analyze("root");
  REQUIRE(!a.flaws.deadlocks.empty());
  auto root = tree.node("root");
  animator::Animator sim(root.project, "Bank");
  for (auto& d : a.flaws.deadlocks) CHECK(sim.enabled(d.state).empty());
  CHECK(a.flaws.flawClasses() == 2);
  auto kids = tree.expand("root", Pattern::abstractAway(1));
  REQUIRE(!kids.empty());
  auto top = tree.node(kids[0]);
  CHECK(hasEvent(top.project, "debit_abs"));
  CHECK(top.quick->deadlocks == 0);
}

TEST_CASE("a model without invariants or deadlocks has nothing to report") {
  auto p = test::parse(R"(
machine Flip
variables
  x : INT
initialisation
  then
    i1: x := 0
  end
event flip
  then
    a1: x := 1 - x
  end
end
)");
  navigator::Tree tree(p);
  auto a = tree.analyze("root");
  CHECK(a.flaws.deadlocks.empty());
  CHECK(a.flaws.violations.empty());
  CHECK(a.flaws.flawClasses() == 0);
  CHECK(a.analysis.focusEvents.empty());
  CHECK(a.analysis.focusVariables.empty());
  CHECK_THROWS_AS(tree.expand("root", Pattern::abstractAway(1)), navigator::PatternInapplicable);
  CHECK_THROWS_AS(tree.expand("root", Pattern::errorCase()), navigator::PatternInapplicable);
}

TEST_CASE("ranking order") {
  using navigator::QuickRank;
  QuickRank ok{true, "", 1, 0, 5, 3};
  QuickRank failed{false, "boom", 0, 0, 0, 0};
  QuickRank deadlocking{true, "", 1, 2, 0, 1};
  QuickRank clean{true, "", 0, 0, 0, 9};
  CHECK(navigator::rankOrder({failed, ok, deadlocking, clean}, 1) == std::vector<std::size_t>{3, 1, 2, 0});
  CHECK(navigator::rankOrder({ok, ok, ok}, 1) == std::vector<std::size_t>{0, 1, 2});
  QuickRank fewer{true, "", 1, 0, 2, 4};
  CHECK(navigator::rankOrder({ok, fewer}, 1) == std::vector<std::size_t>{1, 0});
  QuickRank smaller{true, "", 1, 0, 5, 1};
  CHECK(navigator::rankOrder({ok, smaller}, 1) == std::vector<std::size_t>{1, 0});

  auto bank = test::loadModel("bank");
  auto broken = bank;
  broken.rootMachine().events[1].actions[0].rhs = kernel::Expr::binary(
      kernel::Op::Apply, kernel::Expr::ident("bal", kernel::IdentKind::Variable),
      kernel::Expr::atom("A9"));
  auto q = navigator::quickRank(broken, bank, {});
  CHECK(q.simulated);
  auto unknownRoot = bank;
  unknownRoot.root = "Missing";
  CHECK_FALSE(navigator::quickRank(unknownRoot, bank, {}).simulated);
}

TEST_CASE("pattern names") {
  CHECK(navigator::patternFromName("abstractAway", 2)->toString() == "abstractAway(2)");
  CHECK(navigator::patternFromName("errorCase")->kind == Pattern::Kind::ErrorCase);
  CHECK_FALSE(navigator::patternFromName("nonsense"));
  for (auto s : {Status::Unexplored, Status::Analyzed, Status::Expanded, Status::Accepted, Status::Rejected})
    CHECK(navigator::statusFromName(navigator::statusName(s)) == s);
  navigator::Tree tree(test::loadModel("bank2"), cheap());
  tree.analyze("root");
  CHECK_THROWS_AS(tree.expand("root", Pattern::abstractAway(3)), navigator::PatternInapplicable);
}

TEST_CASE("concurrent jobs on distinct nodes") {
  navigator::Tree tree(test::loadModel("bank2"), cheap());
  tree.analyze("root");
  auto kids = tree.expand("root", Pattern::errorCase());
  REQUIRE(kids.size() >= 4);
  std::vector<std::thread> pool;
  for (int i = 0; i < 4; ++i) pool.emplace_back([&, i] { tree.analyze(kids[i]); });
  pool.emplace_back([&] { tree.expand("root", Pattern::abstractAway(1)); });
  pool.emplace_back([&] { (void)tree.treeJson(); });
  for (auto& t : pool) t.join();
  for (int i = 0; i < 4; ++i) CHECK(tree.node(kids[i]).status == Status::Analyzed);
  CHECK(tree.node("root").children.size() == kids.size() + 2);
}

TEST_CASE("tree stays acyclic and hash-unique under random operations") {
  auto cfg = cheap();
  auto seedModel = test::loadModel("bank2");
  std::mt19937_64 rng(11);
  int cases = 0;
  for (; cases < 200; ++cases) {
    navigator::Tree tree(seedModel, cfg);
    tree.analyze("root");
    int ops = 2 + static_cast<int>(rng() % 4);
    for (int k = 0; k < ops; ++k) {
      auto nodes = tree.nodes();
      auto id = nodes[rng() % nodes.size()].id;
      try {
        switch (rng() % 6) {
          case 0: tree.analyze(id); break;
          case 1: tree.expand(id, Pattern::abstractAway(1)); break;
          case 2: tree.expand(id, Pattern::errorCase()); break;
          case 3: tree.accept(id); break;
          case 4: tree.reject(id); break;
          default: tree.expand(id, Pattern::abstractAway(2)); break;
        }
      } catch (const navigator::InvalidTransition&) {
      } catch (const navigator::PatternInapplicable&) {
      } catch (const navigator::AnalysisFailed&) {
      }
    }

    auto nodes = tree.nodes();
    std::set<kernel::Digest> hashes;
    std::map<std::string, const navigator::Node*> byId;
    for (auto& n : nodes) {
      hashes.insert(n.hash);
      byId[n.id] = &n;
    }
    CHECK(hashes.size() == nodes.size());
    for (auto& n : nodes) {
      // Walking up the parents reaches the root within |nodes| steps.
      const navigator::Node* cur = &n;
      std::size_t hops = 0;
      while (!cur->parent.empty() && hops <= nodes.size()) {
        cur = byId.at(cur->parent);
        ++hops;
      }
      CHECK(cur->id == "root");
      // Accepted nodes form a path from the root.
      if (n.status == Status::Accepted && !n.parent.empty()) CHECK(byId.at(n.parent)->status == Status::Accepted);
      for (auto& c : n.children) CHECK(byId.at(c)->parent == n.id);
    }
  }
  CHECK(cases == 200);
}
