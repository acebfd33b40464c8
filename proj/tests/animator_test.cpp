#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "support.hpp"

using namespace dse;
using namespace dse::animator;

namespace {

// Direct transcription of the bank guards over plain containers.
std::set<std::string> bankEnabledOracle(const State& s, std::int64_t lo, std::int64_t hi) {
  std::set<std::string> out;
  std::vector<std::string> accounts{"A1", "A2", "A3", "A4"};
  std::set<std::string> active;
  for (auto& v : s.at("active").items) active.insert(v.atom);
  std::map<std::string, std::int64_t> bal;
  for (auto& p : s.at("bal").items) bal[p.first().atom] = p.second().number;
  auto tuples = [&](const char* var) {
    std::set<std::tuple<std::string, std::string, std::int64_t>> r;
    for (auto& t : s.at(var).items) r.insert({t.first().first().atom, t.first().second().atom, t.second().number});
    return r;
  };
  auto pend = tuples("pend");
  auto trans = tuples("trans");
  for (auto& a1 : accounts)
    for (auto& a2 : accounts)
      for (auto m = lo; m <= hi; ++m) {
        auto args = "(" + a1 + "," + a2 + "," + std::to_string(m) + ")";
        if (!active.count(a1)) out.insert("start" + args);
        if (pend.count({a1, a2, m}) && bal.at(a1) >= m) out.insert("debit" + args);
        if (trans.count({a1, a2, m})) out.insert("credit" + args);
      }
  return out;
}

std::set<std::string> names(const std::vector<EventInstance>& xs) {
  std::set<std::string> out;
  for (auto& x : xs) out.insert(x.toString());
  return out;
}

}  // namespace

TEST_CASE("evaluation") {
  auto p = test::loadModel("bank");
  Animator a(p, "Bank");
  auto s = a.initialState();
  auto& inv = p.rootMachine().invariants[0].expr;
  CHECK(a.eval(inv, s, {}).asBool());
  CHECK(a.eval(inv.args[0], s, {}).asInt() == 12);
  CHECK(s.at("pend").items.empty());

  auto& grd = p.rootMachine().findEvent("debit")->guards[1].expr;
  Binding b{{"a1", Value::atomOf("A1")}, {"a2", Value::atomOf("A2")}, {"m", Value::integer(3)}};
  CHECK(a.eval(grd, s, b).asBool());
  b[2].second = Value::integer(4);
  CHECK_FALSE(a.eval(grd, s, b).asBool());
  b[0].second = Value::atomOf("A9");
  CHECK_THROWS_AS(a.eval(grd, s, b), EvalFault);
}

TEST_CASE("enabled agrees with a direct oracle along random walks") {
  auto p = test::loadModel("bank");
  SimConfig cfg;
  Animator a(p, "Bank", cfg);
  std::mt19937_64 rng(7);
  for (int walk = 0; walk < 20; ++walk) {
    auto s = a.initialState();
    for (int i = 0; i < 15; ++i) {
      auto en = a.enabled(s);
      CHECK(names(en) == bankEnabledOracle(s, cfg.intMin, cfg.intMax));
      if (en.empty()) break;
      s = a.step(s, en[rng() % en.size()]);
    }
  }
}

TEST_CASE("enabled at golden state S1 includes credit") {
  auto p = test::loadModel("bank");
  Animator a(p, "Bank");
  auto t = a.replay(test::goldenSchedule());
  auto en = names(a.enabled(t.steps[1].post));
  CHECK(en.count("credit(A1,A2,1)"));
}

TEST_CASE("golden trace tables") {
  auto p = test::loadModel("bank");
  Animator a(p, "Bank");
  auto bundle = exportTables(p, {a.replay(test::goldenSchedule())});
  using R = std::vector<std::vector<std::string>>;
  CHECK(test::rowsOf(*bundle.find("good")) == R{{"S0"}, {"S2"}, {"S3"}, {"S8"}});
  CHECK(test::rowsOf(*bundle.find("state")).size() == 9);
  CHECK(test::rowsOf(*bundle.find("event_of")) == R{{"S0", "start"}, {"S1", "debit"}, {"S2", "credit"},
                                                   {"S3", "start"}, {"S4", "debit"}, {"S5", "start"},
                                                   {"S6", "debit"}, {"S7", "credit"}, {"S8", "credit"}});
  CHECK(test::rowsOf(*bundle.find("active")) == R{{"S0", "A1"}, {"S1", "A1"}, {"S3", "A2"}, {"S4", "A2"}, {"S5", "A2"},
                                                 {"S5", "A3"}, {"S6", "A2"}, {"S6", "A3"}, {"S7", "A3"}});
  CHECK(test::rowsOf(*bundle.find("trans")) == R{{"S1", "A1", "A2", "1"}, {"S4", "A2", "A4", "1"},
                                                {"S5", "A2", "A4", "1"}, {"S6", "A2", "A4", "1"},
                                                {"S6", "A3", "A1", "3"}, {"S7", "A3", "A1", "3"}});
  CHECK(test::rowsOf(*bundle.find("pend")) ==
        R{{"S0", "A1", "A2", "1"}, {"S3", "A2", "A4", "1"}, {"S5", "A3", "A1", "3"}});
  auto bal = test::rowsOf(*bundle.find("bal"));
  REQUIRE(bal.size() == 36);
  CHECK(bal[4] == std::vector<std::string>{"S1", "A1", "2"});
  CHECK(test::rowsOf(*bundle.find("account")) == R{{"A1"}, {"A2"}, {"A3"}, {"A4"}});
  CHECK(test::rowsOf(*bundle.find("event")) == R{{"credit"}, {"debit"}, {"start"}});
  auto ints = test::rowsOf(*bundle.find("integer"));
  CHECK(ints.front() == std::vector<std::string>{"0"});

  auto& cols = bundle.find("trans")->columns;
  REQUIRE(cols.size() == 4);
  CHECK(cols[1].name == "a1");
  CHECK(cols[2].name == "a2");
  CHECK(cols[3].name == "i");
}

TEST_CASE("near property on the golden trace") {
  auto p = test::loadModel("bank");
  Animator a(p, "Bank");
  auto props = findNearProperties({a.replay(test::goldenSchedule())}, {"I1"});
  REQUIRE(props.size() == 1);
  CHECK(props[0] == NearProperty{"I1", "debit", "credit"});
}

TEST_CASE("replay rejects a disabled step") {
  auto p = test::loadModel("bank");
  Animator a(p, "Bank");
  auto sched = test::goldenSchedule();
  std::swap(sched[0], sched[1]);
  try {
    a.replay(sched);
    FAIL("expected NotEnabled");
  } catch (const NotEnabled& e) {
    CHECK(e.index() == 0);
  }
}

TEST_CASE("empty and A1 exports") {
  auto p = test::loadModel("bank");
  Animator a(p, "Bank");
  auto empty = exportTables(p, {a.replay({})});
  CHECK(empty.find("state")->rows.empty());

  auto a1 = test::loadModel("a1");
  SimConfig cfg;
  cfg.maxSteps = 10;
  cfg.maxTraces = 1;
  auto ex = Animator(a1, "Bank", cfg).explore();
  auto bundle = exportTables(a1, ex.traces);
  CHECK(bundle.find("pend") == nullptr);
  CHECK(bundle.find("bal") != nullptr);
}

TEST_CASE("two-account deadlock") {
  auto p = test::loadModel("bank2");
  SimConfig cfg;
  cfg.mode = SimConfig::Mode::BreadthFirst;
  cfg.intMin = 1;
  cfg.intMax = 2;
  Animator a(p, "Bank", cfg);
  auto ex = a.explore();
  CHECK_FALSE(ex.report.budgetExceeded);
  REQUIRE_FALSE(ex.report.deadlocks.empty());
  for (auto& w : ex.report.deadlocks) {
    CHECK(a.enabled(w.state).empty());
    CHECK(w.state.at("active").items.size() == 2);
    CHECK(w.state.at("trans").items.empty());
    auto replayed = a.replay(w.schedule);
    CHECK((replayed.steps.empty() ? replayed.initial : replayed.steps.back().post) == w.state);
  }
}

TEST_CASE("state budget") {
  auto p = test::loadModel("bank");
  SimConfig cfg;
  cfg.mode = SimConfig::Mode::BreadthFirst;
  cfg.maxStates = 500;
  auto ex = Animator(p, "Bank", cfg).explore();
  CHECK(ex.report.budgetExceeded);
  CHECK(ex.report.statesVisited <= 500);
}

TEST_CASE("determinism, conservation and good duality") {
  auto p = test::loadModel("bank");
  SimConfig cfg;
  cfg.seed = 42;
  Animator a(p, "Bank", cfg);
  auto x = a.explore();
  auto y = Animator(p, "Bank", cfg).explore();
  REQUIRE(x.traces.size() == y.traces.size());
  for (std::size_t i = 0; i < x.traces.size(); ++i) {
    REQUIRE(x.traces[i].steps.size() == y.traces[i].steps.size());
    for (std::size_t k = 0; k < x.traces[i].steps.size(); ++k) {
      CHECK(x.traces[i].steps[k].instance == y.traces[i].steps[k].instance);
      CHECK(x.traces[i].steps[k].post == y.traces[i].steps[k].post);
    }
  }
  CHECK(x.report.violations == y.report.violations);

  for (auto& t : x.traces)
    for (auto& s : t.steps) {
      std::int64_t total = 0;
      for (auto& b : s.post.at("bal").items) total += b.second().number;
      for (auto& tr : s.post.at("trans").items) total += tr.second().number;
      CHECK(total == 12);
      CHECK(s.violated == a.violatedLabels(s.post));
    }
  auto bundle = exportTables(p, x.traces);
  auto good = bundle.find("good");
  std::size_t idx = 0;
  for (auto& t : x.traces)
    for (auto& s : t.steps) {
      CHECK(good->contains({stateId(idx++)}) == s.violated.empty());
    }
}

TEST_CASE("conflicting point updates fault") {
  auto p = test::parse(R"(context Ctx
sets
  K = {k1, k2}
end
machine M sees Ctx
variables
  f : K +-> INT
initialisation
  then
    i1: f := {(k1, 0), (k2, 0)}
  end
event clash
  any x : K, y : K
  then
    a1: f(x) := 1
    a2: f(y) := 2
  end
end
)");
  Animator a(p, "M");
  auto s = a.initialState();
  Binding same{{"x", Value::atomOf("k1")}, {"y", Value::atomOf("k1")}};
  CHECK_THROWS_AS(a.step(s, {"clash", same}), InstanceFault);
  Binding distinct{{"x", Value::atomOf("k1")}, {"y", Value::atomOf("k2")}};
  auto t = a.step(s, {"clash", distinct});
  CHECK(toString(t.at("f")) == "{(k1, 1), (k2, 2)}");
}
