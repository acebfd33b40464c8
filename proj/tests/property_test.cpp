#include <algorithm>
#include <random>

#include "doctest.h"
#include "dse/forge/forge.hpp"
#include "dse/kernel/check.hpp"
#include "dse/kernel/hash.hpp"
#include "dse/kernel/triples.hpp"
#include "dse/surface/surface.hpp"
#include "support.hpp"

using namespace dse;
using kernel::Expr;
using kernel::Op;

namespace {

constexpr int kCases = 200;

// Well-formed models reached from the corpus by a short random chain of
// operator applications.
std::vector<kernel::Project> generatedModels(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<kernel::Project> seeds{test::loadModel("bank"), test::loadModel("bank2"), test::loadModel("a1")};
  const auto& ops = forge::allOperators();
  std::vector<kernel::Project> out;
  while (static_cast<int>(out.size()) < count) {
    forge::Alternative cur;
    cur.project = seeds[rng() % seeds.size()];
    int steps = static_cast<int>(rng() % 4);
    for (int i = 0; i < steps; ++i) {
      auto next = forge::applyAtomic(cur, ops[rng() % ops.size()], {});
      if (next.empty()) continue;
      cur = next[rng() % next.size()];
      cur.freshEvents.clear();
    }
    out.push_back(cur.project);
  }
  return out;
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  std::shuffle(v.begin(), v.end(), rng);
}

kernel::Project reordered(kernel::Project p, std::mt19937_64& rng) {
  shuffle(p.contexts, rng);
  for (auto& c : p.contexts) {
    shuffle(c.sets, rng);
    shuffle(c.constants, rng);
  }
  shuffle(p.machines, rng);
  for (auto& m : p.machines) {
    shuffle(m.sees, rng);
    shuffle(m.variables, rng);
    shuffle(m.invariants, rng);
    for (auto& i : m.invariants) i.label = "L" + std::to_string(rng() % 1000);
    auto mix = [&](kernel::Event& e) {
      shuffle(e.guards, rng);
      shuffle(e.actions, rng);
      shuffle(e.witnesses, rng);
      for (auto& g : e.guards) g.label = "g" + std::to_string(rng() % 1000);
      for (auto& a : e.actions) a.label = "a" + std::to_string(rng() % 1000);
    };
    mix(m.initialisation);
    for (auto& e : m.events) mix(e);
    shuffle(m.events, rng);
  }
  return p;
}

}  // namespace

TEST_CASE("projects survive the triple store") {
  auto models = generatedModels(1, kCases);
  std::set<kernel::Digest> distinct;
  for (auto& p : models) distinct.insert(kernel::canonicalHash(p));
  CHECK(distinct.size() >= 60);
  for (auto& p : models) {
    auto back = kernel::fromTriples(kernel::toTriples(p));
    CHECK(kernel::canonicalHash(back) == kernel::canonicalHash(p));
    auto again = kernel::toTriples(back);
    CHECK(again.triples().size() == kernel::toTriples(p).triples().size());
  }
}

TEST_CASE("rendering and parsing are inverse") {
  auto models = generatedModels(2, kCases);
  for (auto& p : models) {
    auto units = surface::render(p);
    auto parsed = surface::parseProject(units, p.root);
    REQUIRE(parsed.diagnostics.empty());
    CHECK(kernel::canonicalHash(parsed.project) == kernel::canonicalHash(p));
    auto twice = surface::render(parsed.project);
    REQUIRE(twice.size() == units.size());
    for (std::size_t i = 0; i < units.size(); ++i) CHECK(twice[i].text == units[i].text);
  }
}

TEST_CASE("canonical hash ignores order and labels but not content") {
  std::mt19937_64 rng(3);
  auto models = generatedModels(3, kCases);
  for (auto& p : models) {
    auto h = kernel::canonicalHash(p);
    CHECK(kernel::canonicalHash(reordered(p, rng)) == h);

    auto changed = p;
    auto& m = changed.rootMachine();
    m.invariants.push_back({"extra", Expr::binary(Op::Eq, Expr::intLit(1), Expr::intLit(1)), true});
    CHECK(kernel::canonicalHash(changed) != h);
  }
}

TEST_CASE("undoing an action twice gives it back") {
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int k = 0; k < kCases; ++k) {
    kernel::Action a;
    a.label = "act";
    a.target = "v";
    Expr k1 = rng() % 2 ? Expr::intLit(static_cast<std::int64_t>(rng() % 9)) : Expr::ident("p", kernel::IdentKind::Parameter);
    Expr self = Expr::ident("v", kernel::IdentKind::Variable);
    switch (rng() % 5) {
      case 0: a.rhs = Expr::binary(Op::Union, self, Expr::setLit({k1})); break;
      case 1: a.rhs = Expr::binary(Op::SetMinus, self, Expr::setLit({k1})); break;
      case 2: a.rhs = Expr::binary(Op::Add, self, k1); break;
      case 3: a.rhs = Expr::binary(Op::Sub, self, k1); break;
      default: {
        Expr idx = Expr::ident("q", kernel::IdentKind::Parameter);
        a.index = idx;
        auto read = Expr::binary(Op::Apply, self, idx);
        a.rhs = Expr::binary(rng() % 2 ? Op::Add : Op::Sub, read, k1);
      }
    }
    auto once = forge::reverseAction(a);
    REQUIRE(once);
    CHECK_FALSE(*once == a);
    auto twice = forge::reverseAction(*once);
    REQUIRE(twice);
    CHECK(*twice == a);
    ++checked;

    // An amount that reads the target itself is not reversible.
    kernel::Action b = a;
    b.index.reset();
    b.rhs = Expr::binary(Op::Add, self, self);
    CHECK_FALSE(forge::reverseAction(b));
  }
  CHECK(checked == kCases);
}

TEST_CASE("undone events restore the pre-state along bank traces") {
  auto bank = test::loadModel("bank");
  auto undone = bank;
  for (auto& e : undone.rootMachine().events) {
    auto u = forge::undoEvent(e);
    REQUIRE(u);
    e = *u;
    e.guards.clear();
  }
  kernel::checkOrThrow(undone);
  animator::Animator back(undone, "Bank");

  int checked = 0;
  for (std::uint64_t seed = 0; checked < kCases; ++seed) {
    animator::SimConfig sc;
    sc.seed = seed;
    sc.maxSteps = 40;
    auto ex = animator::Animator(bank, "Bank", sc).explore();
    for (auto& t : ex.traces) {
      auto pre = t.initial;
      for (auto& s : t.steps) {
        CHECK((back.step(s.post, s.instance) == pre));
        pre = s.post;
        ++checked;
      }
    }
  }
}

TEST_CASE("simultaneous assignments read the pre-state") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < kCases; ++k) {
    auto x0 = static_cast<std::int64_t>(rng() % 50) - 25;
    auto y0 = static_cast<std::int64_t>(rng() % 50) - 25;
    auto p = test::parse(R"(
context K
sets
  S = {E1, E2}
end
machine M sees K
variables
  x : INT
  y : INT
  f : S +-> INT
initialisation
  then
    i1: x := )" + std::to_string(x0) + R"(
    i2: y := )" + std::to_string(y0) + R"(
    i3: f := {(E1, )" + std::to_string(x0) + R"(), (E2, )" + std::to_string(y0) + R"()}
  end
event swap
  then
    a1: x := y
    a2: y := x
    a3: f(E1) := f(E2)
    a4: f(E2) := f(E1)
  end
end
)");
    animator::Animator a(p, "M");
    auto s0 = a.initialState();
    auto s1 = a.step(s0, {"swap", {}});
    CHECK(s1.at("x").asInt() == y0);
    CHECK(s1.at("y").asInt() == x0);
    auto f = animator::Value::set({animator::Value::pair(animator::Value::atomOf("E1"), animator::Value::integer(y0)),
                                   animator::Value::pair(animator::Value::atomOf("E2"), animator::Value::integer(x0))});
    CHECK((s1.at("f") == f));
    CHECK((a.step(s1, {"swap", {}}) == s0));
  }
}
