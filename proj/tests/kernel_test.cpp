#include <algorithm>

#include "doctest.h"
#include "dse/kernel/diff.hpp"
#include "dse/kernel/exprs.hpp"
#include "dse/kernel/hash.hpp"
#include "dse/kernel/triples.hpp"
#include "support.hpp"

using namespace dse;
using namespace dse::kernel;

namespace {

const Entity* findEntity(const TripleStore& s, EntityKind k, const std::string& name) {
  for (auto* e : s.ofKind(k))
    if (e->name == name) return e;
  return nullptr;
}

}  // namespace

TEST_CASE("triples of the bank model") {
  auto p = test::loadModel("bank");
  auto s = toTriples(p);
  auto* pend = findEntity(s, EntityKind::Variable, "pend");
  auto* debit = findEntity(s, EntityKind::Event, "debit");
  REQUIRE(pend);
  REQUIRE(debit);

  bool assignsPend = false;
  for (auto* a : s.ofKind(EntityKind::Action))
    if (s.has(a->id, Relation::Assigns, pend->id)) assignsPend = true;
  CHECK(assignsPend);

  auto guards = s.objects(debit->id, Relation::HasGuard);
  REQUIRE(guards.size() == 2);
  CHECK(s.has(guards[0], Relation::RefersTo, pend->id));
  CHECK(fromTriples(s) == p);
}

TEST_CASE("refines edge and empty machine") {
  auto p = test::parse(R"(
machine A
variables
  x : INT
initialisation
  then
    i1: x := 0
  end
end
machine C refines A
variables
  x : INT
initialisation
  then
    i1: x := 0
  end
end
)",
                       "C");
  auto s = toTriples(p);
  auto* a = findEntity(s, EntityKind::Machine, "A");
  auto* c = findEntity(s, EntityKind::Machine, "C");
  REQUIRE(a);
  REQUIRE(c);
  CHECK(s.has(c->id, Relation::Refines, a->id));

  auto e = test::parse("machine E\nend\n");
  auto es = toTriples(e);
  CHECK(es.ofKind(EntityKind::Machine).size() == 1);
  CHECK(es.count(Relation::HasEvent) == 0);
  CHECK(fromTriples(es) == e);
}

TEST_CASE("action without assigns is an inconsistent store") {
  auto s = toTriples(test::loadModel("bank"));
  TripleStore broken = s;
  auto victim = std::find_if(s.triples().begin(), s.triples().end(),
                             [](const Triple& t) { return t.relation == Relation::Assigns; });
  REQUIRE(victim != s.triples().end());
  broken.removeTriple(*victim);
  CHECK_THROWS_AS(fromTriples(broken), InconsistentStore);
}

TEST_CASE("A1 store has two events") {
  auto p = fromTriples(toTriples(test::loadModel("a1")));
  CHECK(p.rootMachine().events.size() == 2);
}

TEST_CASE("canonical hash") {
  auto p = test::loadModel("bank");
  auto q = p;
  std::reverse(q.rootMachine().events.begin(), q.rootMachine().events.end());
  CHECK(canonicalHash(p) == canonicalHash(q));

  auto r = p;
  auto& guards = r.rootMachine().findEvent("debit")->guards;
  guards.erase(guards.begin() + 1);
  CHECK(canonicalHash(p) != canonicalHash(r));

  auto relabeled = p;
  relabeled.rootMachine().findEvent("debit")->guards[0].label = "g_other";
  CHECK(canonicalHash(p) == canonicalHash(relabeled));
}

TEST_CASE("diff") {
  auto bank = test::loadModel("bank");
  auto a1 = test::loadModel("a1");
  CHECK(diff(bank, bank).empty());

  auto script = diff(bank, a1);
  auto has = [&](Edit::Kind k, Edit::Target t, const std::string& name) {
    return std::any_of(script.begin(), script.end(),
                       [&](const Edit& e) { return e.kind == k && e.target == t && e.name == name; });
  };
  CHECK(has(Edit::Kind::Remove, Edit::Target::Variable, "pend"));
  CHECK(has(Edit::Kind::Remove, Edit::Target::Event, "start"));
  CHECK(has(Edit::Kind::Remove, Edit::Target::Event, "debit"));
  CHECK(has(Edit::Kind::Add, Edit::Target::Event, "debit_abs"));
  CHECK(canonicalHash(applyEdits(bank, script)) == canonicalHash(a1));
}

TEST_CASE("expression helpers") {
  auto p = test::loadModel("bank");
  auto& debit = *p.rootMachine().findEvent("debit");
  CHECK(variablesOf(debit.guards[1].expr) == std::set<std::string>{"bal"});
  CHECK(refersTo(debit.guards[0].expr, "pend"));
  auto n = negate(debit.guards[1].expr);
  CHECK(n.op == Op::Lt);
  CHECK(conjuncts(conjunction({debit.guards[0].expr, debit.guards[1].expr})).size() == 2);
  CHECK(variablesRead(debit.actions[0]) == std::set<std::string>{"bal"});
}
