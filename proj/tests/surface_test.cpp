#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace dse;
using namespace dse::kernel;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kCtx = R"(context Ctx
sets
  ACCOUNT = {A1, A2}
end
)";

}  // namespace

TEST_CASE("bank model parses") {
  auto p = test::loadModel("bank");
  auto& m = p.rootMachine();
  CHECK(m.events.size() == 3);
  CHECK(m.variables.size() == 4);
  REQUIRE(m.invariants.size() == 1);
  CHECK(m.invariants[0].label == "I1");
  CHECK(m.findVariable("bal")->functional);
}

TEST_CASE("render round trip is byte identical on the corpus") {
  for (auto name : {"bank", "bank2", "a1"}) {
    auto p = test::loadModel(name);
    for (auto& unit : surface::render(p)) {
      CHECK(unit.text == slurp(test::modelsDir() / name / unit.path));
    }
    CHECK(surface::parseProjectOrThrow(surface::render(p), p.root) == p);
  }
}

TEST_CASE("A1 renders debit_abs") {
  auto units = surface::render(test::loadModel("a1"));
  auto text = units.back().text;
  CHECK(text.find("event debit_abs") != std::string::npos);
  auto p = test::loadModel("a1");
  auto* e = p.rootMachine().findEvent("debit_abs");
  REQUIRE(e);
  CHECK(e->guards.size() == 2);
  CHECK(e->actions.size() == 3);
}

TEST_CASE("type error at the set literal") {
  std::string src = std::string(kCtx) + R"(machine M sees Ctx
variables
  v : POW(INT)
initialisation
  then
    i1: v := {}
  end
event e
  any x : ACCOUNT
  then
    a1: v := v \/ {x}
  end
end
)";
  auto r = surface::parseProject({{"m.ebm", src}});
  REQUIRE_FALSE(r.ok());
  auto& d = r.diagnostics.front();
  CHECK(d.kind == Diagnostic::Kind::Type);
  auto at = src.substr(static_cast<std::size_t>(d.span.offset), static_cast<std::size_t>(d.span.length));
  CHECK(at == "{x}");
}

TEST_CASE("unresolved refines") {
  auto r = surface::parseProject({{"m.ebm", "machine M refines Ghost\nend\n"}});
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics.front().kind == Diagnostic::Kind::Unresolved);
  CHECK(r.diagnostics.front().span.valid());
}

TEST_CASE("lex and parse errors carry spans") {
  for (auto src : {"machine M\nvariables\n  x : INT\ninitialisation then i: x := 1 ? end\nend\n",
                   "machine M\nvariables\n  x : INT\ninitialisation then i: x := (1 end\nend\n",
                   "machine\n"}) {
    auto r = surface::parseProject({{"m.ebm", src}});
    REQUIRE_FALSE(r.ok());
    for (auto& d : r.diagnostics) {
      CHECK(d.span.valid());
      CHECK(d.span.offset <= static_cast<int>(std::string(src).size()));
    }
  }
}

TEST_CASE("precedence") {
  auto p = test::parse(std::string(kCtx) + R"(machine M sees Ctx
variables
  x : INT
  s : POW(INT)
invariants
  i1: x + 1 : s \/ {2} & not x < 0 or x = 1 => s = {}
initialisation
  then
    a: x := -2
    b: s := {}
  end
end
)");
  auto& e = p.rootMachine().invariants[0].expr;
  CHECK(e.op == Op::Implies);
  CHECK(e.args[0].op == Op::Or);
  CHECK(e.args[0].args[0].op == Op::And);
  auto& mem = e.args[0].args[0].args[0];
  CHECK(mem.op == Op::In);
  CHECK(mem.args[0].op == Op::Add);
  CHECK(mem.args[1].op == Op::Union);
  CHECK(e.args[0].args[0].args[1].op == Op::Not);
  CHECK(p.rootMachine().initialisation.actions[0].rhs == Expr::intLit(-2));
}

TEST_CASE("manifest") {
  auto m = surface::parseManifest("root = \"Bank\"\nfiles = [\"A.ebm\", \"B.ebm\"]\n");
  CHECK(m.root == "Bank");
  CHECK(m.files == std::vector<std::string>{"A.ebm", "B.ebm"});
  auto again = surface::parseManifest(surface::renderManifest(m));
  CHECK(again.root == m.root);
  CHECK(again.files == m.files);
  CHECK_THROWS(surface::parseManifest("color = \"red\"\n"));
}

TEST_CASE("save and load") {
  auto p = test::loadModel("bank");
  auto dir = std::filesystem::temp_directory_path() / "dse_surface_save";
  std::filesystem::remove_all(dir);
  surface::saveProject(p, dir);
  CHECK(surface::loadProjectOrThrow(dir) == p);
  std::filesystem::remove_all(dir);
}
