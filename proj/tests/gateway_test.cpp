#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "dse/gateway/service.hpp"
#include "support.hpp"

using namespace dse;
using json::Json;

namespace {

namespace fs = std::filesystem;

// Response bodies are kept for the schema check that runs after this suite.
void record(const std::string& name, const std::string& schema, const httplib::Result& r) {
  fs::create_directories(DSE_FIXTURE_DIR);
  Json doc = {{"schema", schema}, {"status", r->status}, {"body", Json::parse(r->body)}};
  std::ofstream(fs::path(DSE_FIXTURE_DIR) / (name + ".json")) << doc.dump(2) << '\n';
}

Json sourcesOf(const std::string& model) {
  Json files = Json::array();
  for (auto& entry : fs::directory_iterator(test::modelsDir() / model)) {
    if (entry.path().extension() != ".ebm") continue;
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    files.push_back({{"path", entry.path().filename().string()}, {"text", ss.str()}});
  }
  return {{"root", "Bank"}, {"files", files}};
}

struct Running {
  explicit Running(const fs::path& ws) : service(config(ws)) {
    thread = std::thread([this] { service.listen(); });
    service.waitUntilReady();
    client = std::make_unique<httplib::Client>("127.0.0.1", service.boundPort());
    client->set_read_timeout(120, 0);
  }
  ~Running() {
    service.stop();
    thread.join();
  }
  static gateway::ServiceConfig config(const fs::path& ws) {
    gateway::ServiceConfig c;
    c.port = 0;
    c.workspace = ws;
    return c;
  }

  gateway::Service service;
  std::thread thread;
  std::unique_ptr<httplib::Client> client;
};

httplib::Headers requestId(const std::string& id) { return {{"X-Request-Id", id}}; }

}  // namespace

TEST_CASE("gateway serves the exploration loop over HTTP") {
  auto ws = fs::temp_directory_path() / "dse_gateway_ws";
  fs::remove_all(ws);
  Json treeBefore;
  std::string top;
  {
    Running srv(ws);
    auto& c = *srv.client;

    auto r = c.Get("/tree");
    REQUIRE(r);
    CHECK(r->status == 404);
    record("tree_empty", "Error", r);

    r = c.Post("/projects", sourcesOf("bank").dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 201);
    auto created = Json::parse(r->body);
    CHECK(created["id"] == "root");
    CHECK(created["status"] == "unexplored");
    record("project_created", "ProjectCreated", r);

    r = c.Post("/projects", sourcesOf("bank").dump(), "application/json");
    CHECK(r->status == 409);
    record("project_exists", "Error", r);

    Json broken = {{"files", Json::array({{{"path", "Bad.ebm"}, {"text", "machine M\nvariables\n  x : NOPE\nend\n"}}})}};
    r = c.Post("/projects", broken.dump(), "application/json");
    CHECK(r->status == 400);
    auto diag = Json::parse(r->body);
    CHECK(diag["code"] == "diagnostics");
    CHECK(diag.contains("span"));
    record("project_diagnostics", "Error", r);

    r = c.Post("/nodes/root/accept", "", "application/json");
    CHECK(r->status == 409);
    record("accept_too_early", "Error", r);

    r = c.Get("/nodes/nowhere");
    CHECK(r->status == 404);
    record("unknown_node", "Error", r);

    r = c.Post("/nodes/root/expand", Json{{"pattern", "abstractAway"}, {"k", 1}}.dump(), "application/json");
    CHECK(r->status == 409);

    r = c.Post("/nodes/root/analyze", requestId("an-1"), "", "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    auto analyzed = Json::parse(r->body);
    CHECK(analyzed["node"]["status"] == "analyzed");
    CHECK(analyzed["report"]["analysis"]["failure"]["events"] == Json::array({"debit"}));
    record("analyze", "AnalyzeResult", r);
    auto again = c.Post("/nodes/root/analyze", requestId("an-1"), "", "application/json");
    CHECK(again->body == r->body);

    r = c.Post("/nodes/root/expand", requestId("ex-1"), Json{{"pattern", "abstractAway"}, {"k", 1}}.dump(),
               "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    auto expanded = Json::parse(r->body);
    REQUIRE(expanded["added"].size() == 2);
    CHECK(expanded["node"]["status"] == "expanded");
    CHECK(expanded["pipeline"] ==
          "Apply (deleteVariable andApply mergeEvents) On root WithActiveElements (Event(debit), Variable(pend))");
    record("expand", "ExpandResult", r);
    top = expanded["added"][0]["id"].get<std::string>();
    CHECK(expanded["added"][0]["rank"] == 1);

    // A retry with the same request id replays; a fresh request dedups.
    auto retry = c.Post("/nodes/root/expand", requestId("ex-1"), Json{{"pattern", "abstractAway"}, {"k", 1}}.dump(),
                        "application/json");
    CHECK(retry->body == r->body);
    auto fresh = c.Post("/nodes/root/expand", requestId("ex-2"), Json{{"pattern", "abstractAway"}, {"k", 1}}.dump(),
                        "application/json");
    CHECK(Json::parse(fresh->body)["added"].empty());

    r = c.Get("/nodes/" + top + "/model");
    CHECK(r->status == 200);
    CHECK(r->body.find("event debit_abs") != std::string::npos);
    record("model", "Model", r);

    r = c.Get("/nodes/" + top + "/diff");
    CHECK(r->status == 200);
    auto diff = Json::parse(r->body);
    CHECK(diff["against"] == "root");
    CHECK(!diff["edits"].empty());
    record("diff", "Diff", r);
    r = c.Get("/nodes/" + top + "/diff?against=root");
    CHECK(Json::parse(r->body) == diff);
    r = c.Get("/nodes/" + top + "/diff?against=nowhere");
    CHECK(r->status == 404);

    r = c.Get("/nodes/root/report");
    CHECK(r->status == 200);
    record("report", "Report", r);
    r = c.Get("/nodes/" + top + "/report");
    CHECK(r->status == 404);
    record("no_report", "Error", r);

    r = c.Get("/nodes/" + top);
    CHECK(r->status == 200);
    record("node", "Node", r);

    r = c.Post("/nodes/root/expand", Json{{"pattern", "sideways"}}.dump(), "application/json");
    CHECK(r->status == 400);
    r = c.Post("/nodes/root/expand", "{not json", "application/json");
    CHECK(r->status == 400);
    record("bad_json", "Error", r);
    r = c.Post("/nodes/root/expand", Json{{"pattern", "abstractAway"}, {"focus", {{"events", {"nope"}}}}}.dump(),
               "application/json");
    CHECK(r->status == 400);
    CHECK(Json::parse(r->body)["code"] == "pattern-inapplicable");
    r = c.Get("/nodes/root/analyze");
    CHECK(r->status == 405);

    r = c.Post("/nodes/root/expand", Json{{"pattern", "errorCase"}}.dump(), "application/json");
    REQUIRE(r->status == 200);
    auto errs = Json::parse(r->body)["added"];
    CHECK(errs.size() == 8);
    bool debitErr = false;
    for (auto& n : errs) {
      auto m = c.Get("/nodes/" + n["id"].get<std::string>() + "/model");
      debitErr |= m->body.find("event debit_err") != std::string::npos;
    }
    CHECK(debitErr);

    r = c.Post("/nodes/root/accept", "", "application/json");
    CHECK(r->status == 200);
    CHECK(Json::parse(r->body)["status"] == "accepted");
    r = c.Post("/nodes/" + top + "/analyze", "", "application/json");
    CHECK(r->status == 200);
    r = c.Post("/nodes/" + top + "/accept", "", "application/json");
    CHECK(r->status == 200);
    r = c.Post("/nodes/" + top + "/reject", "", "application/json");
    CHECK(r->status == 409);

    r = c.Get("/tree");
    CHECK(r->status == 200);
    record("tree", "Tree", r);
    treeBefore = Json::parse(r->body);
    CHECK(treeBefore["nodes"].size() == 11);
    for (auto& n : treeBefore["nodes"])
      if (n["parent"] == "root" && n["id"] != top) CHECK(n["status"] == "rejected");
  }

  // A restarted service picks the tree up from the workspace.
  {
    Running srv(ws);
    auto r = srv.client->Get("/tree");
    REQUIRE(r);
    CHECK(Json::parse(r->body) == treeBefore);
    r = srv.client->Get("/nodes/" + top + "/report");
    CHECK(r->status == 200);
  }
  fs::remove_all(ws);
}

TEST_CASE("gateway routing without a socket") {
  auto ws = fs::temp_directory_path() / "dse_gateway_direct";
  fs::remove_all(ws);
  gateway::ServiceConfig cfg;
  cfg.workspace = ws;
  cfg.navigator.sim.maxSteps = 10;
  cfg.navigator.sim.maxTraces = 1;
  gateway::Service s(cfg);
  auto created = s.handle("POST", "/projects", sourcesOf("bank2").dump());
  CHECK(created.status == 201);
  CHECK(s.handle("GET", "/nowhere", "").status == 404);
  CHECK(s.handle("DELETE", "/tree", "").status == 405);
  CHECK(s.handle("POST", "/nodes/root/reject", "").status == 409);

  // Concurrent retries of one request run the job once.
  std::vector<gateway::Response> out(4);
  std::vector<std::thread> pool;
  for (int i = 0; i < 4; ++i)
    pool.emplace_back([&, i] { out[i] = s.handle("POST", "/nodes/root/analyze", "", {}, "same"); });
  for (auto& t : pool) t.join();
  for (auto& r : out) CHECK(r.body == out[0].body);

  auto replaced = sourcesOf("bank2");
  replaced["replace"] = true;
  CHECK(s.handle("POST", "/projects", replaced.dump()).status == 201);
  CHECK(s.handle("GET", "/nodes/root/report", "").status == 404);

  gateway::ServiceConfig bad;
  CHECK_THROWS_AS(gateway::Service{bad}, std::invalid_argument);
  fs::remove_all(ws);
}
