// Command-line front end. Every verb prints JSON on stdout except `parse`
// without --json and `serve`.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "dse/gateway/json.hpp"
#include "dse/gateway/service.hpp"
#include "dse/kernel/hash.hpp"
#include "dse/navigator/navigator.hpp"
#include "dse/surface/surface.hpp"

namespace fs = std::filesystem;
using namespace dse;
using json::Json;

namespace {

constexpr int kOk = 0;
constexpr int kDiagnostics = 1;
constexpr int kInternal = 2;

// Problems with the user's input rather than with the tool.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  fs::path workspace = "workspace";
  std::uint64_t seed = 0;
  std::size_t maxSteps = 50;
  std::size_t maxTraces = 3;
  std::size_t maxStates = 200000;
  std::string mode = "random";
  std::string moneyRange = "1..3";
  double theta = 0.4;
  int depth = 2;
  std::string calibration = "default";
  bool compact = false;

  animator::SimConfig sim() const {
    animator::SimConfig c;
    c.mode = mode == "bfs" ? animator::SimConfig::Mode::BreadthFirst : animator::SimConfig::Mode::RandomWalk;
    c.seed = seed;
    c.maxSteps = maxSteps;
    c.maxTraces = maxTraces;
    c.maxStates = maxStates;
    auto dots = moneyRange.find("..");
    if (dots == std::string::npos) throw InputError("--money-range expects a..b, got '" + moneyRange + "'");
    try {
      c.intMin = std::stoll(moneyRange.substr(0, dots));
      c.intMax = std::stoll(moneyRange.substr(dots + 2));
    } catch (const std::exception&) {
      throw InputError("--money-range expects integers a..b, got '" + moneyRange + "'");
    }
    c.validate();
    return c;
  }

  former::FormerConfig former() const {
    former::FormerConfig c;
    c.theta = theta;
    c.depth = depth;
    c.validate();
    return c;
  }

  navigator::NavigatorConfig navigator() const {
    navigator::NavigatorConfig c;
    c.sim = sim();
    c.former = former();
    c.forge = forge::ForgeConfig::calibration(calibration);
    return c;
  }

  void print(const Json& j) const { std::cout << (compact ? j.dump() : j.dump(2)) << '\n'; }
};

// Loads a project directory, manifest or single source file. Diagnostics go
// to stderr and raise InputError.
kernel::Project load(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("no such file or directory: " + path.string());
  std::vector<surface::SourceUnit> units;
  surface::Manifest manifest;
  if (fs::is_regular_file(path) && path.extension() == ".ebm") {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    units.push_back({path.string(), ss.str()});
  } else {
    units = surface::readSources(path, manifest);
  }
  auto r = surface::parseProject(units, manifest.root);
  if (!r.ok()) {
    for (auto& d : r.diagnostics) std::cerr << surface::formatDiagnostic(d, units) << '\n';
    throw InputError(std::to_string(r.diagnostics.size()) + " diagnostic(s)");
  }
  return std::move(r.project);
}

Json readJson(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("no such file: " + path.string());
  return json::readFile(path.string());
}

std::unique_ptr<navigator::Tree> openTree(const Options& o) {
  if (!fs::exists(o.workspace / "tree.json"))
    throw InputError("no exploration tree in " + o.workspace.string() + " (run `dse tree init <project>`)");
  return navigator::Tree::load(o.workspace, o.navigator());
}

gateway::Service* runningService = nullptr;

void onSignal(int) {
  if (runningService) runningService->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design-space exploration workbench for Event-B-style models"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--workspace", o.workspace, "Exploration workspace directory");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--max-steps", o.maxSteps, "Steps per random walk, or depth bound for bfs");
  app.add_option("--max-traces", o.maxTraces, "Random walks per exploration");
  app.add_option("--max-states", o.maxStates, "State budget for bfs");
  app.add_option("--mode", o.mode, "Exploration mode")->check(CLI::IsMember({"random", "bfs"}));
  app.add_option("--money-range", o.moneyRange, "Integer parameter range a..b");
  app.add_option("--theta", o.theta, "Near-conjecture threshold");
  app.add_option("--depth", o.depth, "Theory formation depth");
  app.add_option("--calibration", o.calibration, "Forge calibration")
      ->check(CLI::IsMember(forge::ForgeConfig::calibrations()));
  app.add_flag("--compact", o.compact, "Print JSON on one line");

  std::string project, schedule, pipelineText, outDir, nodeId, pattern;
  bool asJson = false, tables = false, traces = false;
  int k = 1;
  std::string host = "127.0.0.1";
  int port = 8080;

  auto* parse = app.add_subcommand("parse", "Parse and check a project");
  parse->add_option("project", project, "Project directory, manifest or .ebm file")->required();
  parse->add_flag("--json", asJson, "Print the rendered sources as JSON");

  auto* simulate = app.add_subcommand("simulate", "Explore a model and report flaws");
  simulate->add_option("project", project)->required();
  simulate->add_flag("--traces", traces, "Include the traces");
  simulate->add_flag("--tables", tables, "Include the exported concept tables");

  auto* replay = app.add_subcommand("replay", "Replay a schedule of event instances");
  replay->add_option("project", project)->required();
  replay->add_option("schedule", schedule, "JSON array of {event, binding}")->required();
  replay->add_flag("--tables", tables, "Print the exported concept tables instead of the trace");

  auto* analyze = app.add_subcommand("analyze", "Simulate, form a theory and classify conjectures");
  analyze->add_option("project", project)->required();

  auto* generate = app.add_subcommand("generate", "Run a transformation pipeline");
  generate->add_option("project", project)->required();
  generate->add_option("pipeline", pipelineText, "Apply (<pipeline>) On <model> [WithActiveElements (...)]")
      ->required();
  generate->add_option("--out", outDir, "Write each alternative's sources under this directory");

  auto* tree = app.add_subcommand("tree", "Work with the exploration tree in --workspace");
  tree->require_subcommand(1);
  auto* treeInit = tree->add_subcommand("init", "Start a tree from a project");
  treeInit->add_option("project", project)->required();
  auto* treeShow = tree->add_subcommand("show", "Print the tree");
  auto* treeNode = tree->add_subcommand("node", "Print a node and its report");
  treeNode->add_option("id", nodeId)->required();
  auto* treeAnalyze = tree->add_subcommand("analyze", "Analyze a node");
  treeAnalyze->add_option("id", nodeId)->required();
  auto* treeExpand = tree->add_subcommand("expand", "Expand a node with a pattern");
  treeExpand->add_option("id", nodeId)->required();
  treeExpand->add_option("pattern", pattern, "abstractAway or errorCase")->required();
  treeExpand->add_option("--k", k, "Variables to abstract away");
  auto* treeAccept = tree->add_subcommand("accept", "Accept a node");
  treeAccept->add_option("id", nodeId)->required();
  auto* treeReject = tree->add_subcommand("reject", "Reject a node");
  treeReject->add_option("id", nodeId)->required();

  auto* serve = app.add_subcommand("serve", "Serve the HTTP/JSON API over --workspace");
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kDiagnostics;
  }

  try {
    if (*parse) {
      auto p = load(project);
      if (asJson) {
        auto body = json::toJson(surface::render(p), p.root);
        body["hash"] = kernel::canonicalHash(p).hex();
        o.print(body);
      } else {
        std::cout << "ok " << p.root << " " << kernel::canonicalHash(p).hex() << '\n';
      }
      return kOk;
    }

    if (*simulate) {
      auto p = load(project);
      auto ex = animator::Animator(p, p.root, o.sim()).explore();
      Json out = {{"flaws", json::toJson(ex.report)}};
      if (traces) {
        Json ts = Json::array();
        for (auto& t : ex.traces) ts.push_back(json::toJson(t));
        out["traces"] = std::move(ts);
      }
      if (tables) out["tables"] = json::toJson(animator::exportTables(p, ex.traces));
      o.print(out);
      return kOk;
    }

    if (*replay) {
      auto p = load(project);
      auto sched = json::scheduleFromJson(readJson(schedule));
      animator::Trace t;
      try {
        t = animator::Animator(p, p.root, o.sim()).replay(sched);
      } catch (const animator::NotEnabled& e) {
        throw InputError(e.what());
      }
      if (tables)
        o.print(json::toJson(animator::exportTables(p, {t})));
      else
        o.print(json::toJson(t));
      return kOk;
    }

    if (*analyze) {
      auto p = load(project);
      auto cfg = o.navigator();
      cfg.sim.mode = animator::SimConfig::Mode::RandomWalk;
      auto a = navigator::analyzeProject(p, cfg);
      o.print({{"flaws", json::toJson(a.flaws)}, {"analysis", json::toJson(a.analysis)}});
      return kOk;
    }

    if (*generate) {
      auto p = load(project);
      auto req = forge::parsePipeline(pipelineText);
      auto result =
          forge::runPipeline(p, *req.pipeline, req.focus, forge::ForgeConfig::calibration(o.calibration), req.model);
      Json alts = Json::array();
      std::size_t i = 0;
      for (auto& a : result.alternatives) {
        Json steps = Json::array();
        for (auto& s : a.provenance) steps.push_back(json::toJson(s));
        Json events = Json::array();
        for (auto& e : a.project.rootMachine().events) events.push_back(e.name);
        Json entry = {{"provenance", a.describe()},
                      {"steps", std::move(steps)},
                      {"hash", kernel::canonicalHash(a.project).hex()},
                      {"events", std::move(events)}};
        if (!outDir.empty()) {
          auto dir = fs::path(outDir) / ("alt-" + std::to_string(++i));
          surface::saveProject(a.project, dir);
          entry["dir"] = dir.string();
        }
        alts.push_back(std::move(entry));
      }
      Json discards = Json::array();
      for (auto& d : result.discards) {
        Json steps = Json::array();
        for (auto& s : d.provenance) steps.push_back(json::toJson(s));
        discards.push_back({{"steps", std::move(steps)}, {"reason", d.reason}});
      }
      o.print({{"pipeline", req.toString()},
               {"count", result.alternatives.size()},
               {"alternatives", std::move(alts)},
               {"discards", std::move(discards)},
               {"capExceeded", result.capExceeded}});
      return kOk;
    }

    if (*tree) {
      if (*treeInit) {
        if (fs::exists(o.workspace / "tree.json"))
          throw InputError(o.workspace.string() + " already holds a tree");
        navigator::Tree t(load(project), o.navigator());
        t.save(o.workspace);
        o.print(t.treeJson());
        return kOk;
      }
      auto t = openTree(o);
      if (*treeShow) {
        o.print(t->treeJson());
      } else if (*treeNode) {
        auto n = t->node(nodeId);
        Json out = navigator::Tree::nodeJson(n);
        if (n.report) out["report"] = {{"flaws", json::toJson(n.report->flaws)}, {"analysis", json::toJson(n.report->analysis)}};
        o.print(out);
      } else if (*treeAnalyze) {
        auto a = t->analyze(nodeId);
        t->save(o.workspace);
        o.print({{"node", navigator::Tree::nodeJson(t->node(nodeId))},
                 {"flaws", json::toJson(a.flaws)},
                 {"analysis", json::toJson(a.analysis)}});
      } else if (*treeExpand) {
        auto pat = navigator::patternFromName(pattern, k);
        if (!pat) throw InputError("unknown pattern '" + pattern + "'");
        auto pipeline = t->instantiate(nodeId, *pat).toString();
        auto added = t->expand(nodeId, *pat);
        t->save(o.workspace);
        Json kids = Json::array();
        for (auto& id : added) kids.push_back(navigator::Tree::nodeJson(t->node(id)));
        o.print({{"pipeline", pipeline}, {"added", std::move(kids)}});
      } else {
        if (*treeAccept)
          t->accept(nodeId);
        else
          t->reject(nodeId);
        t->save(o.workspace);
        o.print(navigator::Tree::nodeJson(t->node(nodeId)));
      }
      return kOk;
    }

    if (*serve) {
      gateway::ServiceConfig cfg;
      cfg.host = host;
      cfg.port = port;
      cfg.workspace = o.workspace;
      cfg.navigator = o.navigator();
      gateway::Service service(cfg);
      runningService = &service;
      std::signal(SIGINT, onSignal);
      std::signal(SIGTERM, onSignal);
      std::thread announce([&] {
        service.waitUntilReady();
        std::cerr << "serving " << o.workspace.string() << " on http://" << host << ":" << service.boundPort() << '\n';
      });
      bool ok = service.listen();
      announce.join();
      runningService = nullptr;
      if (!ok) {
        std::cerr << "dse: cannot listen on " << host << ":" << port << '\n';
        return kInternal;
      }
      return kOk;
    }
  } catch (const InputError& e) {
    std::cerr << "dse: " << e.what() << '\n';
    return kDiagnostics;
  } catch (const kernel::DiagnosticError& e) {
    for (auto& d : e.diagnostics()) std::cerr << surface::formatDiagnostic(d, {}) << '\n';
    return kDiagnostics;
  } catch (const forge::PipelineSyntaxError& e) {
    std::cerr << "dse: pipeline syntax error at offset " << e.offset() << ": " << e.what() << '\n';
    return kDiagnostics;
  } catch (const navigator::AnalysisFailed& e) {
    std::cerr << "dse: analysis failed: " << e.what() << '\n';
    return kDiagnostics;
  } catch (const navigator::InvalidTransition& e) {
    std::cerr << "dse: " << e.what() << '\n';
    return kDiagnostics;
  } catch (const navigator::UnknownNode& e) {
    std::cerr << "dse: " << e.what() << '\n';
    return kDiagnostics;
  } catch (const std::invalid_argument& e) {
    std::cerr << "dse: " << e.what() << '\n';
    return kDiagnostics;
  } catch (const std::exception& e) {
    std::cerr << "dse: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
