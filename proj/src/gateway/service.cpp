#include "dse/gateway/service.hpp"

#include <httplib.h>

#include <fstream>
#include <sstream>

#include "dse/kernel/diff.hpp"
#include "dse/surface/surface.hpp"

namespace dse::gateway {

namespace fs = std::filesystem;
using json::Json;

void ServiceConfig::validate() const {
  if (workspace.empty()) throw std::invalid_argument("a workspace directory is required");
  std::error_code ec;
  fs::create_directories(workspace, ec);
  if (!fs::is_directory(workspace)) throw std::invalid_argument("workspace " + workspace.string() + " is not a directory");
  auto probe = workspace / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::invalid_argument("workspace " + workspace.string() + " is not writable");
  }
  fs::remove(probe, ec);
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range");
  navigator.sim.validate();
  navigator.former.validate();
}

Response errorResponse(int status, const std::string& code, const std::string& message, const Json& span) {
  Json body = {{"code", code}, {"message", message}};
  if (!span.is_null()) body["span"] = span;
  return {status, std::move(body)};
}

namespace {

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/'))
    if (!part.empty()) out.push_back(part);
  return out;
}

Json parseBody(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    auto j = Json::parse(body);
    if (!j.is_object()) throw json::BadDocument("request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw json::BadDocument(std::string("request body is not JSON: ") + e.what());
  }
}

Json reportJson(const std::string& id, const navigator::Analysis& a) {
  return {{"id", id}, {"flaws", json::toJson(a.flaws)}, {"analysis", json::toJson(a.analysis)}};
}

}  // namespace

Service::Service(ServiceConfig config) : config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  config_.validate();
  if (fs::exists(config_.workspace / "tree.json"))
    tree_ = std::shared_ptr<navigator::Tree>(navigator::Tree::load(config_.workspace, config_.navigator));
}

Service::~Service() { stop(); }

std::shared_ptr<navigator::Tree> Service::tree() const {
  std::shared_lock lock(treeMu_);
  return tree_;
}

void Service::persist(const navigator::Tree& t) const { t.save(config_.workspace); }

Response Service::handle(const std::string& method, const std::string& path, const std::string& body,
                         const std::map<std::string, std::string>& query, const std::string& requestId) {
  if (method != "POST" || requestId.empty()) return route(method, path, body, query);

  // One lock per request id keeps retries from running the same job twice.
  std::string key = requestId + " " + method + " " + path;
  std::shared_ptr<std::mutex> idLock;
  {
    std::lock_guard g(replayMu_);
    auto& slot = inFlight_[key];
    if (!slot) slot = std::make_shared<std::mutex>();
    idLock = slot;
  }
  std::lock_guard held(*idLock);
  {
    std::lock_guard g(replayMu_);
    auto it = replies_.find(key);
    if (it != replies_.end()) return it->second;
  }
  auto r = route(method, path, body, query);
  std::lock_guard g(replayMu_);
  replies_[key] = r;
  return r;
}

Response Service::route(const std::string& method, const std::string& path, const std::string& body,
                        const std::map<std::string, std::string>& query) {
  auto seg = segments(path);
  try {
    if (seg.size() == 1 && seg[0] == "tree") {
      if (method != "GET") return errorResponse(405, "method-not-allowed", "use GET on /tree");
      auto t = tree();
      if (!t) return errorResponse(404, "no-project", "no project has been uploaded");
      return {200, t->treeJson()};
    }
    if (seg.size() == 1 && seg[0] == "projects") {
      if (method != "POST") return errorResponse(405, "method-not-allowed", "use POST on /projects");
      return createProject(body);
    }
    if ((seg.size() == 2 || seg.size() == 3) && seg[0] == "nodes") {
      std::string what = seg.size() == 3 ? seg[2] : "";
      bool isPost = what == "analyze" || what == "expand" || what == "accept" || what == "reject";
      bool isGet = what.empty() || what == "model" || what == "diff" || what == "report";
      if (!isPost && !isGet) return errorResponse(404, "not-found", "no route for " + path);
      if (isPost && method != "POST") return errorResponse(405, "method-not-allowed", "use POST on " + path);
      if (isGet && method != "GET") return errorResponse(405, "method-not-allowed", "use GET on " + path);
      return isPost ? nodePost(seg[1], what, body) : nodeGet(seg[1], what, query);
    }
    return errorResponse(404, "not-found", "no route for " + path);
  } catch (const navigator::UnknownNode& e) {
    return errorResponse(404, "unknown-node", e.what());
  } catch (const navigator::InvalidTransition& e) {
    return errorResponse(409, "invalid-transition", e.what());
  } catch (const navigator::PatternInapplicable& e) {
    return errorResponse(400, "pattern-inapplicable", e.what());
  } catch (const navigator::AnalysisFailed& e) {
    return errorResponse(400, "analysis-failed", e.what());
  } catch (const json::BadDocument& e) {
    return errorResponse(400, "bad-request", e.what());
  } catch (const nlohmann::json::exception& e) {
    return errorResponse(400, "bad-request", e.what());
  } catch (const std::exception& e) {
    return errorResponse(500, "internal", e.what());
  }
}

Response Service::createProject(const std::string& body) {
  auto req = parseBody(body);
  auto sources = json::sourcesFromJson(req);
  std::string root = req.contains("root") && req["root"].is_string() ? req["root"].get<std::string>() : "";
  bool replace = req.contains("replace") && req["replace"].is_boolean() && req["replace"].get<bool>();

  auto parsed = surface::parseProject(sources, root);
  if (!parsed.ok()) {
    const auto& first = parsed.diagnostics.front();
    auto r = errorResponse(400, "diagnostics", surface::formatDiagnostic(first, sources),
                           first.span.valid() ? json::toJson(first.span) : Json(nullptr));
    Json all = Json::array();
    for (auto& d : parsed.diagnostics) {
      auto dj = json::toJson(d);
      dj["text"] = surface::formatDiagnostic(d, sources);
      all.push_back(std::move(dj));
    }
    r.body["diagnostics"] = std::move(all);
    return r;
  }

  std::unique_lock lock(treeMu_);
  if (tree_ && !replace) return errorResponse(409, "project-exists", "the workspace already holds a project");
  if (tree_) {
    std::error_code ec;
    fs::remove_all(config_.workspace / "nodes", ec);
    fs::remove_all(config_.workspace / "reports", ec);
  }
  tree_ = std::make_shared<navigator::Tree>(std::move(parsed.project), config_.navigator);
  persist(*tree_);
  auto n = tree_->node("root");
  return {201, {{"id", n.id}, {"status", navigator::statusName(n.status)}, {"hash", n.hash.hex()},
                {"node", navigator::Tree::nodeJson(n)}}};
}

Response Service::nodeGet(const std::string& id, const std::string& what,
                          const std::map<std::string, std::string>& query) {
  auto t = tree();
  if (!t) return errorResponse(404, "no-project", "no project has been uploaded");
  auto n = t->node(id);
  if (what.empty()) return {200, navigator::Tree::nodeJson(n)};
  if (what == "model") {
    auto units = surface::render(n.project);
    auto body = json::toJson(units, n.project.root);
    body["id"] = n.id;
    return {200, std::move(body)};
  }
  if (what == "diff") {
    auto it = query.find("against");
    std::string against = it != query.end() ? it->second : (n.parent.empty() ? n.id : n.parent);
    auto base = t->node(against);
    return {200, {{"id", n.id}, {"against", base.id}, {"edits", json::toJson(kernel::diff(base.project, n.project))}}};
  }
  if (!n.report) return errorResponse(404, "no-report", "node " + id + " has not been analyzed");
  return {200, reportJson(id, *n.report)};
}

Response Service::nodePost(const std::string& id, const std::string& what, const std::string& body) {
  auto t = tree();
  if (!t) return errorResponse(404, "no-project", "no project has been uploaded");
  auto req = parseBody(body);
  (void)t->node(id);  // 404 before doing any work

  if (what == "analyze") {
    navigator::Analysis a;
    try {
      a = t->analyze(id);
    } catch (const navigator::AnalysisFailed&) {
      persist(*t);
      throw;
    }
    persist(*t);
    return {200, {{"node", navigator::Tree::nodeJson(t->node(id))}, {"report", reportJson(id, a)}}};
  }
  if (what == "expand") {
    if (!req.contains("pattern") || !req["pattern"].is_string())
      throw json::BadDocument("expand needs a 'pattern' string");
    int k = 1;
    if (req.contains("k")) {
      if (!req["k"].is_number_integer()) throw json::BadDocument("'k' must be an integer");
      k = req["k"].get<int>();
    }
    auto pattern = navigator::patternFromName(req["pattern"].get<std::string>(), k);
    if (!pattern) throw json::BadDocument("unknown pattern '" + req["pattern"].get<std::string>() + "'");
    std::optional<forge::Focus> focus;
    for (auto key : {"focus", "focusOverride"})
      if (req.contains(key) && !req[key].is_null()) focus = json::focusFromJson(req[key]);
    auto pipeline = t->instantiate(id, *pattern, focus).toString();
    std::vector<std::string> added;
    try {
      added = t->expand(id, *pattern, focus);
    } catch (const navigator::PatternInapplicable&) {
      persist(*t);
      throw;
    }
    persist(*t);
    Json children = Json::array();
    for (auto& c : added) children.push_back(navigator::Tree::nodeJson(t->node(c)));
    return {200, {{"node", navigator::Tree::nodeJson(t->node(id))},
                  {"pipeline", pipeline},
                  {"added", std::move(children)}}};
  }
  if (what == "accept")
    t->accept(id);
  else
    t->reject(id);
  persist(*t);
  return {200, navigator::Tree::nodeJson(t->node(id))};
}

bool Service::listen() {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (auto& [k, v] : req.params) query.emplace(k, v);
    auto r = handle(req.method, req.path, req.body, query, req.get_header_value("X-Request-Id"));
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server_->Get(R"(/.*)", forward);
  server_->Post(R"(/.*)", forward);
  server_->Put(R"(/.*)", forward);
  server_->Delete(R"(/.*)", forward);

  if (config_.port == 0) {
    boundPort_ = server_->bind_to_any_port(config_.host);
    if (boundPort_ <= 0) return false;
  } else {
    if (!server_->bind_to_port(config_.host, config_.port)) return false;
    boundPort_ = config_.port;
  }
  return server_->listen_after_bind();
}

void Service::stop() { server_->stop(); }

void Service::waitUntilReady() const { server_->wait_until_ready(); }

}  // namespace dse::gateway
