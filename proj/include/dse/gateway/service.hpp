#pragma once

// HTTP/JSON front end over an exploration tree kept in a workspace directory.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "dse/gateway/json.hpp"
#include "dse/navigator/navigator.hpp"

namespace httplib {
class Server;
}

namespace dse::gateway {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path workspace;
  navigator::NavigatorConfig navigator;

  void validate() const;  // throws std::invalid_argument
};

struct Response {
  int status = 200;
  json::Json body;
};

// Uniform error body: {code, message, span?}.
Response errorResponse(int status, const std::string& code, const std::string& message,
                       const json::Json& span = nullptr);

class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  // Routes one request. `query` holds decoded query parameters. POST
  // requests carrying the same non-empty request id get the first response
  // again without re-running.
  Response handle(const std::string& method, const std::string& path, const std::string& body,
                  const std::map<std::string, std::string>& query = {}, const std::string& requestId = {});

  // Binds and serves until stop(); returns false when binding fails.
  bool listen();
  int boundPort() const { return boundPort_; }
  void stop();
  // Blocks until the server accepts connections.
  void waitUntilReady() const;

 private:
  Response route(const std::string& method, const std::string& path, const std::string& body,
                 const std::map<std::string, std::string>& query);
  Response createProject(const std::string& body);
  Response nodeGet(const std::string& id, const std::string& what, const std::map<std::string, std::string>& query);
  Response nodePost(const std::string& id, const std::string& what, const std::string& body);
  std::shared_ptr<navigator::Tree> tree() const;
  void persist(const navigator::Tree& t) const;

  ServiceConfig config_;
  std::shared_ptr<navigator::Tree> tree_;
  mutable std::shared_mutex treeMu_;
  std::mutex replayMu_;
  std::map<std::string, Response> replies_;
  std::map<std::string, std::shared_ptr<std::mutex>> inFlight_;
  std::unique_ptr<httplib::Server> server_;
  int boundPort_ = 0;
};

}  // namespace dse::gateway
