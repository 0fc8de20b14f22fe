#pragma once

// HTTP API over a Workspace. Routing is transport-independent so handlers can
// be exercised in-process; serve() binds it to cpp-httplib.

#include <map>
#include <string>

#include "cairo/service/store.hpp"

namespace cairo {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

struct ApiOptions {
  bool allow_exec_oracle = false;  // exec: oracles run shell commands
};

class Api {
 public:
  explicit Api(Workspace& ws, ApiOptions opts = {}) : ws_(ws), opts_(opts) {}
  ApiResponse handle(const ApiRequest& req);

 private:
  Workspace& ws_;
  ApiOptions opts_;
};

// Blocks until the server stops. Returns false if the port cannot be bound.
bool serve(Api& api, const std::string& host, int port);

}  // namespace cairo
