#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "examforge/json_io.hpp"
#include "examforge/workspace.hpp"

namespace examforge {

inline constexpr const char* kBankEnvVar = "EXAMFORGE_BANK";

// Error payload of every non-2xx response:
//   {"error": {"machine_code": ..., "message": ..., "details": ...}}
struct ApiError {
  int http_status = 500;
  std::string machine_code;
  std::string human_message;
  Json details;  // null or e.g. an embedded feasibility report
};

ApiError to_api_error(const std::exception& e);

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";

  static ApiResponse json(int status, const Json& payload);
  static ApiResponse error(const ApiError& e);
};

using QueryParams = std::multimap<std::string, std::string>;

// Transport-independent handlers for the JSON API; HttpServer routes to them.
// Safe to call concurrently: session mutations serialize on the transcript
// lock, accept additionally takes the bank directory lock.
class Service {
 public:
  explicit Service(std::filesystem::path bank_dir);

  Workspace& workspace() { return workspace_; }

  ApiResponse list_problems(const QueryParams& query);             // GET  /api/bank/problems
  ApiResponse get_problem(const std::string& id, const QueryParams& query);  // GET /api/bank/problems/{id}
  ApiResponse list_sessions();                                     // GET  /api/sessions
  ApiResponse create_session(const std::string& body);             // POST /api/sessions
  ApiResponse get_session(const std::string& id);                  // GET  /api/sessions/{id}
  ApiResponse step(const std::string& id, const std::string& body);  // POST /api/sessions/{id}/step
  ApiResponse accept(const std::string& id);                       // POST /api/sessions/{id}/accept
  ApiResponse abandon(const std::string& id);                      // POST /api/sessions/{id}/abandon
  ApiResponse render(const std::string& id, const QueryParams& query);  // GET /api/sessions/{id}/render

 private:
  Workspace workspace_;
};

// JSON views shared by the service and the CLI's --format json output.
Json step_json(const Session& session, const Step& step, const Bank& bank);
Json session_json(const Session& session, const Bank& bank);

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Binds host:port (port 0 picks a free one) and returns the bound port,
  // or -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace examforge
