#include "examforge/service.hpp"

#include "httplib.h"

namespace examforge {

namespace {

std::optional<std::string> param(const QueryParams& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

int int_param(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int n = std::stoi(value, &used);
    if (used == value.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "query parameter " + key + " must be an integer");
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed JSON body: ") + e.what());
  }
}

template <typename Fn>
ApiResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return ApiResponse::error(to_api_error(e));
  }
}

QueryParams to_query(const httplib::Request& req) {
  QueryParams q;
  for (const auto& [k, v] : req.params) q.emplace(k, v);
  return q;
}

void reply(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body, api.content_type);
}

}  // namespace

ApiError to_api_error(const std::exception& e) {
  ApiError api;
  api.human_message = e.what();
  if (const auto* sel = dynamic_cast<const SelectionError*>(&e)) {
    api.details = to_json(sel->report());
  }
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    api.http_status = http_status(err->code());
    api.machine_code = std::string(machine_code(err->code()));
  } else {
    api.http_status = 500;
    api.machine_code = "internal_error";
  }
  return api;
}

ApiResponse ApiResponse::json(int status, const Json& payload) {
  return {status, payload.dump(2) + "\n", "application/json"};
}

ApiResponse ApiResponse::error(const ApiError& e) {
  Json j;
  j["error"] = {{"machine_code", e.machine_code},
                {"message", e.human_message},
                {"details", e.details}};
  return json(e.http_status, j);
}

Json step_json(const Session& session, const Step& st, const Bank& bank) {
  Json j;
  j["session_id"] = session.id;
  j["step_number"] = st.step_number;
  j["seed"] = seed_to_string(st.seed);
  j["decision_vector"] = to_json(st.decision_vector);
  j["status"] = st.ok() ? "ok" : st.failure_code;
  if (st.draft) {
    j["draft"] = to_json(*st.draft);
    j["metrics"] = to_json(st.draft->metrics);
    Json slots = Json::array();
    for (std::size_t i = 0; i < st.draft->assignment.size(); ++i) {
      Json row;
      row["slot"] = static_cast<int>(i) + 1;
      row["subarea"] = session.blueprint.slots[i].subarea;
      row["pinned"] = !st.decision_vector.entries[i].is_random();
      if (const Problem* p = bank.find(st.draft->assignment[i])) {
        row["problem"] = problem_json(*p);
      } else {
        row["problem"] = {{"id", st.draft->assignment[i]}};
      }
      slots.push_back(std::move(row));
    }
    j["slots"] = std::move(slots);
    j["feasibility"] = nullptr;
    j["message"] = nullptr;
  } else {
    j["draft"] = nullptr;
    j["metrics"] = nullptr;
    j["slots"] = nullptr;
    j["feasibility"] = st.failure ? to_json(*st.failure) : Json(nullptr);
    j["message"] = st.failure_message;
  }
  return j;
}

Json session_json(const Session& session, const Bank& bank) {
  Json j;
  j["session_id"] = session.id;
  j["status"] = std::string(status_name(session.status));
  j["base_seed"] = seed_to_string(session.base_seed);
  j["bank_ref"] = session.bank_ref;
  j["blueprint"] = to_json(session.blueprint);
  j["decision_vector"] = to_json(session.latest_decision_vector());
  Json steps = Json::array();
  for (const auto& st : session.steps) steps.push_back(step_json(session, st, bank));
  j["steps"] = std::move(steps);
  return j;
}

Service::Service(std::filesystem::path bank_dir) : workspace_(std::move(bank_dir)) {}

ApiResponse Service::list_problems(const QueryParams& query) {
  return guarded([&] {
    const auto bank = workspace_.bank();
    require_valid(*bank);
    ProblemFilter filter;
    filter.subarea = param(query, "subarea");
    if (auto v = param(query, "min_points")) filter.min_points = int_param("min_points", *v);
    if (auto v = param(query, "max_points")) filter.max_points = int_param("max_points", *v);
    if (auto v = param(query, "solo_level")) filter.solo_level = int_param("solo_level", *v);
    filter.ilo = param(query, "ilo");
    if (auto v = param(query, "unused_since")) filter.unused_since = Date::parse(*v);
    const bool bodies = param(query, "include") == std::optional<std::string>("body");
    Json list = Json::array();
    for (const auto& p : query_problems(*bank, filter)) {
      list.push_back(problem_json(p, bodies ? bank.get() : nullptr));
    }
    Json j;
    j["problems"] = std::move(list);
    return ApiResponse::json(200, j);
  });
}

ApiResponse Service::get_problem(const std::string& id, const QueryParams& query) {
  return guarded([&] {
    const auto bank = workspace_.bank();
    const bool bodies = param(query, "include") == std::optional<std::string>("body");
    return ApiResponse::json(200, problem_json(bank->at(id), bodies ? bank.get() : nullptr));
  });
}

ApiResponse Service::list_sessions() {
  return guarded([&] {
    Json list = Json::array();
    for (const auto& id : workspace_.sessions().list()) {
      try {
        const Session s = workspace_.load_session(id);
        list.push_back({{"session_id", s.id},
                        {"status", std::string(status_name(s.status))},
                        {"steps", s.steps.size()}});
      } catch (const Error&) {
        list.push_back({{"session_id", id}, {"status", "unreadable"}, {"steps", 0}});
      }
    }
    Json j;
    j["sessions"] = std::move(list);
    return ApiResponse::json(200, j);
  });
}

ApiResponse Service::create_session(const std::string& body) {
  return guarded([&] {
    const Json req = parse_body(body);
    if (!req.contains("blueprint")) throw Error(ErrorCode::kInvalidBlueprint, "missing \"blueprint\"");
    const Blueprint bp = blueprint_from_json(req.at("blueprint"));
    std::optional<std::uint64_t> seed;
    if (auto it = req.find("base_seed"); it != req.end() && !it->is_null()) seed = parse_seed(*it);
    std::string id;
    if (auto it = req.find("session_id"); it != req.end() && it->is_string()) id = it->get<std::string>();
    const Session s = workspace_.create_session(bp, seed, id);
    Json j;
    j["session_id"] = s.id;
    j["base_seed"] = seed_to_string(s.base_seed);
    j["bank_ref"] = s.bank_ref;
    j["blueprint"] = to_json(s.blueprint);
    return ApiResponse::json(201, j);
  });
}

ApiResponse Service::get_session(const std::string& id) {
  return guarded([&] {
    const Session s = workspace_.load_session(id);
    return ApiResponse::json(200, session_json(s, *workspace_.bank()));
  });
}

ApiResponse Service::step(const std::string& id, const std::string& body) {
  return guarded([&] {
    const Json req = parse_body(body);
    std::optional<DecisionVector> dv;
    if (auto it = req.find("decision_vector"); it != req.end() && !it->is_null()) {
      dv = decision_vector_from_json(*it);
    }
    const Session s = workspace_.run_step(id, [&](const Session& current, const Bank&) {
      return dv ? *dv : current.latest_decision_vector();
    });
    return ApiResponse::json(200, step_json(s, s.steps.back(), *workspace_.bank()));
  });
}

ApiResponse Service::accept(const std::string& id) {
  return guarded([&] {
    auto [s, bank] = workspace_.accept(id);
    Json usage = Json::array();
    for (const auto& pid : s.latest_draft()->assignment) {
      const Problem& p = bank.at(pid);
      Json dates = Json::array();
      for (const auto& d : p.usage_dates) dates.push_back(d.to_string());
      usage.push_back({{"id", pid}, {"usage_dates", std::move(dates)}});
    }
    Json j;
    j["session_id"] = s.id;
    j["status"] = std::string(status_name(s.status));
    j["step_number"] = s.steps.back().step_number;
    j["draft"] = to_json(*s.latest_draft());
    j["usage"] = std::move(usage);
    return ApiResponse::json(200, j);
  });
}

ApiResponse Service::abandon(const std::string& id) {
  return guarded([&] {
    const Session s = workspace_.abandon(id);
    Json j;
    j["session_id"] = s.id;
    j["status"] = std::string(status_name(s.status));
    return ApiResponse::json(200, j);
  });
}

ApiResponse Service::render(const std::string& id, const QueryParams& query) {
  return guarded([&] {
    const DocKind kind = parse_doc_kind(param(query, "kind").value_or("exam"));
    const RenderedDoc doc = workspace_.render(id, kind);
    return ApiResponse{200, doc.content, "text/plain; charset=utf-8"};
  });
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    const std::string sid = R"(/api/sessions/([A-Za-z0-9._-]+))";
    server.Get("/api/bank/problems", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.list_problems(to_query(req)));
    });
    server.Get(R"(/api/bank/problems/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 reply(res, service.get_problem(req.matches[1], to_query(req)));
               });
    server.Get("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, service.list_sessions());
    });
    server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.create_session(req.body));
    });
    server.Get(sid, [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.get_session(req.matches[1]));
    });
    server.Post(sid + "/step", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.step(req.matches[1], req.body));
    });
    server.Post(sid + "/accept", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.accept(req.matches[1]));
    });
    server.Post(sid + "/abandon", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.abandon(req.matches[1]));
    });
    server.Get(sid + "/render", [this](const httplib::Request& req, httplib::Response& res) {
      reply(res, service.render(req.matches[1], to_query(req)));
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      ApiError e;
      e.http_status = res.status;
      e.machine_code = res.status == 404 ? "not_found" : "http_error";
      e.human_message = "no such endpoint";
      const ApiResponse api = ApiResponse::error(e);
      res.set_content(api.body, api.content_type);
    });
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace examforge
