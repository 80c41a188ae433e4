#include "marx/http.hpp"

#include <cstdio>

#include "httplib.h"
#include "marx/error.hpp"
#include "marx/service.hpp"

namespace marx {
namespace {

constexpr const char* kJson = "application/json";

int status_for(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err == nullptr) return 500;
  switch (err->code()) {
    case ErrorCode::Busy: return 409;
    case ErrorCode::ParseError:
    case ErrorCode::UnknownTask:
    case ErrorCode::UnknownAgent:
    case ErrorCode::InvalidQuery:
    case ErrorCode::InvalidArgument:
    case ErrorCode::MalformedFile: return 400;
    case ErrorCode::NoCompletePath: return 404;
    default: return 500;
  }
}

void send(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

std::string server_timing(const Timings& t) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "abstraction;dur=%.3f, check;dur=%.3f, rollout;dur=%.3f, explain;dur=%.3f",
                t.abstractionMs, t.checkMs, t.rolloutMs, t.explainMs);
  return buf;
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const std::exception& e) {
      send(res, error_to_json(e), status_for(e));
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, Engine& engine) {
  server.Get("/api/plan", guarded([&engine](const httplib::Request&, httplib::Response& res) {
               send(res, engine.plan());
             }));
  server.Get("/api/mmdp/summary", guarded([&engine](const httplib::Request&, httplib::Response& res) {
               send(res, engine.summary());
             }));
  server.Get("/api/env", guarded([&engine](const httplib::Request&, httplib::Response& res) {
               send(res, engine.env_summary());
             }));
  server.Post("/api/query", guarded([&engine](const httplib::Request& req, httplib::Response& res) {
                Json body = parse_json_text(req.body, "request body");
                if (!body.is_object() || !body.contains("query") || !body["query"].is_string()) {
                  throw Error(ErrorCode::InvalidArgument, "service", "body must be {\"query\": string}");
                }
                Engine::Response r = engine.query(body["query"].get<std::string>());
                res.set_header("Server-Timing", server_timing(r.timings));
                Json out = r.body;
                if (req.get_param_value("timings") == "1") {
                  out["timings"] = {{"abstractionMs", r.timings.abstractionMs},
                                    {"checkMs", r.timings.checkMs},
                                    {"rolloutMs", r.timings.rolloutMs},
                                    {"explainMs", r.timings.explainMs}};
                }
                send(res, out);
              }));
  server.Post("/api/abstraction/rebuild", guarded([&engine](const httplib::Request&, httplib::Response& res) {
                send(res, engine.rebuild());
              }));
}

void serve(Engine& engine, const std::string& host, int port) {
  httplib::Server server;
  register_routes(server, engine);
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::InvalidArgument, "service", "cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace marx
