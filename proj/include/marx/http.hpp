#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace marx {

class Engine;

/// GET  /api/plan                 summarized plan
/// GET  /api/mmdp/summary         abstraction statistics
/// GET  /api/env                  agents and tasks for the query builder
/// POST /api/query                {"query": "..."}; add ?timings=1 for per-phase times
/// POST /api/abstraction/rebuild  re-sample the abstraction
/// Errors answer {error, module, detail}: 400 for bad input, 409 while the
/// abstraction is being rewritten. Phase times always go in Server-Timing.
void register_routes(httplib::Server& server, Engine& engine);

/// Blocks serving until the process is stopped.
void serve(Engine& engine, const std::string& host, int port);

}  // namespace marx
