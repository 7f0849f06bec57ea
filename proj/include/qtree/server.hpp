#pragma once

#include <memory>
#include <string>

#include "qtree/session.hpp"

namespace httplib {
class Server;
}

namespace qtree {

struct ServerOptions {
    std::string cors_origin;  // empty: no CORS headers
    std::string static_dir;   // empty: no static files (web console assets)
};

// JSON over HTTP:
//   POST   /instances                {"name"?, "instance": <instance JSON>} or a bare instance
//   GET    /instances
//   POST   /sessions                 {"instance_id", "config"}
//   GET    /sessions/{id}
//   POST   /sessions/{id}/answers    {"bit": 0|1, "query"?: j}
//   DELETE /sessions/{id}
// Errors answer 400/404/409 with {"error": string}.
std::unique_ptr<httplib::Server> make_server(SessionStore& store, const ServerOptions& options = {});

}  // namespace qtree
