#include "qtree/server.hpp"

#include "httplib.h"
#include "qtree/io.hpp"

namespace qtree {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, json{{"error", message}});
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ServiceError(400, std::string("malformed JSON: ") + e.what());
    }
}

// Runs a handler, mapping library exceptions onto the documented status codes.
template <class Handler>
httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const ServiceError& e) {
            send_error(res, e.status(), e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, e.what());
        } catch (const std::invalid_argument& e) {
            send_error(res, 400, e.what());
        } catch (const std::domain_error& e) {
            send_error(res, 400, e.what());
        }
    };
}

json instance_summary(const RegisteredInstance& reg) {
    const ProblemInstance& inst = *reg.instance;
    return json{{"id", reg.id},
                {"name", reg.name},
                {"objects", inst.num_objects},
                {"queries", inst.num_queries},
                {"groups", inst.has_labels() ? inst.group_count(Mode::group) : 0}};
}

}  // namespace

std::unique_ptr<httplib::Server> make_server(SessionStore& store, const ServerOptions& options) {
    auto server = std::make_unique<httplib::Server>();

    if (!options.cors_origin.empty()) {
        server->set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                     {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                                     {"Access-Control-Allow-Headers", "Content-Type"}});
        server->Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }
    if (!options.static_dir.empty()) server->set_mount_point("/", options.static_dir);

    server->Post("/instances", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        const bool wrapped = body.contains("instance");
        ProblemInstance instance = instance_from_json(wrapped ? body.at("instance") : body);
        const std::string name = wrapped ? body.value("name", std::string()) : std::string();
        const std::string id = store.register_instance(std::move(instance), name);
        send_json(res, 201, instance_summary(store.get_instance(id)));
    }));

    server->Get("/instances", guarded([&store](const httplib::Request&, httplib::Response& res) {
        json list = json::array();
        for (const auto& reg : store.list_instances()) list.push_back(instance_summary(reg));
        send_json(res, 200, list);
    }));

    server->Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        if (!body.contains("instance_id")) throw ServiceError(400, "instance_id is required");
        const std::string instance_id = body.at("instance_id").get<std::string>();
        const BuilderConfig config = body.contains("config") ? config_from_json(body.at("config")) : BuilderConfig{};
        const SessionState state = store.create_session(instance_id, config);
        send_json(res, 201, session_to_json(state, *store.get_instance(instance_id).instance));
    }));

    server->Get(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const SessionState state = store.get_session(req.matches[1]);
        send_json(res, 200, session_to_json(state, *store.get_instance(state.instance_id).instance));
    }));

    server->Post(R"(/sessions/([^/]+)/answers)",
                 guarded([&store](const httplib::Request& req, httplib::Response& res) {
                     const json body = parse_body(req);
                     if (!body.contains("bit") || !body.at("bit").is_number_integer())
                         throw ServiceError(400, "bit must be 0 or 1");
                     std::optional<int> expected;
                     if (body.contains("query") && !body.at("query").is_null())
                         expected = body.at("query").get<int>();
                     const SessionState state = store.submit_answer(req.matches[1], body.at("bit").get<int>(), expected);
                     send_json(res, 200, session_to_json(state, *store.get_instance(state.instance_id).instance));
                 }));

    server->Delete(R"(/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        store.delete_session(req.matches[1]);
        res.status = 204;
    }));

    return server;
}

}  // namespace qtree
