#pragma once
// HTTP front end for the calculator API.

#include <string>

#include <httplib.h>

#include "ejab/api.hpp"

namespace ejab::api {

/// Every request goes through route(); responses are JSON and carry a
/// permissive CORS header so a static calculator page can call the API.
/// Catch-all handlers (not the pre-routing hook) so the body has been read.
inline void install_routes(httplib::Server& server) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    auto dispatch = [](const httplib::Request& req, httplib::Response& res) {
        const auto out = route(req.method, req.path, req.body);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    server.Get(".*", dispatch);
    server.Post(".*", dispatch);
    server.Put(".*", dispatch);
    server.Patch(".*", dispatch);
    server.Delete(".*", dispatch);
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

}  // namespace ejab::api
