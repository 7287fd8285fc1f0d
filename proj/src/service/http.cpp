#include "pbm/service/http.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>

#include "pbm/error.hpp"

namespace pbm::service {

using nlohmann::json;

namespace {

int status_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::not_found: return 404;
        case ErrorKind::conflict: return 409;
        case ErrorKind::io: return 500;
        default: return 400;
    }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
    send_json(res, {{"error", to_string(kind)}, {"message", message}}, status_for(kind));
}

/// Runs a handler, turning exceptions into JSON error responses.
template <class F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_error(res, e.kind(), e.what());
        } catch (const json::exception& e) {
            send_error(res, ErrorKind::invalid_argument, e.what());
        } catch (const std::exception& e) {
            send_json(res, {{"error", "internal"}, {"message", e.what()}}, 500);
        }
    };
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::invalid_argument, std::string("request body is not JSON: ") + e.what());
    }
}

std::optional<std::string> annotator_header(const httplib::Request& req) {
    if (req.has_header("X-Annotator-Id")) {
        return req.get_header_value("X-Annotator-Id");
    }
    return std::nullopt;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::not_found, "missing asset: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

HttpServer::HttpServer(Service& service, HttpOptions options)
    : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    if (options_.port == 0) {
        const int port = server_->bind_to_any_port(options_.host);
        if (port < 0) {
            throw Error(ErrorKind::io, "cannot bind " + options_.host);
        }
        options_.port = port;
        return port;
    }
    if (!server_->bind_to_port(options_.host, options_.port)) {
        throw Error(ErrorKind::io, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
    return options_.port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_) {
        server_->stop();
    }
}

void HttpServer::install_routes() {
    auto& s = *server_;
    Service& svc = service_;

    s.Get("/config", guarded([&svc](const httplib::Request&, httplib::Response& res) {
        send_json(res, svc.client_config());
    }));

    s.Post("/pairs", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send_json(res, to_json(svc.register_pair(pair_from_json(parse_body(req)))), 201);
    }));

    s.Get(R"(/pairs/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto p = svc.pair(req.matches[1]);
        if (!p) {
            throw Error(ErrorKind::not_found, "unknown pair '" + std::string(req.matches[1]) + "'");
        }
        send_json(res, to_json(*p));
    }));

    s.Get(R"(/images/([^/]+)/(a|b))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto p = svc.pair(req.matches[1]);
        if (!p) {
            throw Error(ErrorKind::not_found, "unknown pair '" + std::string(req.matches[1]) + "'");
        }
        const auto& side = req.matches[2] == "a" ? p->a : p->b;
        res.set_content(read_file(side.image), "image/png");
    }));

    s.Post(R"(/compare/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send_json(res, pbm::to_json(svc.run_comparison(req.matches[1])));
    }));

    s.Get(R"(/results/([^/]+)/evidence\.svg)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        res.set_content(svc.evidence_svg(req.matches[1]), "image/svg+xml");
    }));

    s.Get(R"(/results/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto r = svc.result(req.matches[1]);
        if (!r) {
            throw Error(ErrorKind::not_found, "no comparison result for pair '" + std::string(req.matches[1]) + "'");
        }
        send_json(res, pbm::to_json(*r));
    }));

    s.Get("/trials/next", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        std::string annotator = req.get_param_value("annotator");
        if (annotator.empty()) {
            annotator = annotator_header(req).value_or("");
        }
        const TrialStep step =
            req.has_param("step") ? parse_trial_step(req.get_param_value("step")) : TrialStep::evaluation;
        send_json(res, svc.trial_payload(svc.next_trial(annotator, step)));
    }));

    s.Get(R"(/trials/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const auto t = svc.trial(req.matches[1]);
        if (!t) {
            throw Error(ErrorKind::not_found, "unknown trial '" + std::string(req.matches[1]) + "'");
        }
        send_json(res, svc.trial_payload(*t));
    }));

    s.Post(R"(/trials/([^/]+)/decision)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        if (!body.is_object() || !body.contains("decision") || !body.at("decision").is_string()) {
            throw Error(ErrorKind::invalid_argument, "body needs a string 'decision'");
        }
        std::vector<Annotation> anns;
        if (body.contains("annotations")) {
            if (!body.at("annotations").is_array()) {
                throw Error(ErrorKind::invalid_argument, "'annotations' must be an array");
            }
            for (const auto& a : body.at("annotations")) {
                anns.push_back(annotation_from_json(a));
            }
        }
        const auto t = svc.submit_decision(req.matches[1], parse_decision(body.at("decision").get<std::string>()),
                                           std::move(anns), annotator_header(req));
        send_json(res, to_json(t));
    }));

    s.Get("/stats/human", guarded([&svc](const httplib::Request&, httplib::Response& res) {
        const auto t = svc.human_stats();
        json body = pbm::to_json(t);
        body["table"] = format_table(t);
        send_json(res, body);
    }));

    s.Get("/stats/changes", guarded([&svc](const httplib::Request&, httplib::Response& res) {
        const auto t = svc.change_stats();
        json body = pbm::to_json(t);
        body["table"] = format_table(t);
        send_json(res, body);
    }));

    s.Post("/reviews", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        std::string annotator = body.value("annotator_id", std::string());
        if (annotator.empty()) {
            annotator = annotator_header(req).value_or("");
        }
        send_json(res,
                  to_json(svc.record_review(body.at("pair_id").get<std::string>(), annotator,
                                            body.at("agree").get<bool>())),
                  201);
    }));

    s.Get(R"(/reviews/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        json out = json::array();
        for (const auto& r : svc.reviews(req.matches[1])) {
            out.push_back(to_json(r));
        }
        send_json(res, out);
    }));

    if (!options_.static_dir.empty()) {
        s.set_mount_point("/", options_.static_dir.string());
    }
}

}  // namespace pbm::service
