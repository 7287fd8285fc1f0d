#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "pbm/service/service.hpp"

namespace httplib {
class Server;
}

namespace pbm::service {

struct HttpOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 = pick a free port
    std::filesystem::path static_dir;  // optional workbench bundle served under /
};

/// JSON-over-HTTP facade for Service. Error bodies are
/// {"error": <kind>, "message": <text>}.
class HttpServer {
public:
    HttpServer(Service& service, HttpOptions options);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and returns the bound port; listen() then blocks until stop().
    int bind();
    void listen();
    void stop();

private:
    void install_routes();

    Service& service_;
    HttpOptions options_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace pbm::service
