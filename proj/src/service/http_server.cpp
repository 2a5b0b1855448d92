#include "plainlang/service/http_server.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <functional>

namespace plainlang::service {

namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";
// Room for the multipart envelope around a maximum-size file.
constexpr std::size_t kMultipartOverhead = 64 * 1024;

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, ApiErrorCode code, std::string_view message) {
    send_json(res, http_status(code), error_body(code, message));
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) throw ApiError(ApiErrorCode::InvalidRequest, "request body is empty");
    try {
        return json::parse(req.body);
    } catch (const json::parse_error&) {
        throw ApiError(ApiErrorCode::InvalidRequest, "request body is not valid JSON");
    }
}

}  // namespace

struct HttpServer::Impl {
    std::shared_ptr<Service> service;
    httplib::Server server;
    std::thread thread;
    int port = -1;

    explicit Impl(std::shared_ptr<Service> s) : service(std::move(s)) {
        const auto& config = service->config();
        server.set_payload_max_length(config.max_upload_bytes + kMultipartOverhead);
        server.set_read_timeout(30, 0);
        server.set_write_timeout(30, 0);

        if (config.ui_origin) {
            const std::string origin = *config.ui_origin;
            server.set_default_headers({{"Access-Control-Allow-Origin", origin}, {"Vary", "Origin"}});
            server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
                res.status = 204;
                res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
                res.set_header("Access-Control-Allow-Headers", "Content-Type");
                res.set_header("Access-Control-Max-Age", "600");
            });
        }

        // Fills in bodies for statuses httplib produces on its own (404, 413, ...).
        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
            switch (res.status) {
                case 404: send_error(res, ApiErrorCode::NotFound, "no such endpoint"); break;
                case 405: send_error(res, ApiErrorCode::MethodNotAllowed, "method not allowed"); break;
                case 413: send_error(res, ApiErrorCode::TooLarge, "request body is too large"); break;
                case 400: send_error(res, ApiErrorCode::InvalidRequest, "malformed request"); break;
                default: send_error(res, ApiErrorCode::InternalError, "request failed"); break;
            }
            return httplib::Server::HandlerResponse::Handled;
        });

        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
            send_error(res, ApiErrorCode::InternalError, "internal error");
        });

        if (config.log_requests) {
            // Method, path and status only; request bodies hold user text.
            server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
                std::fprintf(stderr, "%s %s -> %d\n", req.method.c_str(), req.path.c_str(), res.status);
            });
        }

        auto post_json = [this](const char* path, std::function<json(const json&)> handler, int ok_status = 200) {
            server.Post(path, [handler, ok_status](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                    const json out = handler(parse_body(req));
                    if (ok_status == 204) {
                        res.status = 204;
                    } else {
                        send_json(res, ok_status, out);
                    }
                });
            });
        };

        post_json("/api/simplify", [this](const json& j) { return service->simplify(j); });
        post_json("/api/expert/rephrase", [this](const json& j) { return service->rephrase(j); });
        post_json("/api/expert/synonyms", [this](const json& j) { return service->synonyms(j); });
        post_json("/api/expert/definition", [this](const json& j) { return service->definition(j); });
        post_json("/api/sentences", [this](const json& j) { return service->sentences(j); });
        post_json("/api/split", [this](const json& j) { return service->sentences(j); });
        post_json(
            "/api/feedback",
            [this](const json& j) {
                service->feedback(j);
                return json();
            },
            204);

        server.Post("/api/upload", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                if (!req.is_multipart_form_data() || !req.has_file("file")) {
                    throw ApiError(ApiErrorCode::InvalidRequest, "expected multipart form data with a 'file' field");
                }
                const auto file = req.get_file_value("file");
                if (file.content.size() > service->config().max_upload_bytes) {
                    throw ApiError(ApiErrorCode::TooLarge, "file exceeds the upload limit");
                }
                send_json(res, 200, service->upload(file.filename, file.content));
            });
        });

        server.Get("/api/feedback/summary", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                std::optional<std::string> audience;
                if (req.has_param("audience")) audience = req.get_param_value("audience");
                send_json(res, 200, service->feedback_summary(audience));
            });
        });

        server.Get("/api/split", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                if (!req.has_param("text")) throw ApiError(ApiErrorCode::InvalidRequest, "missing 'text' parameter");
                send_json(res, 200, service->sentences(json{{"text", req.get_param_value("text")}}));
            });
        });

        server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, service->health()); });
        });

        for (const char* path : {"/api/simplify", "/api/upload", "/api/expert/rephrase", "/api/expert/synonyms",
                                 "/api/expert/definition", "/api/sentences", "/api/feedback"}) {
            server.Get(path, [](const httplib::Request&, httplib::Response& res) {
                send_error(res, ApiErrorCode::MethodNotAllowed, "use POST");
            });
        }
    }

    template <typename F>
    static void guarded(httplib::Response& res, F&& f) {
        try {
            f();
        } catch (const ApiError& e) {
            send_error(res, e.kind(), e.what());
        } catch (const std::bad_alloc&) {
            send_error(res, ApiErrorCode::InternalError, "out of memory");
        } catch (const std::exception&) {
            send_error(res, ApiErrorCode::InternalError, "internal error");
        }
    }
};

HttpServer::HttpServer(std::shared_ptr<Service> service) : impl_(std::make_unique<Impl>(std::move(service))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    const auto& config = impl_->service->config();
    if (config.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(config.host);
    } else {
        impl_->port = impl_->server.bind_to_port(config.host, config.port) ? config.port : -1;
    }
    if (impl_->port < 0) {
        throw ApiError(ApiErrorCode::InternalError,
                       "cannot bind " + config.host + ":" + std::to_string(config.port));
    }
    return impl_->port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

int HttpServer::start() {
    const int port = bind();
    impl_->thread = std::thread([this] { listen(); });
    impl_->server.wait_until_ready();
    return port;
}

void HttpServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace plainlang::service
