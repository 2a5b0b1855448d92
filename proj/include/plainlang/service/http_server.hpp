#pragma once

#include <memory>
#include <thread>

#include "plainlang/service/service.hpp"

namespace plainlang::service {

/// HTTP front end for a Service.
///
/// Routes:
///   POST /api/simplify            POST /api/upload (multipart "file")
///   POST /api/expert/rephrase     POST /api/expert/synonyms
///   POST /api/expert/definition   POST /api/sentences
///   GET  /api/split?text=         POST /api/split (same as /api/sentences)
///   POST /api/feedback            GET  /api/feedback/summary[?audience=]
///   GET  /api/health
class HttpServer {
public:
    explicit HttpServer(std::shared_ptr<Service> service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to the configured host and port (port 0 picks a free one) and
    /// returns the bound port. Throws ApiError{InternalError}.
    int bind();
    /// Serves until stop(); call after bind().
    void listen();
    /// bind() + listen() on a background thread; returns the port.
    int start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace plainlang::service
