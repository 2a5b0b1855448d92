#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "plainlang/llm/gateway.hpp"

namespace plainlang::llm {

namespace {

using Clock = std::chrono::steady_clock;

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint chat_endpoint(const std::string& api_base) {
    const auto scheme_end = api_base.find("://");
    if (scheme_end == std::string::npos) throw LlmError(LlmErrorKind::InvalidConfig, "api_base has no scheme");
    const auto path_start = api_base.find('/', scheme_end + 3);
    Endpoint ep;
    ep.origin = api_base.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : api_base.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    ep.path = prefix + "/chat/completions";
    return ep;
}

std::int64_t usage_field(const nlohmann::json& usage, const char* name) {
    if (!usage.is_object()) return 0;
    const auto it = usage.find(name);
    return it != usage.end() && it->is_number_integer() ? it->get<std::int64_t>() : 0;
}

}  // namespace

std::string_view error_label(LlmErrorKind kind) noexcept {
    switch (kind) {
        case LlmErrorKind::AuthFailed: return "auth_failed";
        case LlmErrorKind::RateLimited: return "rate_limited";
        case LlmErrorKind::UpstreamError: return "upstream_error";
        case LlmErrorKind::Timeout: return "timeout";
        case LlmErrorKind::MalformedResponse: return "malformed_response";
        case LlmErrorKind::ScriptMiss: return "script_miss";
        case LlmErrorKind::InvalidConfig: return "invalid_config";
    }
    return "unknown";
}

nlohmann::json chat_request_body(const CompletionRequest& request) {
    return {
        {"model", request.model.model_name},
        {"messages",
         nlohmann::json::array({
             {{"role", "system"}, {"content", request.bundle.system_message}},
             {{"role", "user"}, {"content", request.bundle.user_message}},
         })},
        {"temperature", request.bundle.temperature},
        {"max_tokens", request.bundle.max_output_tokens},
    };
}

CompletionResponse parse_chat_response(std::string_view body) {
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw LlmError(LlmErrorKind::MalformedResponse, "response is not a JSON object");
    }
    const auto choices = doc.find("choices");
    if (choices == doc.end() || !choices->is_array() || choices->empty()) {
        throw LlmError(LlmErrorKind::MalformedResponse, "response has no choices");
    }
    const auto& first = (*choices)[0];
    if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) {
        throw LlmError(LlmErrorKind::MalformedResponse, "first choice has no message");
    }
    const auto& message = first["message"];
    CompletionResponse out;
    const auto content = message.find("content");
    if (content == message.end()) throw LlmError(LlmErrorKind::MalformedResponse, "message has no content");
    if (content->is_string()) {
        out.text = content->get<std::string>();
    } else if (!content->is_null()) {
        throw LlmError(LlmErrorKind::MalformedResponse, "message content is not a string");
    }
    if (const auto usage = doc.find("usage"); usage != doc.end()) {
        out.prompt_tokens = usage_field(*usage, "prompt_tokens");
        out.completion_tokens = usage_field(*usage, "completion_tokens");
    }
    return out;
}

std::chrono::milliseconds RetryPolicy::ceiling(int retry) const {
    const double ms = static_cast<double>(initial_backoff.count()) * std::pow(factor, retry);
    const double capped = std::min(ms, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

OpenAiBackend::OpenAiBackend(RetryPolicy policy) : policy_(std::move(policy)) {
    rng_.seed(policy_.seed != 0 ? policy_.seed : std::random_device{}());
    if (!policy_.sleep) {
        policy_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

std::chrono::milliseconds OpenAiBackend::backoff(int retry) {
    const auto top = policy_.ceiling(retry).count();
    std::lock_guard lock(rng_mutex_);
    return std::chrono::milliseconds(std::uniform_int_distribution<std::int64_t>(0, top)(rng_));
}

CompletionResponse OpenAiBackend::complete(const CompletionRequest& request) {
    request.model.validate();
    const Endpoint ep = chat_endpoint(request.model.api_base);
    const std::string body = chat_request_body(request).dump();
    httplib::Headers headers;
    if (!request.model.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + request.model.api_key);
    }

    const auto timeout = request.model.timeout;
    const auto started = Clock::now();
    LlmErrorKind last_kind = LlmErrorKind::UpstreamError;
    std::string last_message;

    for (int attempt = 0; attempt <= request.model.max_retries; ++attempt) {
        if (attempt > 0) policy_.sleep(backoff(attempt - 1));

        httplib::Client client(ep.origin);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        const auto attempt_start = Clock::now();
        const auto res = client.Post(ep.path, headers, body, "application/json");

        if (!res) {
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   (err == httplib::Error::Read && Clock::now() - attempt_start >= timeout * 9 / 10);
            last_kind = timed_out ? LlmErrorKind::Timeout : LlmErrorKind::UpstreamError;
            last_message = timed_out ? "upstream timed out" : "transport error: " + httplib::to_string(err);
            continue;
        }

        const int status = res->status;
        if (status >= 200 && status < 300) {
            CompletionResponse out = parse_chat_response(res->body);
            out.attempts = attempt + 1;
            out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
            return out;
        }
        if (status == 401 || status == 403) {
            throw LlmError(LlmErrorKind::AuthFailed, "upstream rejected credentials (HTTP " + std::to_string(status) + ")");
        }
        if (status == 429) {
            last_kind = LlmErrorKind::RateLimited;
            last_message = "upstream rate limit (HTTP 429)";
            continue;
        }
        if (status >= 500) {
            last_kind = LlmErrorKind::UpstreamError;
            last_message = "upstream failure (HTTP " + std::to_string(status) + ")";
            continue;
        }
        throw LlmError(LlmErrorKind::UpstreamError, "upstream refused request (HTTP " + std::to_string(status) + ")");
    }
    throw LlmError(last_kind,
                   last_message + " after " + std::to_string(request.model.max_retries + 1) + " attempts");
}

}  // namespace plainlang::llm
