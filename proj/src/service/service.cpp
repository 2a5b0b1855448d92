#include "plainlang/service/service.hpp"

#include <cstdlib>

#include "plainlang/core/strings.hpp"
#include "plainlang/ingest/ingest.hpp"
#include "plainlang/metrics/metrics.hpp"
#include "plainlang/text/analysis.hpp"
#include "plainlang/text/unicode.hpp"

namespace plainlang::service {

namespace {

using nlohmann::json;

struct CodeInfo {
    ApiErrorCode code;
    std::string_view label;
    int status;
};

constexpr CodeInfo kCodes[] = {
    {ApiErrorCode::InvalidRequest, "invalid_request", 400},
    {ApiErrorCode::EmptyText, "empty_text", 400},
    {ApiErrorCode::TooLong, "too_long", 400},
    {ApiErrorCode::UnknownAudience, "unknown_audience", 400},
    {ApiErrorCode::InvalidLevel, "invalid_level", 400},
    {ApiErrorCode::WordNotInContext, "word_not_in_context", 400},
    {ApiErrorCode::InvalidStars, "invalid_stars", 400},
    {ApiErrorCode::CommentTooLong, "comment_too_long", 400},
    {ApiErrorCode::UnsupportedFormat, "unsupported_format", 400},
    {ApiErrorCode::CorruptFile, "corrupt_file", 400},
    {ApiErrorCode::TooLarge, "too_large", 413},
    {ApiErrorCode::NoTextContent, "no_text_content", 422},
    {ApiErrorCode::EncryptedPdf, "encrypted_pdf", 422},
    {ApiErrorCode::UnknownJob, "unknown_job", 404},
    {ApiErrorCode::NotFound, "not_found", 404},
    {ApiErrorCode::MethodNotAllowed, "method_not_allowed", 405},
    {ApiErrorCode::UpstreamError, "upstream_error", 502},
    {ApiErrorCode::MalformedModelOutput, "malformed_model_output", 502},
    {ApiErrorCode::Timeout, "timeout", 504},
    {ApiErrorCode::StorageFailure, "storage_failure", 500},
    {ApiErrorCode::InternalError, "internal_error", 500},
};

const CodeInfo& info(ApiErrorCode code) { return kCodes[static_cast<std::size_t>(code)]; }

[[noreturn]] void fail(ApiErrorCode code, const std::string& message) { throw ApiError(code, message); }

const json& require_object(const json& request) {
    if (!request.is_object()) fail(ApiErrorCode::InvalidRequest, "request body must be a JSON object");
    return request;
}

// Missing and null read as empty, so they report the same as "".
std::string text_field(const json& request, const char* key) {
    const auto it = request.find(key);
    if (it == request.end() || it->is_null()) return {};
    if (!it->is_string()) fail(ApiErrorCode::InvalidRequest, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::optional<std::string> optional_text(const json& request, const char* key) {
    const auto it = request.find(key);
    if (it == request.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail(ApiErrorCode::InvalidRequest, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::string require_text(const json& request, const char* key, std::size_t max_chars) {
    std::string value = text_field(request, key);
    if (core::trim(value).empty()) fail(ApiErrorCode::EmptyText, std::string("'") + key + "' is empty");
    if (text::code_point_count(value) > max_chars) {
        fail(ApiErrorCode::TooLong, std::string("'") + key + "' exceeds " + std::to_string(max_chars) + " characters");
    }
    return value;
}

[[noreturn]] void rethrow_llm(const llm::LlmError& e) {
    switch (e.kind()) {
        case llm::LlmErrorKind::Timeout: fail(ApiErrorCode::Timeout, "the language model did not answer in time");
        case llm::LlmErrorKind::InvalidConfig: fail(ApiErrorCode::InternalError, "language model is misconfigured");
        case llm::LlmErrorKind::AuthFailed:
            fail(ApiErrorCode::UpstreamError, "the language model provider rejected the service credentials");
        case llm::LlmErrorKind::RateLimited:
            fail(ApiErrorCode::UpstreamError, "the language model provider is rate limiting requests");
        case llm::LlmErrorKind::UpstreamError:
        case llm::LlmErrorKind::MalformedResponse:
        case llm::LlmErrorKind::ScriptMiss: break;
    }
    fail(ApiErrorCode::UpstreamError, std::string("language model call failed (") +
                                          std::string(llm::error_label(e.kind())) + ")");
}

[[noreturn]] void rethrow_prompt(const prompting::PromptError& e) {
    switch (e.kind()) {
        case prompting::PromptErrorKind::EmptyText: fail(ApiErrorCode::EmptyText, e.what());
        case prompting::PromptErrorKind::WordNotInContext: fail(ApiErrorCode::WordNotInContext, e.what());
        case prompting::PromptErrorKind::InvalidLevel: fail(ApiErrorCode::InvalidLevel, e.what());
        case prompting::PromptErrorKind::MalformedOutput: fail(ApiErrorCode::MalformedModelOutput, e.what());
        case prompting::PromptErrorKind::TemplateError: break;
    }
    fail(ApiErrorCode::InternalError, "prompt template error");
}

ApiErrorCode ingest_code(ingest::IngestErrorKind kind) {
    switch (kind) {
        case ingest::IngestErrorKind::UnsupportedFormat: return ApiErrorCode::UnsupportedFormat;
        case ingest::IngestErrorKind::TooLarge: return ApiErrorCode::TooLarge;
        case ingest::IngestErrorKind::CorruptArchive:
        case ingest::IngestErrorKind::CorruptXml:
        case ingest::IngestErrorKind::CorruptPdf: return ApiErrorCode::CorruptFile;
        case ingest::IngestErrorKind::EncryptedPdf: return ApiErrorCode::EncryptedPdf;
        case ingest::IngestErrorKind::NoTextContent: return ApiErrorCode::NoTextContent;
    }
    return ApiErrorCode::InternalError;
}

ApiErrorCode feedback_code(feedback::FeedbackErrorKind kind) {
    switch (kind) {
        case feedback::FeedbackErrorKind::InvalidStars: return ApiErrorCode::InvalidStars;
        case feedback::FeedbackErrorKind::CommentTooLong: return ApiErrorCode::CommentTooLong;
        case feedback::FeedbackErrorKind::UnknownJob: return ApiErrorCode::UnknownJob;
        case feedback::FeedbackErrorKind::StorageFailure: return ApiErrorCode::StorageFailure;
    }
    return ApiErrorCode::InternalError;
}

std::size_t env_size(const char* name, std::size_t fallback) {
    const char* v = std::getenv(name);
    if (v == nullptr || core::trim(v).empty()) return fallback;
    try {
        std::size_t used = 0;
        const long long n = std::stoll(std::string(core::trim(v)), &used);
        if (used != core::trim(v).size() || n < 0) throw std::invalid_argument(name);
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        fail(ApiErrorCode::InternalError, std::string(name) + " is not a non-negative integer");
    }
}

}  // namespace

std::string_view code_label(ApiErrorCode code) noexcept { return info(code).label; }

int http_status(ApiErrorCode code) noexcept { return info(code).status; }

const std::vector<ApiErrorCode>& all_error_codes() {
    static const std::vector<ApiErrorCode> codes = [] {
        std::vector<ApiErrorCode> out;
        for (const auto& c : kCodes) out.push_back(c.code);
        return out;
    }();
    return codes;
}

json error_body(ApiErrorCode code, std::string_view message) {
    return json{{"code", code_label(code)}, {"message", message}, {"http_status", http_status(code)}};
}

ServiceConfig ServiceConfig::from_env() {
    ServiceConfig c;
    const std::size_t port = env_size("PORT", static_cast<std::size_t>(c.port));
    if (port > 65535) fail(ApiErrorCode::InternalError, "PORT out of range");
    c.port = static_cast<int>(port);
    c.max_upload_bytes = env_size("MAX_UPLOAD_BYTES", c.max_upload_bytes);
    if (const char* origin = std::getenv("UI_ORIGIN"); origin && !core::trim(origin).empty()) {
        c.ui_origin = std::string(core::trim(origin));
    }
    if (const char* host = std::getenv("BIND_HOST"); host && !core::trim(host).empty()) {
        c.host = std::string(core::trim(host));
    }
    return c;
}

Service::Service(ServiceConfig config, std::shared_ptr<llm::Gateway> gateway,
                 std::shared_ptr<feedback::FeedbackStore> store, prompting::PromptLibrary prompts)
    : config_(std::move(config)), gateway_(std::move(gateway)), store_(std::move(store)), prompts_(std::move(prompts)) {
    if (!gateway_ || !store_) throw ApiError(ApiErrorCode::InternalError, "service needs a gateway and a store");
}

std::string Service::complete(const prompting::PromptBundle& bundle, const core::ModelConfig& model) {
    try {
        return gateway_->complete(llm::CompletionRequest{bundle, model}).text;
    } catch (const llm::LlmError& e) {
        rethrow_llm(e);
    }
}

// One reprompt when the answer does not parse.
template <typename Parse>
auto Service::complete_parsed(const prompting::PromptBundle& bundle, Parse parse) {
    for (int attempt = 0;; ++attempt) {
        const std::string answer = complete(bundle, gateway_->model());
        try {
            return parse(answer);
        } catch (const prompting::PromptError& e) {
            if (e.kind() != prompting::PromptErrorKind::MalformedOutput || attempt == 1) rethrow_prompt(e);
        }
    }
}

json Service::simplify(const json& request) {
    require_object(request);
    std::string text = require_text(request, "text", config_.max_text_chars);

    core::Audience audience = core::kDefaultAudience;
    if (const auto label = optional_text(request, "audience")) {
        try {
            audience = core::audience_from_label(*label);
        } catch (const core::CoreError& e) {
            fail(ApiErrorCode::UnknownAudience, e.what());
        }
    }
    core::ModelConfig model = gateway_->model();
    if (const auto name = optional_text(request, "model")) {
        const std::string trimmed(core::trim(*name));
        if (trimmed.empty() || trimmed.size() > 128) fail(ApiErrorCode::InvalidRequest, "'model' must be 1-128 characters");
        model.model_name = trimmed;
    }

    core::SimplificationJob job;
    try {
        job = core::SimplificationJob::create(std::move(text), audience, model.model_name);
    } catch (const core::CoreError& e) {
        fail(ApiErrorCode::EmptyText, e.what());
    }

    prompting::PromptBundle bundle;
    try {
        bundle = prompts_.build_simplify_prompt(job.source_text, audience);
    } catch (const prompting::PromptError& e) {
        rethrow_prompt(e);
    }

    const auto started = std::chrono::steady_clock::now();
    const std::string simplified(core::trim(complete(bundle, model)));
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);

    core::SimplificationResult result;
    result.job_id = job.id;
    result.simplified_text = simplified;
    result.latency = latency;
    try {
        result.readability = metrics::readability(simplified);
    } catch (const metrics::MetricError&) {
        fail(ApiErrorCode::MalformedModelOutput, "the language model returned no words");
    }

    try {
        store_->register_job(feedback::JobRecord::of(job));
    } catch (const feedback::FeedbackError& e) {
        fail(feedback_code(e.kind()), e.what());
    }

    return json{{"job_id", result.job_id},
                {"simplified_text", result.simplified_text},
                {"audience", audience},
                {"model", model.model_name},
                {"readability", result.readability},
                {"latency_ms", result.latency.count()}};
}

json Service::upload(std::string_view filename, std::string_view bytes) {
    try {
        const auto doc = ingest::extract_text(bytes, filename, config_.max_upload_bytes);
        return json{{"text", doc.text},
                    {"format", ingest::to_string(doc.format)},
                    {"warnings", doc.warnings},
                    {"page_or_paragraph_count", doc.page_or_paragraph_count}};
    } catch (const ingest::IngestError& e) {
        fail(ingest_code(e.kind()), e.what());
    }
}

json Service::rephrase(const json& request) {
    require_object(request);
    const std::string sentence = require_text(request, "sentence", config_.max_text_chars);
    const auto it = request.find("level");
    if (it == request.end() || !it->is_number_integer()) fail(ApiErrorCode::InvalidLevel, "'level' must be 1, 2 or 3");
    const auto raw = it->get<std::int64_t>();
    if (raw < 1 || raw > 3) fail(ApiErrorCode::InvalidLevel, "'level' must be 1, 2 or 3");
    const prompting::ComplexityLevel level(static_cast<int>(raw));

    prompting::PromptBundle bundle;
    try {
        bundle = prompts_.build_rephrase_prompt(sentence, level);
    } catch (const prompting::PromptError& e) {
        rethrow_prompt(e);
    }
    const std::string variant = complete_parsed(bundle, [](const std::string& a) { return prompting::clean_rephrase(a); });
    return json{{"variant", variant}, {"level", level.value()}};
}

json Service::synonyms(const json& request) {
    require_object(request);
    const std::string word = require_text(request, "word", 100);
    const std::string sentence = require_text(request, "sentence", config_.max_text_chars);
    prompting::PromptBundle bundle;
    try {
        bundle = prompts_.build_synonym_prompt(word, sentence);
    } catch (const prompting::PromptError& e) {
        rethrow_prompt(e);
    }
    const auto list = complete_parsed(bundle, [](const std::string& a) { return prompting::parse_synonyms(a); });
    return json{{"synonyms", list}};
}

json Service::definition(const json& request) {
    require_object(request);
    const std::string word = require_text(request, "word", 100);
    const std::string sentence = require_text(request, "sentence", config_.max_text_chars);
    prompting::PromptBundle bundle;
    try {
        bundle = prompts_.build_definition_prompt(word, sentence);
    } catch (const prompting::PromptError& e) {
        rethrow_prompt(e);
    }
    const std::string def = complete_parsed(bundle, [](const std::string& a) { return prompting::parse_definition(a); });
    return json{{"definition", def}};
}

json Service::sentences(const json& request) {
    require_object(request);
    const std::string text = require_text(request, "text", config_.max_text_chars);
    return json{{"sentences", text::split_sentences(text)}};
}

void Service::feedback(const json& request) {
    require_object(request);
    const std::string id = text_field(request, "job_id");
    if (!core::JobId::is_valid(id)) fail(ApiErrorCode::UnknownJob, "no job with id '" + id.substr(0, 64) + "'");
    const auto job = store_->job(core::JobId::parse(id));
    if (!job) fail(ApiErrorCode::UnknownJob, "no job with id '" + id + "'");

    const auto stars = request.find("stars");
    if (stars == request.end() || !stars->is_number_integer()) {
        fail(ApiErrorCode::InvalidStars, "'stars' must be an integer from 1 to 5");
    }
    const auto raw = stars->get<std::int64_t>();

    feedback::Rating rating;
    rating.job_id = job->job_id;
    rating.stars = (raw < 0 || raw > 5) ? 0 : static_cast<int>(raw);
    rating.comment = optional_text(request, "comment");
    rating.created_at = core::now_ms();
    rating.audience = job->audience;
    rating.model_name = job->model_name;
    try {
        store_->record_rating(rating);
    } catch (const feedback::FeedbackError& e) {
        fail(feedback_code(e.kind()), e.what());
    }
}

json Service::feedback_summary(std::optional<std::string_view> audience) {
    std::optional<core::Audience> filter;
    if (audience && !core::trim(*audience).empty()) {
        try {
            filter = core::audience_from_label(*audience);
        } catch (const core::CoreError& e) {
            fail(ApiErrorCode::UnknownAudience, e.what());
        }
    }
    return json(store_->aggregate(filter));
}

json Service::health() const { return json{{"status", "ok"}, {"model", gateway_->model().model_name}}; }

}  // namespace plainlang::service
