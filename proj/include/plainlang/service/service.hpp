#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plainlang/core/error.hpp"
#include "plainlang/feedback/store.hpp"
#include "plainlang/llm/gateway.hpp"
#include "plainlang/prompting/prompts.hpp"

namespace plainlang::service {

/// The closed set of machine-readable error codes the API returns.
enum class ApiErrorCode {
    InvalidRequest,
    EmptyText,
    TooLong,
    UnknownAudience,
    InvalidLevel,
    WordNotInContext,
    InvalidStars,
    CommentTooLong,
    UnsupportedFormat,
    CorruptFile,
    TooLarge,
    NoTextContent,
    EncryptedPdf,
    UnknownJob,
    NotFound,
    MethodNotAllowed,
    UpstreamError,
    MalformedModelOutput,
    Timeout,
    StorageFailure,
    InternalError,
};

/// Thrown by Service operations; rendered as {code, message, http_status}.
using ApiError = CodedError<ApiErrorCode>;

std::string_view code_label(ApiErrorCode code) noexcept;
int http_status(ApiErrorCode code) noexcept;
/// Every code, in declaration order.
const std::vector<ApiErrorCode>& all_error_codes();

nlohmann::json error_body(ApiErrorCode code, std::string_view message);

struct ServiceConfig {
    std::string host = "0.0.0.0";
    int port = 8080;
    /// Allowed browser origin for CORS; no CORS headers when unset.
    std::optional<std::string> ui_origin;
    std::size_t max_upload_bytes = 10 * 1024 * 1024;
    /// In Unicode code points.
    std::size_t max_text_chars = 50'000;
    bool log_requests = true;

    /// PORT, UI_ORIGIN, MAX_UPLOAD_BYTES, BIND_HOST. Throws ApiError{InternalError}
    /// on unparsable values.
    static ServiceConfig from_env();
};

/// Transport-independent request handling. Inputs and outputs are the JSON
/// bodies of the HTTP API; failures throw ApiError. Safe to call from many
/// threads at once.
class Service {
public:
    Service(ServiceConfig config, std::shared_ptr<llm::Gateway> gateway, std::shared_ptr<feedback::FeedbackStore> store,
            prompting::PromptLibrary prompts = prompting::PromptLibrary::embedded());

    /// {text, audience?, model?} -> {job_id, simplified_text, audience, model,
    /// readability: {fre, fk_grade}, latency_ms}
    nlohmann::json simplify(const nlohmann::json& request);

    /// Extracted text for the client to review -> {text, format, warnings,
    /// page_or_paragraph_count}
    nlohmann::json upload(std::string_view filename, std::string_view bytes);

    /// {sentence, level} -> {variant, level}
    nlohmann::json rephrase(const nlohmann::json& request);
    /// {word, sentence} -> {synonyms: [...]}
    nlohmann::json synonyms(const nlohmann::json& request);
    /// {word, sentence} -> {definition}
    nlohmann::json definition(const nlohmann::json& request);
    /// {text} -> {sentences: [...]}, for picking sentences in Expert Mode.
    nlohmann::json sentences(const nlohmann::json& request);

    /// {job_id, stars, comment?}; returns once the rating is stored.
    void feedback(const nlohmann::json& request);
    /// Optional canonical audience label filter.
    nlohmann::json feedback_summary(std::optional<std::string_view> audience);

    /// {status: "ok", model}
    nlohmann::json health() const;

    const ServiceConfig& config() const noexcept { return config_; }

private:
    ServiceConfig config_;
    std::shared_ptr<llm::Gateway> gateway_;
    std::shared_ptr<feedback::FeedbackStore> store_;
    prompting::PromptLibrary prompts_;

    std::string complete(const prompting::PromptBundle& bundle, const core::ModelConfig& model);
    template <typename Parse>
    auto complete_parsed(const prompting::PromptBundle& bundle, Parse parse);
};

}  // namespace plainlang::service
