#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plainlang/core/error.hpp"
#include "plainlang/core/types.hpp"
#include "plainlang/prompting/prompts.hpp"

namespace plainlang::llm {

enum class LlmErrorKind { AuthFailed, RateLimited, UpstreamError, Timeout, MalformedResponse, ScriptMiss, InvalidConfig };
using LlmError = CodedError<LlmErrorKind>;

std::string_view error_label(LlmErrorKind kind) noexcept;

struct CompletionRequest {
    prompting::PromptBundle bundle;
    core::ModelConfig model;
};

struct CompletionResponse {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::chrono::milliseconds latency{0};
    /// Upstream attempts made, including the successful one.
    int attempts = 1;
};

/// The OpenAI chat-completions request body for a request.
nlohmann::json chat_request_body(const CompletionRequest& request);

/// Parses a chat-completions response body. Throws LlmError{MalformedResponse}.
CompletionResponse parse_chat_response(std::string_view body);

class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct RetryPolicy {
    std::chrono::milliseconds initial_backoff{1000};
    double factor = 2.0;
    std::chrono::milliseconds max_backoff{30'000};
    /// Replaced in tests to observe or skip the waits.
    std::function<void(std::chrono::milliseconds)> sleep;
    std::uint64_t seed = 0;

    /// Upper bound of the jitter window before retry number `retry` (0-based).
    std::chrono::milliseconds ceiling(int retry) const;
};

/// Talks to `{api_base}/chat/completions` over HTTP(S).
///
/// Transient failures (429, 5xx, timeouts, connection errors) are retried up
/// to `model.max_retries` times with full-jitter exponential backoff. 401 and
/// 403 fail at once with AuthFailed.
class OpenAiBackend final : public Backend {
public:
    explicit OpenAiBackend(RetryPolicy policy = {});

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return "openai"; }

private:
    RetryPolicy policy_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;

    std::chrono::milliseconds backoff(int retry);
};

enum class MockMode { EchoSource, TitleCase, Scripted };

/// Throws LlmError{InvalidConfig} for anything but echo_source, title_case or scripted.
MockMode mock_mode_from_string(std::string_view label);
std::string_view to_string(MockMode mode) noexcept;

/// Hex SHA-256 of a user message; the lookup key of scripted transcripts.
std::string transcript_key(std::string_view user_message);

/// Recorded answers for scripted mocks, one JSON object per line:
/// `{"key": ..., "response": ...}` or `{"key": ..., "responses": [...]}`.
/// `user_message` may stand in for `key`. A key with several responses
/// replays them in order and then keeps returning the last one.
class Transcript {
public:
    Transcript() = default;
    /// Throws LlmError{InvalidConfig} on unreadable files or malformed lines.
    static std::shared_ptr<Transcript> load(const std::filesystem::path& path);

    void add(std::string key, std::vector<std::string> responses);
    /// Throws LlmError{ScriptMiss}.
    std::string next(const std::string& key);
    bool empty() const;

private:
    struct Entry {
        std::vector<std::string> responses;
        std::size_t cursor = 0;
    };
    mutable std::mutex mutex_;
    std::map<std::string, Entry> entries_;
};

/// Deterministic offline backend.
class MockBackend final : public Backend {
public:
    explicit MockBackend(MockMode mode, std::shared_ptr<Transcript> transcript = nullptr);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override;

private:
    MockMode mode_;
    std::shared_ptr<Transcript> transcript_;
};

/// Capitalizes the first letter of every whitespace-separated word.
std::string title_case(std::string_view text);

/// Wraps a backend and appends every exchange to a transcript file that a
/// scripted mock can replay.
class RecordingBackend final : public Backend {
public:
    RecordingBackend(std::unique_ptr<Backend> inner, std::filesystem::path path);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string name() const override { return inner_->name(); }

private:
    std::unique_ptr<Backend> inner_;
    std::filesystem::path path_;
    std::mutex mutex_;
};

/// Shared entry point: bounds the number of concurrent upstream calls.
class Gateway {
public:
    static constexpr int kDefaultMaxInFlight = 4;

    Gateway(std::unique_ptr<Backend> backend, core::ModelConfig model, int max_in_flight = kDefaultMaxInFlight);

    /// MOCK_MODE other than "off" selects a mock (MOCK_TRANSCRIPT names the scripted file);
    /// otherwise the OpenAI backend with ModelConfig::from_env().
    /// LLM_MAX_IN_FLIGHT overrides the cap, LLM_RECORD_TRANSCRIPT records.
    static std::unique_ptr<Gateway> from_env();

    /// Uses the gateway's model config.
    CompletionResponse complete(const prompting::PromptBundle& bundle);
    CompletionResponse complete(const CompletionRequest& request);

    const core::ModelConfig& model() const noexcept { return model_; }
    std::string backend_name() const { return backend_->name(); }
    int max_in_flight() const noexcept { return max_in_flight_; }
    int peak_in_flight() const;

private:
    std::unique_ptr<Backend> backend_;
    core::ModelConfig model_;
    int max_in_flight_;

    mutable std::mutex mutex_;
    std::condition_variable slot_free_;
    int in_flight_ = 0;
    int peak_ = 0;
};

}  // namespace plainlang::llm
