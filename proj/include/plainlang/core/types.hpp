#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "plainlang/core/error.hpp"

namespace plainlang::core {

enum class CoreErrorKind { UnknownAudience, InvalidConfig, InvalidValue, MalformedJson };
using CoreError = CodedError<CoreErrorKind>;

/// Target reader group a simplification is written for.
enum class Audience {
    ScientistsResearchers,
    StudentsAcademics,
    IndustryProfessionals,
    JournalistsMedia,
    GeneralPublic,
};

inline constexpr Audience kDefaultAudience = Audience::GeneralPublic;

inline constexpr std::array<Audience, 5> kAllAudiences = {
    Audience::ScientistsResearchers, Audience::StudentsAcademics,
    Audience::IndustryProfessionals, Audience::JournalistsMedia,
    Audience::GeneralPublic,
};

/// Stable wire label, e.g. "general_public".
std::string_view canonical_label(Audience audience) noexcept;

/// Human-readable group name as shown in reports and the UI.
std::string_view display_name(Audience audience) noexcept;

/// Case-insensitive lookup accepting canonical labels, the short forms
/// ("scientists", "students", "industry", "journalists", "general") and the
/// display names. Throws CoreError{UnknownAudience}.
Audience audience_from_label(std::string_view label);

using Clock = std::chrono::system_clock;
using Timestamp = std::chrono::time_point<Clock, std::chrono::milliseconds>;

/// Current time truncated to milliseconds (the wire precision).
Timestamp now_ms();

/// RFC 3339 UTC, millisecond precision: "2026-10-15T22:54:00.123Z".
std::string format_timestamp(Timestamp ts);
Timestamp parse_timestamp(std::string_view text);

/// 128-bit random identifier rendered as 32 lowercase hex digits.
class JobId {
public:
    JobId() = default;

    static JobId generate();
    /// Throws CoreError{InvalidValue} unless `hex` is 32 lowercase hex digits.
    static JobId parse(std::string_view hex);
    static bool is_valid(std::string_view hex) noexcept;

    const std::string& str() const noexcept { return hex_; }
    bool empty() const noexcept { return hex_.empty(); }

    friend bool operator==(const JobId&, const JobId&) = default;
    friend auto operator<=>(const JobId&, const JobId&) = default;

private:
    explicit JobId(std::string hex) : hex_(std::move(hex)) {}
    std::string hex_;
};

struct ModelConfig {
    std::string model_name = "gpt-4o";
    std::string api_base = "https://api.openai.com/v1";
    std::string api_key;
    std::chrono::milliseconds timeout{60'000};
    int max_retries = 3;

    /// Throws CoreError{InvalidConfig}.
    void validate() const;

    /// Defaults overridden by LLM_API_BASE, LLM_API_KEY, LLM_MODEL,
    /// LLM_TIMEOUT_MS and LLM_MAX_RETRIES when set.
    static ModelConfig from_env();
};

struct SimplificationJob {
    JobId id;
    std::string source_text;
    Audience audience = kDefaultAudience;
    std::string model_name;
    Timestamp created_at{};

    /// Throws CoreError{InvalidValue} when source_text is blank.
    static SimplificationJob create(std::string source_text, Audience audience,
                                    std::string model_name);

    friend bool operator==(const SimplificationJob&, const SimplificationJob&) = default;
};

struct Readability {
    double fre = 0.0;
    double fk_grade = 0.0;

    friend bool operator==(const Readability&, const Readability&) = default;
};

struct SimplificationResult {
    JobId job_id;
    std::string simplified_text;
    Readability readability;
    std::chrono::milliseconds latency{0};

    friend bool operator==(const SimplificationResult&, const SimplificationResult&) = default;
};

struct CorpusPair {
    std::string original;
    std::string reference;

    friend bool operator==(const CorpusPair&, const CorpusPair&) = default;
};

struct MetricReport {
    Audience audience = kDefaultAudience;
    std::string model_name;
    std::size_t n_pairs = 0;
    double bleu = 0.0;
    double sari = 0.0;
    double fk_ease = 0.0;
    double fk_grade = 0.0;

    /// Throws CoreError{InvalidValue} when a range invariant is violated.
    void validate() const;

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

// JSON (snake_case). Deserializers throw CoreError on missing or ill-typed
// fields.
void to_json(nlohmann::json& j, Audience a);
void from_json(const nlohmann::json& j, Audience& a);
void to_json(nlohmann::json& j, const JobId& id);
void from_json(const nlohmann::json& j, JobId& id);
void to_json(nlohmann::json& j, const SimplificationJob& job);
void from_json(const nlohmann::json& j, SimplificationJob& job);
void to_json(nlohmann::json& j, const Readability& r);
void from_json(const nlohmann::json& j, Readability& r);
void to_json(nlohmann::json& j, const SimplificationResult& r);
void from_json(const nlohmann::json& j, SimplificationResult& r);
void to_json(nlohmann::json& j, const CorpusPair& p);
void from_json(const nlohmann::json& j, CorpusPair& p);
void to_json(nlohmann::json& j, const MetricReport& r);
void from_json(const nlohmann::json& j, MetricReport& r);

}  // namespace plainlang::core
