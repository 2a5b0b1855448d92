#include "plainlang/core/types.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "plainlang/core/strings.hpp"

namespace plainlang::core {

namespace {

struct AudienceNames {
    Audience audience;
    std::string_view canonical;
    std::string_view short_form;
    std::string_view display;
    std::string_view alt_display;
};

constexpr std::array<AudienceNames, 5> kNames = {{
    {Audience::ScientistsResearchers, "scientists_researchers", "scientists",
     "Scientists and Researchers", "Scientists"},
    {Audience::StudentsAcademics, "students_academics", "students", "Students and Academics",
     "Students"},
    {Audience::IndustryProfessionals, "industry_professionals", "industry",
     "Industry Professionals", "Industry"},
    {Audience::JournalistsMedia, "journalists_media", "journalists",
     "Journalists and Media Professionals", "Journalists and Media"},
    {Audience::GeneralPublic, "general_public", "general", "General Public/Non-Experts",
     "General Public"},
}};

const AudienceNames& names_of(Audience a) {
    return kNames[static_cast<std::size_t>(a)];
}

template <typename T>
T require(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw CoreError(CoreErrorKind::MalformedJson, std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw CoreError(CoreErrorKind::MalformedJson,
                        std::string("field '") + key + "': " + e.what());
    }
}

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

}  // namespace

std::string_view canonical_label(Audience audience) noexcept {
    return names_of(audience).canonical;
}

std::string_view display_name(Audience audience) noexcept {
    return names_of(audience).display;
}

Audience audience_from_label(std::string_view label) {
    const std::string needle = ascii_lower(trim(label));
    for (const auto& n : kNames) {
        for (std::string_view candidate : {n.canonical, n.short_form, n.display, n.alt_display}) {
            if (needle == ascii_lower(candidate)) {
                return n.audience;
            }
        }
    }
    throw CoreError(CoreErrorKind::UnknownAudience,
                    "unknown audience '" + std::string(label) + "'");
}

Timestamp now_ms() {
    return std::chrono::floor<std::chrono::milliseconds>(Clock::now());
}

std::string format_timestamp(Timestamp ts) {
    const std::int64_t total_ms = ts.time_since_epoch().count();
    std::int64_t days = total_ms / 86'400'000;
    std::int64_t ms_of_day = total_ms % 86'400'000;
    if (ms_of_day < 0) {
        ms_of_day += 86'400'000;
        --days;
    }
    std::int64_t y = 0;
    unsigned m = 0;
    unsigned d = 0;
    civil_from_days(days, y, m, d);
    const auto hh = static_cast<int>(ms_of_day / 3'600'000);
    const auto mm = static_cast<int>(ms_of_day / 60'000 % 60);
    const auto ss = static_cast<int>(ms_of_day / 1000 % 60);
    const auto ms = static_cast<int>(ms_of_day % 1000);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02d.%03dZ",
                  static_cast<long long>(y), m, d, hh, mm, ss, ms);
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    int y = 0;
    unsigned mo = 0;
    unsigned d = 0;
    int hh = 0;
    int mm = 0;
    int ss = 0;
    int ms = 0;
    int consumed = 0;
    const std::string s(text);
    if (std::sscanf(s.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d.%3dZ%n", &y, &mo, &d, &hh, &mm, &ss, &ms,
                    &consumed) != 7 ||
        static_cast<std::size_t>(consumed) != s.size() || s.size() != 24 || mo < 1 || mo > 12 ||
        d < 1 || d > 31 || hh > 23 || mm > 59 || ss > 60) {
        throw CoreError(CoreErrorKind::InvalidValue, "malformed timestamp '" + s + "'");
    }
    const std::int64_t days = days_from_civil(y, mo, d);
    const std::int64_t total =
        ((days * 24 + hh) * 60 + mm) * 60'000 + static_cast<std::int64_t>(ss) * 1000 + ms;
    return Timestamp{std::chrono::milliseconds{total}};
}

JobId JobId::generate() {
    thread_local std::mt19937_64 engine{[] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
        return std::mt19937_64{seq};
    }()};
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex(32, '0');
    for (int half = 0; half < 2; ++half) {
        std::uint64_t bits = engine();
        for (int i = 0; i < 16; ++i) {
            hex[static_cast<std::size_t>(half * 16 + i)] = kHex[bits & 0xF];
            bits >>= 4;
        }
    }
    return JobId{std::move(hex)};
}

bool JobId::is_valid(std::string_view hex) noexcept {
    return hex.size() == 32 && std::all_of(hex.begin(), hex.end(), [](char c) {
               return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
           });
}

JobId JobId::parse(std::string_view hex) {
    if (!is_valid(hex)) {
        throw CoreError(CoreErrorKind::InvalidValue, "malformed job id '" + std::string(hex) + "'");
    }
    return JobId{std::string(hex)};
}

void ModelConfig::validate() const {
    if (model_name.empty()) {
        throw CoreError(CoreErrorKind::InvalidConfig, "model_name must not be empty");
    }
    if (timeout.count() <= 0) {
        throw CoreError(CoreErrorKind::InvalidConfig, "timeout must be positive");
    }
    if (max_retries < 0 || max_retries > 16) {
        throw CoreError(CoreErrorKind::InvalidConfig, "max_retries must be in [0, 16]");
    }
}

ModelConfig ModelConfig::from_env() {
    ModelConfig cfg;
    auto env = [](const char* name) -> const char* {
        const char* v = std::getenv(name);
        return (v != nullptr && *v != '\0') ? v : nullptr;
    };
    if (const char* v = env("LLM_API_BASE")) cfg.api_base = v;
    if (const char* v = env("LLM_API_KEY")) cfg.api_key = v;
    if (const char* v = env("LLM_MODEL")) cfg.model_name = v;
    try {
        if (const char* v = env("LLM_TIMEOUT_MS")) cfg.timeout = std::chrono::milliseconds{std::stoll(v)};
        if (const char* v = env("LLM_MAX_RETRIES")) cfg.max_retries = std::stoi(v);
    } catch (const std::exception&) {
        throw CoreError(CoreErrorKind::InvalidConfig, "LLM_TIMEOUT_MS/LLM_MAX_RETRIES must be integers");
    }
    cfg.validate();
    return cfg;
}

SimplificationJob SimplificationJob::create(std::string source_text, Audience audience,
                                            std::string model_name) {
    if (trim(source_text).empty()) {
        throw CoreError(CoreErrorKind::InvalidValue, "source text is empty");
    }
    return SimplificationJob{JobId::generate(), std::move(source_text), audience,
                             std::move(model_name), now_ms()};
}

void MetricReport::validate() const {
    if (n_pairs < 1) throw CoreError(CoreErrorKind::InvalidValue, "n_pairs must be >= 1");
    if (!(bleu >= 0.0 && bleu <= 1.0)) throw CoreError(CoreErrorKind::InvalidValue, "bleu outside [0,1]");
    if (!(sari >= 0.0 && sari <= 100.0)) throw CoreError(CoreErrorKind::InvalidValue, "sari outside [0,100]");
}

void to_json(nlohmann::json& j, Audience a) { j = std::string(canonical_label(a)); }

void from_json(const nlohmann::json& j, Audience& a) {
    if (!j.is_string()) throw CoreError(CoreErrorKind::MalformedJson, "audience must be a string");
    a = audience_from_label(j.get<std::string>());
}

void to_json(nlohmann::json& j, const JobId& id) { j = id.str(); }

void from_json(const nlohmann::json& j, JobId& id) {
    if (!j.is_string()) throw CoreError(CoreErrorKind::MalformedJson, "job id must be a string");
    id = JobId::parse(j.get<std::string>());
}

void to_json(nlohmann::json& j, const SimplificationJob& job) {
    j = nlohmann::json{{"id", job.id},
                       {"source_text", job.source_text},
                       {"audience", job.audience},
                       {"model_name", job.model_name},
                       {"created_at", format_timestamp(job.created_at)}};
}

void from_json(const nlohmann::json& j, SimplificationJob& job) {
    job.id = require<JobId>(j, "id");
    job.source_text = require<std::string>(j, "source_text");
    job.audience = require<Audience>(j, "audience");
    job.model_name = require<std::string>(j, "model_name");
    job.created_at = parse_timestamp(require<std::string>(j, "created_at"));
}

void to_json(nlohmann::json& j, const Readability& r) {
    j = nlohmann::json{{"fre", r.fre}, {"fk_grade", r.fk_grade}};
}

void from_json(const nlohmann::json& j, Readability& r) {
    r.fre = require<double>(j, "fre");
    r.fk_grade = require<double>(j, "fk_grade");
}

void to_json(nlohmann::json& j, const SimplificationResult& r) {
    j = nlohmann::json{{"job_id", r.job_id},
                       {"simplified_text", r.simplified_text},
                       {"readability", r.readability},
                       {"latency_ms", r.latency.count()}};
}

void from_json(const nlohmann::json& j, SimplificationResult& r) {
    r.job_id = require<JobId>(j, "job_id");
    r.simplified_text = require<std::string>(j, "simplified_text");
    r.readability = require<Readability>(j, "readability");
    r.latency = std::chrono::milliseconds{require<std::int64_t>(j, "latency_ms")};
}

void to_json(nlohmann::json& j, const CorpusPair& p) {
    j = nlohmann::json{{"original", p.original}, {"reference", p.reference}};
}

void from_json(const nlohmann::json& j, CorpusPair& p) {
    p.original = require<std::string>(j, "original");
    p.reference = require<std::string>(j, "reference");
}

void to_json(nlohmann::json& j, const MetricReport& r) {
    j = nlohmann::json{{"audience", r.audience}, {"model_name", r.model_name},
                       {"n_pairs", r.n_pairs},   {"bleu", r.bleu},
                       {"sari", r.sari},         {"fk_ease", r.fk_ease},
                       {"fk_grade", r.fk_grade}};
}

void from_json(const nlohmann::json& j, MetricReport& r) {
    r.audience = require<Audience>(j, "audience");
    r.model_name = require<std::string>(j, "model_name");
    r.n_pairs = require<std::size_t>(j, "n_pairs");
    r.bleu = require<double>(j, "bleu");
    r.sari = require<double>(j, "sari");
    r.fk_ease = require<double>(j, "fk_ease");
    r.fk_grade = require<double>(j, "fk_grade");
}

}  // namespace plainlang::core
