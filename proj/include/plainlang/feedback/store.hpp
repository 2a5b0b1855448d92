#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "plainlang/core/error.hpp"
#include "plainlang/core/types.hpp"

namespace plainlang::feedback {

enum class FeedbackErrorKind { InvalidStars, CommentTooLong, UnknownJob, StorageFailure };
using FeedbackError = CodedError<FeedbackErrorKind>;

std::string_view error_label(FeedbackErrorKind kind) noexcept;

inline constexpr int kMinStars = 1;
inline constexpr int kMaxStars = 5;
/// In Unicode code points.
inline constexpr std::size_t kMaxCommentLength = 2000;
inline constexpr std::uint64_t kDefaultRotateBytes = 64ull << 20;

struct Rating {
    core::JobId job_id;
    int stars = 0;
    std::optional<std::string> comment;
    core::Timestamp created_at{};
    core::Audience audience = core::kDefaultAudience;
    std::string model_name;

    /// Throws FeedbackError{InvalidStars, CommentTooLong}.
    void validate() const;

    friend bool operator==(const Rating&, const Rating&) = default;
};

/// What the store remembers about an issued job; enough to validate and
/// attribute ratings without keeping the user's text.
struct JobRecord {
    core::JobId job_id;
    core::Audience audience = core::kDefaultAudience;
    std::string model_name;
    core::Timestamp created_at{};

    static JobRecord of(const core::SimplificationJob& job);

    friend bool operator==(const JobRecord&, const JobRecord&) = default;
};

struct StarSummary {
    std::size_t count = 0;
    /// Absent when count is 0.
    std::optional<double> mean_stars;
    /// Ratings per star value, index 0 is one star.
    std::array<std::size_t, 5> histogram{};
};

struct Aggregate {
    std::size_t count = 0;
    std::optional<double> mean_stars;
    std::array<StarSummary, 5> per_audience{};

    const StarSummary& for_audience(core::Audience a) const { return per_audience[static_cast<std::size_t>(a)]; }
};

void to_json(nlohmann::json& j, const Rating& r);
void from_json(const nlohmann::json& j, Rating& r);
void to_json(nlohmann::json& j, const JobRecord& r);
void from_json(const nlohmann::json& j, JobRecord& r);
void to_json(nlohmann::json& j, const StarSummary& s);
void to_json(nlohmann::json& j, const Aggregate& a);

namespace detail {
class AppendLog;
}

/// Append-only JSON-lines store for jobs and ratings under one directory.
///
/// Files: jobs.jsonl and ratings.jsonl, rotated to <name>.<n>.jsonl once
/// they reach `rotate_bytes`. Each record is written with a single write()
/// and fsync'd before the call returns. On open, a torn final line is cut
/// off and unreadable lines are skipped with a warning.
class FeedbackStore {
public:
    struct Options {
        std::filesystem::path dir;
        std::uint64_t rotate_bytes = kDefaultRotateBytes;
        bool sync = true;
    };

    /// Creates the directory if needed and replays the logs.
    /// Throws FeedbackError{StorageFailure}.
    explicit FeedbackStore(Options options);
    explicit FeedbackStore(std::filesystem::path dir);
    ~FeedbackStore();

    FeedbackStore(const FeedbackStore&) = delete;
    FeedbackStore& operator=(const FeedbackStore&) = delete;

    /// Directory from FEEDBACK_PATH, default "./feedback".
    static std::filesystem::path dir_from_env();

    /// Durably records an issued job. Re-registering an id is a no-op.
    void register_job(const JobRecord& job);
    bool has_job(const core::JobId& id) const;
    std::optional<JobRecord> job(const core::JobId& id) const;
    std::size_t job_count() const;

    /// Throws FeedbackError{InvalidStars, CommentTooLong, UnknownJob,
    /// StorageFailure}. Returns after the record is on disk.
    void record_rating(const Rating& rating);

    /// Latest rating per job, or nothing.
    std::optional<Rating> latest_rating(const core::JobId& id) const;

    /// Over the latest rating of each job; `filter` restricts to one audience.
    Aggregate aggregate(std::optional<core::Audience> filter = std::nullopt) const;

    /// Problems found while replaying the logs (skipped lines, repairs).
    const std::vector<std::string>& load_warnings() const noexcept { return warnings_; }
    const std::filesystem::path& dir() const noexcept { return options_.dir; }

private:
    struct Tally {
        std::array<std::array<std::size_t, 5>, 5> histogram{};  // [audience][stars-1]
    };

    Options options_;
    std::vector<std::string> warnings_;

    std::mutex write_mutex_;
    std::unique_ptr<detail::AppendLog> jobs_log_;
    std::unique_ptr<detail::AppendLog> ratings_log_;

    mutable std::shared_mutex state_mutex_;
    std::unordered_map<std::string, JobRecord> jobs_;
    std::unordered_map<std::string, Rating> latest_;
    Tally tally_;

    void apply_job(JobRecord job);
    void apply_rating(Rating rating);
};

}  // namespace plainlang::feedback
