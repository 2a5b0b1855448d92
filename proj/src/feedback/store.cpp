#include "plainlang/feedback/store.hpp"

#include <cstdlib>

#include "append_log.hpp"
#include "plainlang/text/unicode.hpp"

namespace plainlang::feedback {

namespace fs = std::filesystem;
using core::Audience;
using core::JobId;

namespace {

template <typename T>
T field(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw core::CoreError(core::CoreErrorKind::MalformedJson, std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw core::CoreError(core::CoreErrorKind::MalformedJson, std::string("field '") + key + "': " + e.what());
    }
}

std::optional<double> mean_of(const std::array<std::size_t, 5>& histogram, std::size_t& count) {
    count = 0;
    std::size_t sum = 0;
    for (std::size_t s = 0; s < histogram.size(); ++s) {
        count += histogram[s];
        sum += histogram[s] * (s + 1);
    }
    if (count == 0) return std::nullopt;
    return static_cast<double>(sum) / static_cast<double>(count);
}

template <typename T>
bool parse_line(std::string_view line, T& out) {
    try {
        const auto j = nlohmann::json::parse(line);
        out = j.get<T>();
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

std::string_view error_label(FeedbackErrorKind kind) noexcept {
    switch (kind) {
        case FeedbackErrorKind::InvalidStars: return "invalid_stars";
        case FeedbackErrorKind::CommentTooLong: return "comment_too_long";
        case FeedbackErrorKind::UnknownJob: return "unknown_job";
        case FeedbackErrorKind::StorageFailure: return "storage_failure";
    }
    return "unknown";
}

void Rating::validate() const {
    if (stars < kMinStars || stars > kMaxStars) {
        throw FeedbackError(FeedbackErrorKind::InvalidStars,
                            "stars must be between 1 and 5, got " + std::to_string(stars));
    }
    if (comment && text::code_point_count(*comment) > kMaxCommentLength) {
        throw FeedbackError(FeedbackErrorKind::CommentTooLong, "comment exceeds 2000 characters");
    }
}

JobRecord JobRecord::of(const core::SimplificationJob& job) {
    return JobRecord{job.id, job.audience, job.model_name, job.created_at};
}

void to_json(nlohmann::json& j, const Rating& r) {
    j = nlohmann::json{{"job_id", r.job_id},
                       {"comment", r.comment ? nlohmann::json(*r.comment) : nlohmann::json(nullptr)},
                       {"created_at", core::format_timestamp(r.created_at)},
                       {"audience", r.audience},
                       {"model_name", r.model_name},
                       {"stars", r.stars}};
}

void from_json(const nlohmann::json& j, Rating& r) {
    r.job_id = field<JobId>(j, "job_id");
    r.stars = field<int>(j, "stars");
    const auto& c = j.contains("comment") ? j.at("comment") : nlohmann::json(nullptr);
    if (c.is_null()) {
        r.comment.reset();
    } else if (c.is_string()) {
        r.comment = c.get<std::string>();
    } else {
        throw core::CoreError(core::CoreErrorKind::MalformedJson, "field 'comment' must be a string or null");
    }
    r.created_at = core::parse_timestamp(field<std::string>(j, "created_at"));
    r.audience = field<Audience>(j, "audience");
    r.model_name = field<std::string>(j, "model_name");
}

void to_json(nlohmann::json& j, const JobRecord& r) {
    j = nlohmann::json{{"job_id", r.job_id},
                       {"audience", r.audience},
                       {"model_name", r.model_name},
                       {"created_at", core::format_timestamp(r.created_at)}};
}

void from_json(const nlohmann::json& j, JobRecord& r) {
    r.job_id = field<JobId>(j, "job_id");
    r.audience = field<Audience>(j, "audience");
    r.model_name = field<std::string>(j, "model_name");
    r.created_at = core::parse_timestamp(field<std::string>(j, "created_at"));
}

void to_json(nlohmann::json& j, const StarSummary& s) {
    j = nlohmann::json{{"count", s.count}, {"histogram", s.histogram}};
    j["mean_stars"] = s.mean_stars ? nlohmann::json(*s.mean_stars) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const Aggregate& a) {
    j = nlohmann::json{{"count", a.count}};
    j["mean_stars"] = a.mean_stars ? nlohmann::json(*a.mean_stars) : nlohmann::json(nullptr);
    auto& per = j["per_audience"] = nlohmann::json::object();
    for (Audience aud : core::kAllAudiences) per[std::string(core::canonical_label(aud))] = a.for_audience(aud);
}

FeedbackStore::FeedbackStore(fs::path dir) : FeedbackStore(Options{std::move(dir)}) {}

FeedbackStore::FeedbackStore(Options options) : options_(std::move(options)) {
    if (options_.dir.empty()) throw FeedbackError(FeedbackErrorKind::StorageFailure, "feedback directory not set");
    std::error_code ec;
    fs::create_directories(options_.dir, ec);
    if (ec || !fs::is_directory(options_.dir)) {
        throw FeedbackError(FeedbackErrorKind::StorageFailure,
                            "cannot create feedback directory " + options_.dir.string());
    }
    jobs_log_ = std::make_unique<detail::AppendLog>(options_.dir, "jobs", options_.rotate_bytes, options_.sync);
    ratings_log_ = std::make_unique<detail::AppendLog>(options_.dir, "ratings", options_.rotate_bytes, options_.sync);

    jobs_log_->open(
        [this](std::string_view line) {
            JobRecord job;
            if (!parse_line(line, job)) return false;
            apply_job(std::move(job));
            return true;
        },
        warnings_);
    std::size_t orphans = 0;
    ratings_log_->open(
        [this, &orphans](std::string_view line) {
            Rating r;
            if (!parse_line(line, r)) return false;
            try {
                r.validate();
            } catch (const FeedbackError&) {
                return false;
            }
            // Job lost from its own log: keep the rating and restore the job.
            if (jobs_.find(r.job_id.str()) == jobs_.end()) {
                ++orphans;
                apply_job(JobRecord{r.job_id, r.audience, r.model_name, r.created_at});
            }
            apply_rating(std::move(r));
            return true;
        },
        warnings_);
    if (orphans > 0) {
        warnings_.push_back(std::to_string(orphans) + " rating(s) refer to jobs missing from jobs.jsonl");
    }
}

FeedbackStore::~FeedbackStore() = default;

fs::path FeedbackStore::dir_from_env() {
    const char* env = std::getenv("FEEDBACK_PATH");
    return (env && *env) ? fs::path(env) : fs::path("feedback");
}

void FeedbackStore::apply_job(JobRecord job) {
    const std::string key = job.job_id.str();
    jobs_.try_emplace(key, std::move(job));
}

void FeedbackStore::apply_rating(Rating rating) {
    const auto a = static_cast<std::size_t>(rating.audience);
    const std::string key = rating.job_id.str();
    if (const auto it = latest_.find(key); it != latest_.end()) {
        --tally_.histogram[static_cast<std::size_t>(it->second.audience)][static_cast<std::size_t>(it->second.stars - 1)];
        it->second = std::move(rating);
        ++tally_.histogram[a][static_cast<std::size_t>(it->second.stars - 1)];
    } else {
        ++tally_.histogram[a][static_cast<std::size_t>(rating.stars - 1)];
        latest_.emplace(key, std::move(rating));
    }
}

void FeedbackStore::register_job(const JobRecord& job) {
    if (job.job_id.empty()) throw FeedbackError(FeedbackErrorKind::UnknownJob, "job id is empty");
    const std::lock_guard write(write_mutex_);
    if (has_job(job.job_id)) return;
    jobs_log_->append(nlohmann::json(job).dump());
    const std::unique_lock lock(state_mutex_);
    apply_job(job);
}

bool FeedbackStore::has_job(const JobId& id) const {
    const std::shared_lock lock(state_mutex_);
    return jobs_.count(id.str()) > 0;
}

std::optional<JobRecord> FeedbackStore::job(const JobId& id) const {
    const std::shared_lock lock(state_mutex_);
    const auto it = jobs_.find(id.str());
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

std::size_t FeedbackStore::job_count() const {
    const std::shared_lock lock(state_mutex_);
    return jobs_.size();
}

void FeedbackStore::record_rating(const Rating& rating) {
    rating.validate();
    const std::lock_guard write(write_mutex_);
    if (!has_job(rating.job_id)) {
        throw FeedbackError(FeedbackErrorKind::UnknownJob, "no job with id '" + rating.job_id.str() + "'");
    }
    ratings_log_->append(nlohmann::json(rating).dump());
    const std::unique_lock lock(state_mutex_);
    apply_rating(rating);
}

std::optional<Rating> FeedbackStore::latest_rating(const JobId& id) const {
    const std::shared_lock lock(state_mutex_);
    const auto it = latest_.find(id.str());
    if (it == latest_.end()) return std::nullopt;
    return it->second;
}

Aggregate FeedbackStore::aggregate(std::optional<Audience> filter) const {
    Tally snapshot;
    {
        const std::shared_lock lock(state_mutex_);
        snapshot = tally_;
    }
    Aggregate out;
    std::array<std::size_t, 5> total{};
    for (Audience a : core::kAllAudiences) {
        const auto i = static_cast<std::size_t>(a);
        StarSummary& s = out.per_audience[i];
        if (filter && *filter != a) continue;
        s.histogram = snapshot.histogram[i];
        s.mean_stars = mean_of(s.histogram, s.count);
        for (std::size_t k = 0; k < 5; ++k) total[k] += s.histogram[k];
    }
    out.mean_stars = mean_of(total, out.count);
    return out;
}

}  // namespace plainlang::feedback
