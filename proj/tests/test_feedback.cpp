#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <thread>

#include "doctest.h"
#include "plainlang/feedback/store.hpp"
#include "support/temp_dir.hpp"

using namespace plainlang;
using namespace plainlang::feedback;
using core::Audience;
using core::JobId;

namespace fs = std::filesystem;

namespace {

using fixtures::TempDir;

JobRecord make_job(Audience a = Audience::GeneralPublic) {
    return JobRecord{JobId::generate(), a, "gpt-4o", core::now_ms()};
}

Rating rate(const JobRecord& job, int stars, std::optional<std::string> comment = std::nullopt) {
    return Rating{job.job_id, stars, std::move(comment), core::now_ms(), job.audience, job.model_name};
}

FeedbackErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const FeedbackError& e) {
        return e.kind();
    }
    FAIL("expected FeedbackError");
    return FeedbackErrorKind::StorageFailure;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, std::string_view data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

// Independent replay: latest complete line per job, straight from the text.
std::map<std::string, int> expected_latest(std::string_view log) {
    std::map<std::string, int> latest;
    std::size_t start = 0;
    while (start < log.size()) {
        const auto nl = log.find('\n', start);
        const std::string_view line = log.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        try {
            const auto j = nlohmann::json::parse(line);
            latest[j.at("job_id").get<std::string>()] = j.at("stars").get<int>();
        } catch (const std::exception&) {
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return latest;
}

}  // namespace

TEST_CASE("record and aggregate") {
    TempDir tmp;
    FeedbackStore store(tmp.path);
    CHECK(store.aggregate().count == 0);
    CHECK_FALSE(store.aggregate().mean_stars.has_value());

    const auto a = make_job();
    const auto b = make_job(Audience::StudentsAcademics);
    store.register_job(a);
    store.register_job(b);

    store.record_rating(rate(a, 5));
    CHECK(store.aggregate().count == 1);
    store.record_rating(rate(b, 3, "clear enough"));
    const auto agg = store.aggregate();
    CHECK(agg.count == 2);
    CHECK(*agg.mean_stars == doctest::Approx(4.0));
    CHECK(agg.for_audience(Audience::GeneralPublic).count == 1);
    CHECK(*agg.for_audience(Audience::StudentsAcademics).mean_stars == doctest::Approx(3.0));
    CHECK(agg.for_audience(Audience::JournalistsMedia).count == 0);
    CHECK_FALSE(agg.for_audience(Audience::JournalistsMedia).mean_stars.has_value());

    const auto filtered = store.aggregate(Audience::StudentsAcademics);
    CHECK(filtered.count == 1);
    CHECK(*filtered.mean_stars == doctest::Approx(3.0));
    CHECK(filtered.for_audience(Audience::GeneralPublic).count == 0);

    const auto j = nlohmann::json(agg);
    CHECK(j["count"] == 2);
    CHECK(j["per_audience"]["students_academics"]["histogram"] == nlohmann::json::array({0, 0, 1, 0, 0}));
    CHECK(j["per_audience"]["journalists_media"]["mean_stars"].is_null());
}

TEST_CASE("last write wins per job") {
    TempDir tmp;
    FeedbackStore store(tmp.path);
    const auto job = make_job();
    store.register_job(job);
    store.record_rating(rate(job, 2));
    store.record_rating(rate(job, 4, "better after edits"));
    auto agg = store.aggregate();
    CHECK(agg.count == 1);
    CHECK(*agg.mean_stars == doctest::Approx(4.0));
    CHECK(store.latest_rating(job.job_id)->comment == "better after edits");

    FeedbackStore reopened(tmp.path);
    agg = reopened.aggregate();
    CHECK(agg.count == 1);
    CHECK(*agg.mean_stars == doctest::Approx(4.0));
}

TEST_CASE("validation errors") {
    TempDir tmp;
    FeedbackStore store(tmp.path);
    const auto job = make_job();
    store.register_job(job);

    CHECK(kind_of([&] { store.record_rating(rate(job, 0)); }) == FeedbackErrorKind::InvalidStars);
    CHECK(kind_of([&] { store.record_rating(rate(job, 6)); }) == FeedbackErrorKind::InvalidStars);
    CHECK(kind_of([&] { store.record_rating(rate(make_job(), 3)); }) == FeedbackErrorKind::UnknownJob);

    // 2000 code points are fine even when they take more bytes.
    std::string max_comment;
    for (int i = 0; i < 2000; ++i) max_comment += "\xC3\xA9";
    CHECK_NOTHROW(store.record_rating(rate(job, 3, max_comment)));
    CHECK(kind_of([&] { store.record_rating(rate(job, 3, max_comment + "x")); }) == FeedbackErrorKind::CommentTooLong);

    CHECK(store.aggregate().count == 1);
    CHECK(error_label(FeedbackErrorKind::UnknownJob) == "unknown_job");
}

TEST_CASE("jobs survive restarts") {
    TempDir tmp;
    const auto job = make_job(Audience::IndustryProfessionals);
    {
        FeedbackStore store(tmp.path);
        store.register_job(job);
        store.register_job(job);
    }
    FeedbackStore store(tmp.path);
    CHECK(store.has_job(job.job_id));
    CHECK(store.job_count() == 1);
    CHECK(*store.job(job.job_id) == job);
    CHECK_NOTHROW(store.record_rating(rate(job, 5)));
    CHECK(store.load_warnings().empty());
}

TEST_CASE("rating json round-trip") {
    const auto job = make_job(Audience::JournalistsMedia);
    for (const auto& comment : {std::optional<std::string>{}, std::optional<std::string>{"quote \" and\nnewline"}}) {
        const Rating r = rate(job, 4, comment);
        const auto j = nlohmann::json(r);
        CHECK(j.get<Rating>() == r);
        CHECK(nlohmann::json::parse(j.dump()).get<Rating>() == r);
    }
    CHECK(nlohmann::json(job).get<JobRecord>() == job);
}

TEST_CASE("rotation keeps every record") {
    TempDir tmp;
    std::vector<JobRecord> jobs;
    {
        FeedbackStore store(FeedbackStore::Options{tmp.path, 1024, false});
        for (int i = 0; i < 40; ++i) {
            jobs.push_back(make_job(core::kAllAudiences[static_cast<std::size_t>(i % 5)]));
            store.register_job(jobs.back());
            store.record_rating(rate(jobs.back(), 1 + i % 5));
        }
        store.record_rating(rate(jobs[0], 5));
    }
    std::size_t segments = 0;
    for (const auto& e : fs::directory_iterator(tmp.path)) {
        segments += e.path().filename().string().rfind("ratings.", 0) == 0;
    }
    CHECK(segments > 2);
    FeedbackStore store(FeedbackStore::Options{tmp.path, 1024, false});
    CHECK(store.job_count() == 40);
    const auto agg = store.aggregate();
    CHECK(agg.count == 40);
    // stars 1..5 eight times each, then job 0 moved from 1 to 5.
    CHECK(*agg.mean_stars == doctest::Approx((8.0 * 15 + 4) / 40));
    CHECK(store.latest_rating(jobs[0].job_id)->stars == 5);
}

TEST_CASE("truncation at every byte boundary reopens consistently") {
    TempDir tmp;
    std::vector<JobRecord> jobs;
    {
        FeedbackStore store(tmp.path);
        for (int i = 0; i < 3; ++i) {
            jobs.push_back(make_job(core::kAllAudiences[static_cast<std::size_t>(i)]));
            store.register_job(jobs.back());
        }
        store.record_rating(rate(jobs[0], 2));
        store.record_rating(rate(jobs[1], 5, "great"));
        store.record_rating(rate(jobs[0], 4));
        store.record_rating(rate(jobs[2], 1, "lost the meaning"));
        store.record_rating(rate(jobs[1], 3));
    }
    const std::string ratings = slurp(tmp.path / "ratings.jsonl");
    const std::string jobs_log = slurp(tmp.path / "jobs.jsonl");
    REQUIRE(ratings.size() > 100);

    for (std::size_t cut = 0; cut <= ratings.size(); ++cut) {
        CAPTURE(cut);
        TempDir trial;
        fs::create_directories(trial.path);
        spit(trial.path / "jobs.jsonl", jobs_log);
        spit(trial.path / "ratings.jsonl", std::string_view(ratings).substr(0, cut));

        const auto expected = expected_latest(std::string_view(ratings).substr(0, cut));
        std::size_t sum = 0;
        for (const auto& [id, stars] : expected) sum += static_cast<std::size_t>(stars);
        {
            FeedbackStore store(trial.path);
            const auto agg = store.aggregate();
            REQUIRE(agg.count == expected.size());
            if (agg.count > 0) {
                CHECK(*agg.mean_stars == doctest::Approx(static_cast<double>(sum) / static_cast<double>(expected.size())));
                CHECK(*agg.mean_stars >= 1.0);
                CHECK(*agg.mean_stars <= 5.0);
            }
            // A write after recovery must not merge with the torn tail.
            store.record_rating(rate(jobs[2], 5));
        }
        FeedbackStore again(trial.path);
        CHECK(again.latest_rating(jobs[2].job_id)->stars == 5);
        CHECK(again.aggregate().count == expected.size() + (expected.count(jobs[2].job_id.str()) ? 0 : 1));
        const std::string repaired = slurp(trial.path / "ratings.jsonl");
        CHECK(repaired.back() == '\n');
    }

    // A damaged jobs log still leaves every rating counted.
    for (std::size_t cut = 0; cut <= jobs_log.size(); cut += 7) {
        TempDir trial;
        fs::create_directories(trial.path);
        spit(trial.path / "jobs.jsonl", std::string_view(jobs_log).substr(0, cut));
        spit(trial.path / "ratings.jsonl", ratings);
        FeedbackStore store(trial.path);
        CHECK(store.aggregate().count == 3);
        CHECK(store.job_count() == 3);
    }
}

TEST_CASE("garbage lines in the middle are skipped") {
    TempDir tmp;
    const auto job = make_job();
    {
        FeedbackStore store(tmp.path);
        store.register_job(job);
        store.record_rating(rate(job, 2));
    }
    const auto good = slurp(tmp.path / "ratings.jsonl");
    spit(tmp.path / "ratings.jsonl", good + "{not json\n" + R"({"job_id":"zz","stars":9})" + "\n");
    FeedbackStore store(tmp.path);
    CHECK(store.aggregate().count == 1);
    CHECK(store.load_warnings().size() == 2);
}

TEST_CASE("storage failures") {
    CHECK(kind_of([] { FeedbackStore store(fs::path{}); }) == FeedbackErrorKind::StorageFailure);
    TempDir tmp;
    fs::create_directories(tmp.path);
    spit(tmp.path / "file", "x");
    CHECK(kind_of([&] { FeedbackStore store(tmp.path / "file" / "sub"); }) == FeedbackErrorKind::StorageFailure);
}

TEST_CASE("concurrent writers and readers") {
    TempDir tmp;
    FeedbackStore store(FeedbackStore::Options{tmp.path, 4096, false});
    std::vector<JobRecord> jobs;
    for (int i = 0; i < 50; ++i) {
        jobs.push_back(make_job(core::kAllAudiences[static_cast<std::size_t>(i % 5)]));
        store.register_job(jobs.back());
    }
    std::atomic<bool> bad_mean{false};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            std::mt19937 rng(static_cast<unsigned>(t));
            for (int i = 0; i < 200; ++i) {
                const auto& job = jobs[rng() % jobs.size()];
                store.record_rating(rate(job, 1 + static_cast<int>(rng() % 5)));
                const auto agg = store.aggregate();
                if (agg.mean_stars && (*agg.mean_stars < 1.0 || *agg.mean_stars > 5.0)) bad_mean = true;
            }
        });
    }
    for (auto& th : threads) th.join();
    CHECK_FALSE(bad_mean);
    const auto live = store.aggregate();
    FeedbackStore reopened(FeedbackStore::Options{tmp.path, 4096, false});
    const auto replayed = reopened.aggregate();
    CHECK(replayed.count == live.count);
    CHECK(*replayed.mean_stars == doctest::Approx(*live.mean_stars));
    for (const auto& job : jobs) {
        const auto a = store.latest_rating(job.job_id);
        const auto b = reopened.latest_rating(job.job_id);
        REQUIRE(a.has_value() == b.has_value());
        if (a) CHECK(a->stars == b->stars);
    }
}
