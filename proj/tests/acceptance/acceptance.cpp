// Acceptance run: one PASS / FAIL / SKIP line per criterion; exit status 1 if
// anything failed.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "plainlang/core/strings.hpp"
#include "plainlang/eval/evaluation.hpp"
#include "plainlang/ingest/ingest.hpp"
#include "plainlang/metrics/metrics.hpp"
#include "plainlang/service/http_server.hpp"
#include "plainlang/text/unicode.hpp"
#include "support/brute_force.hpp"
#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

using namespace plainlang;
using nlohmann::json;
using text::make_tokens;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Pass;
    std::string detail;
};

// Collects failed expectations so a criterion reports all of them at once.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok) failures_.push_back(what);
    }
    void note(const std::string& s) {
        if (!notes_.empty()) notes_ += "; ";
        notes_ += s;
    }
    Outcome outcome() const {
        if (failures_.empty()) return {Status::Pass, notes_};
        std::string d = std::to_string(failures_.size()) + " failed: " + failures_.front();
        for (std::size_t i = 1; i < failures_.size() && i < 4; ++i) d += " | " + failures_[i];
        return {Status::Fail, d};
    }

private:
    std::vector<std::string> failures_;
    std::string notes_;
};

std::string num(double v, int places = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

std::string normalize_ws(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
            space = !out.empty();
        } else {
            if (space) out.push_back(' ');
            out.push_back(c);
            space = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Outcome metric_hand_cases() {
    Checks c;
    const auto cat = make_tokens({"the", "cat", "sat"});
    c.expect(metrics::bleu(cat, cat) == 1.0, "bleu identity != 1.0");
    const double bp = metrics::bleu(cat, make_tokens({"the", "cat", "sat", "on", "the", "mat"}));
    c.expect(std::abs(bp - std::exp(-1.0)) < 1e-9, "3-vs-6 bleu = " + num(bp, 12));
    c.expect(metrics::bleu(make_tokens({"dogs", "run"}), cat) == 0.0, "disjoint bleu != 0");

    const auto s = metrics::sari(make_tokens({"the", "big", "cat"}), make_tokens({"the", "cat"}),
                                 make_tokens({"the", "cat"}));
    c.expect(std::abs(s.sari - 41.6667) < 1e-4, "sari worked example = " + num(s.sari));
    c.expect(s.f_add == 0.25 && s.f_keep == 0.25 && s.p_del == 0.75,
             "sari breakdown (" + num(s.f_add) + ", " + num(s.f_keep) + ", " + num(s.p_del) + ")");
    for (std::size_t len = 4; len <= 12; ++len) {
        std::vector<std::string> t;
        for (std::size_t i = 0; i < len; ++i) t.push_back("w" + std::to_string(i % 7));
        const auto seq = make_tokens(t);
        const double id = metrics::sari(seq, seq, seq).sari;
        c.expect(std::abs(id - 33.3333) < 1e-4, "sari(s,s,s) len " + std::to_string(len) + " = " + num(id));
    }
    const auto r = metrics::readability("The cat sat on the mat.");
    c.expect(std::abs(r.fre - 116.145) < 1e-6, "FRE = " + num(r.fre, 9));
    c.expect(std::abs(r.fk_grade - (-1.45)) < 1e-6, "FKG = " + num(r.fk_grade, 9));
    c.note("FRE " + num(r.fre, 3) + ", FKG " + num(r.fk_grade, 2) + ", SARI " + num(s.sari, 4));
    return c.outcome();
}

Outcome oracle_equivalence() {
    Checks c;
    std::mt19937_64 rng(20261015);
    auto random_tokens = [&](std::size_t alphabet) {
        const std::size_t n = 1 + rng() % 12;
        std::vector<std::string> t(n);
        for (auto& x : t) x = std::string(1, static_cast<char>('a' + rng() % alphabet));
        return t;
    };
    constexpr int kTriples = 10'000;
    double worst = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < kTriples; ++i) {
        const std::size_t alphabet = 1 + rng() % 5;
        const auto src = random_tokens(alphabet);
        const auto cand = random_tokens(alphabet);
        const auto ref = random_tokens(alphabet);
        const double b = metrics::bleu(make_tokens(cand), make_tokens(ref));
        const auto s = metrics::sari(make_tokens(src), make_tokens(cand), make_tokens(ref));
        const auto slow = oracle::sari(src, cand, ref);
        const double diffs[] = {std::abs(b - oracle::bleu(cand, ref)), std::abs(s.f_add - slow.f_add),
                                std::abs(s.f_keep - slow.f_keep), std::abs(s.p_del - slow.p_del),
                                std::abs(s.sari - slow.sari)};
        for (double d : diffs) worst = std::max(worst, d);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(worst <= 1e-9, "max deviation " + std::to_string(worst));
    c.expect(secs < 60.0, "took " + num(secs, 1) + " s");
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d triples, max |diff| %.2e, %.2f s", kTriples, worst, secs);
    c.note(buf);
    return c.outcome();
}

Outcome table2_mock_run() {
    Checks c;
    const auto corpus = eval::load_corpus(fixtures::path("eval/pkwp_sample_100.tsv"));
    c.expect(corpus.pairs.size() == 100, "fixture has " + std::to_string(corpus.pairs.size()) + " pairs");
    llm::Gateway gateway(std::make_unique<llm::MockBackend>(llm::MockMode::EchoSource), core::ModelConfig{});
    eval::OutputCache cache;
    const auto result = eval::run_evaluation(corpus, &gateway, cache, {});
    c.expect(result.reports.size() == 5, std::to_string(result.reports.size()) + " reports");

    double sum = 0.0;
    for (const auto& p : corpus.pairs) sum += metrics::bleu(text::tokenize(p.original), text::tokenize(p.reference));
    const double expected = sum / static_cast<double>(corpus.pairs.size());
    std::set<core::Audience> seen;
    for (const auto& r : result.reports) {
        seen.insert(r.audience);
        c.expect(r.bleu == expected, std::string(core::canonical_label(r.audience)) + " bleu " + num(r.bleu, 17) +
                                         " != " + num(expected, 17));
        c.expect(r.n_pairs == 100, "n_pairs " + std::to_string(r.n_pairs));
    }
    c.expect(seen.size() == 5, "audiences not all distinct");

    const std::string md = eval::render_report(result.reports, eval::ReportFormat::Markdown);
    const std::string header = md.substr(0, md.find('\n'));
    std::vector<std::string> cells;
    std::stringstream ss(header);
    for (std::string cell; std::getline(ss, cell, '|');) {
        if (!core::trim(cell).empty()) cells.emplace_back(core::trim(cell));
    }
    const std::vector<std::string> want = {"User Group", "Model", "BLEU", "SARI", "FK Ease", "FK Grade"};
    c.expect(cells == want, "markdown header: " + header);
    c.note("5 reports, BLEU " + num(expected, 6) + " = recomputed mean bit-exactly");
    return c.outcome();
}

Outcome live_smoke() {
    const char* key = std::getenv("LLM_API_KEY");
    if (key == nullptr || core::trim(key).empty()) return {Status::Skip, "LLM_API_KEY not set"};
    Checks c;
    const auto corpus = eval::load_corpus(fixtures::path("eval/pkwp_sample_100.tsv"));
    auto model = core::ModelConfig::from_env();
    model.validate();
    llm::Gateway gateway(std::make_unique<llm::OpenAiBackend>(), model);
    eval::EvalOptions opts;
    opts.audiences = {core::Audience::StudentsAcademics};
    opts.sample = 10;
    opts.seed = 42;
    eval::OutputCache cache;
    const auto result = eval::run_evaluation(corpus, &gateway, cache, opts);
    const auto& r = result.reports.at(0);
    c.expect(r.bleu >= 0.1 && r.bleu <= 0.9, "BLEU " + num(r.bleu, 3));
    c.expect(r.sari >= 25 && r.sari <= 55, "SARI " + num(r.sari, 2));
    c.expect(r.fk_grade >= 3 && r.fk_grade <= 12, "FK Grade " + num(r.fk_grade, 2));
    c.note(model.model_name + ": BLEU " + num(r.bleu, 3) + ", SARI " + num(r.sari, 2) + ", FK Grade " +
           num(r.fk_grade, 2));
    return c.outcome();
}

Outcome table1_direction() {
    Checks c;
    const auto original = metrics::readability(fixtures::read("alexnet_abstract_original.txt"));
    const auto simplified = metrics::readability(fixtures::read("alexnet_abstract_simplified.txt"));
    const double gap = simplified.fre - original.fre;
    c.expect(gap > 0.0, "FRE gap " + num(gap, 2));
    c.note("FRE original " + num(original.fre, 2) + ", simplified " + num(simplified.fre, 2) + ", gap " +
           num(gap, 2) + "; FK grade " + num(original.fk_grade, 2) + " -> " + num(simplified.fk_grade, 2));
    return c.outcome();
}

Outcome ingestion_round_trip() {
    Checks c;
    const auto manifest = json::parse(fixtures::read("ingest/manifest.json"));
    std::vector<std::string> seeds;
    std::size_t round_trips = 0;
    for (const auto& m : manifest) {
        const std::string file = m.at("file");
        const std::string bytes = fixtures::read("ingest/" + file);
        seeds.push_back(bytes);
        if (!m.contains("text")) continue;
        try {
            const auto doc = ingest::extract_text(bytes, file);
            c.expect(normalize_ws(doc.text) == normalize_ws(m.at("text").get<std::string>()), file + " text differs");
            c.expect(ingest::to_string(doc.format) == m.at("format").get<std::string>(), file + " format");
            ++round_trips;
        } catch (const std::exception& e) {
            c.expect(false, file + ": " + e.what());
        }
    }

    std::mt19937_64 rng(0xacce97);
    const std::array<std::string, 4> prefixes = {"", "%PDF-1.7\n", std::string("PK\x03\x04", 4), "\xEF\xBB\xBF"};
    auto random_bytes = [&](std::size_t n) {
        std::string s(n, '\0');
        for (auto& ch : s) ch = static_cast<char>(rng() & 0xFF);
        return s;
    };
    constexpr int kBlobs = 10'000;
    std::size_t values = 0;
    std::size_t declared = 0;
    for (int i = 0; i < kBlobs; ++i) {
        std::string blob;
        if (i % 2 == 0) {
            blob = prefixes[rng() % prefixes.size()] + random_bytes(rng() % 2049);
        } else {
            blob = seeds[rng() % seeds.size()];
            const int flips = 1 + static_cast<int>(rng() % 16);
            for (int f = 0; f < flips && !blob.empty(); ++f) blob[rng() % blob.size()] = static_cast<char>(rng() & 0xFF);
            if (i % 3 == 0) blob.resize(rng() % (blob.size() + 1));
        }
        try {
            const auto doc = ingest::extract_text(blob, i % 5 == 0 ? "upload.pdf" : (i % 5 == 1 ? "upload.docx" : ""));
            c.expect(text::is_valid_utf8(doc.text), "blob " + std::to_string(i) + " gave invalid UTF-8");
            ++values;
        } catch (const ingest::IngestError&) {
            ++declared;
        } catch (const std::exception& e) {
            c.expect(false, "blob " + std::to_string(i) + " undeclared error: " + e.what());
        }
    }
    c.note(std::to_string(round_trips) + " fixtures round-trip; fuzz " + std::to_string(kBlobs) + " blobs: " +
           std::to_string(values) + " extracted, " + std::to_string(declared) + " declared errors");
    return c.outcome();
}

// --- service conformance ---------------------------------------------------

struct Reply {
    int status = 0;
    json j;
    std::string body;
};

class Server {
public:
    explicit Server(std::shared_ptr<llm::Gateway> gateway) : dir_("plainlang_acceptance") {
        service::ServiceConfig config;
        config.host = "127.0.0.1";
        config.port = 0;
        config.log_requests = false;
        store_ = std::make_shared<feedback::FeedbackStore>(
            feedback::FeedbackStore::Options{dir_.path, feedback::kDefaultRotateBytes, false});
        server_ = std::make_unique<service::HttpServer>(std::make_shared<service::Service>(config, gateway, store_));
        port_ = server_->start();
    }
    ~Server() { server_->stop(); }

    Reply post(const std::string& path, const json& body) const {
        return capture(client().Post(path, body.dump(), "application/json"));
    }
    Reply get(const std::string& path) const { return capture(client().Get(path)); }
    Reply upload(const std::string& name, const std::string& content) const {
        httplib::MultipartFormDataItems items = {{"file", content, name, "application/octet-stream"}};
        return capture(client().Post("/api/upload", items));
    }

private:
    fixtures::TempDir dir_;
    std::shared_ptr<feedback::FeedbackStore> store_;
    std::unique_ptr<service::HttpServer> server_;
    int port_ = 0;

    httplib::Client client() const {
        httplib::Client cl("127.0.0.1", port_);
        cl.set_read_timeout(20, 0);
        return cl;
    }
    static Reply capture(const httplib::Result& res) {
        if (!res) throw std::runtime_error("request failed: " + httplib::to_string(res.error()));
        Reply r{res->status, json(), res->body};
        if (!r.body.empty()) r.j = json::parse(r.body, nullptr, false);
        return r;
    }
};

bool error_schema(const Reply& r, int status, std::string_view code) {
    if (r.status != status || !r.j.is_object() || r.j.size() != 3) return false;
    if (r.j.value("code", "") != code || !r.j["message"].is_string() || r.j.value("http_status", 0) != status) {
        return false;
    }
    for (auto c : service::all_error_codes()) {
        if (service::code_label(c) == code) return service::http_status(c) == status;
    }
    return false;
}

bool is_number(const json& j, const char* key) { return j.contains(key) && j[key].is_number(); }

std::map<std::string, int> replay_latest(std::string_view log) {
    std::map<std::string, int> latest;
    std::size_t start = 0;
    while (start < log.size()) {
        const auto nl = log.find('\n', start);
        const auto line = log.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        try {
            const auto j = json::parse(line);
            latest[j.at("job_id").get<std::string>()] = j.at("stars").get<int>();
        } catch (const std::exception&) {
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return latest;
}

void truncation_property(Checks& c) {
    namespace fs = std::filesystem;
    fixtures::TempDir base("plainlang_acceptance_log");
    std::vector<feedback::JobRecord> jobs;
    {
        feedback::FeedbackStore store(base.path);
        for (std::size_t i = 0; i < 3; ++i) {
            jobs.push_back({core::JobId::generate(), core::kAllAudiences[i], "gpt-4o", core::now_ms()});
            store.register_job(jobs.back());
        }
        const int stars[] = {2, 5, 4, 1, 3};
        const std::size_t who[] = {0, 1, 0, 2, 1};
        for (int k = 0; k < 5; ++k) {
            const auto& j = jobs[who[k]];
            store.record_rating({j.job_id, stars[k], k == 1 ? std::optional<std::string>("great") : std::nullopt,
                                 core::now_ms(), j.audience, j.model_name});
        }
    }
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string ratings = slurp(base.path / "ratings.jsonl");
    const std::string jobs_log = slurp(base.path / "jobs.jsonl");
    std::size_t bad = 0;
    for (std::size_t cut = 0; cut <= ratings.size(); ++cut) {
        fixtures::TempDir trial("plainlang_acceptance_cut");
        fs::create_directories(trial.path);
        std::ofstream(trial.path / "jobs.jsonl", std::ios::binary) << jobs_log;
        std::ofstream(trial.path / "ratings.jsonl", std::ios::binary) << ratings.substr(0, cut);
        const auto expected = replay_latest(std::string_view(ratings).substr(0, cut));
        double sum = 0;
        for (const auto& [id, s] : expected) sum += s;
        try {
            feedback::FeedbackStore store(trial.path);
            const auto agg = store.aggregate();
            bool ok = agg.count == expected.size();
            if (ok && agg.count > 0) ok = std::abs(*agg.mean_stars - sum / static_cast<double>(agg.count)) < 1e-12;
            const auto& j = jobs[2];
            store.record_rating({j.job_id, 5, std::nullopt, core::now_ms(), j.audience, j.model_name});
            feedback::FeedbackStore again(trial.path);
            ok = ok && again.latest_rating(j.job_id)->stars == 5;
            if (!ok) ++bad;
        } catch (const std::exception&) {
            ++bad;
        }
    }
    c.expect(bad == 0, std::to_string(bad) + " truncation points recovered inconsistently");
    c.note("log truncated at all " + std::to_string(ratings.size() + 1) + " byte offsets");
}

Outcome service_conformance() {
    Checks c;
    ::setenv("MOCK_MODE", "echo_source", 1);
    std::shared_ptr<llm::Gateway> gateway = llm::Gateway::from_env();
    c.expect(gateway->backend_name() == "mock:echo_source", "backend " + gateway->backend_name());
    Server s(gateway);

    const auto health = s.get("/api/health");
    c.expect(health.status == 200 && health.j == json{{"status", "ok"}, {"model", "gpt-4o"}}, "health: " + health.body);

    const std::string text = "The cat sat on the mat. It was a sunny day.";
    const auto simp = s.post("/api/simplify", {{"text", text}});
    const auto& sj = simp.j;
    c.expect(simp.status == 200, "simplify status " + std::to_string(simp.status));
    c.expect(sj.is_object() && sj.size() == 6, "simplify fields: " + simp.body);
    c.expect(core::JobId::is_valid(sj.value("job_id", "")), "job_id");
    c.expect(sj.value("simplified_text", "") == text, "echo output");
    c.expect(sj.value("audience", "") == "general_public", "default audience is " + sj.value("audience", "?"));
    c.expect(sj.value("model", "") == "gpt-4o", "model");
    c.expect(sj.contains("readability") && is_number(sj["readability"], "fre") && is_number(sj["readability"], "fk_grade"),
             "readability");
    c.expect(sj.contains("latency_ms") && sj["latency_ms"].is_number_integer(), "latency_ms");
    for (auto a : core::kAllAudiences) {
        const auto r = s.post("/api/simplify", {{"text", text}, {"audience", core::canonical_label(a)}});
        c.expect(r.status == 200 && r.j.value("audience", "") == core::canonical_label(a),
                 "audience " + std::string(core::canonical_label(a)));
    }

    c.expect(error_schema(s.post("/api/simplify", {{"text", "  "}}), 400, "empty_text"), "empty_text");
    c.expect(error_schema(s.post("/api/simplify", {{"text", std::string(50'001, 'a')}}), 400, "too_long"), "too_long");
    c.expect(error_schema(s.post("/api/simplify", {{"text", "x"}, {"audience", "wizards"}}), 400, "unknown_audience"),
             "unknown_audience");
    c.expect(error_schema(s.get("/api/nope"), 404, "not_found"), "not_found");
    c.expect(error_schema(s.get("/api/simplify"), 405, "method_not_allowed"), "method_not_allowed");

    const auto sentences = s.post("/api/sentences", {{"text", text}});
    c.expect(sentences.status == 200 && sentences.j["sentences"].size() == 2, "sentences: " + sentences.body);
    const auto rephrase = s.post("/api/expert/rephrase", {{"sentence", "The cat sat on the mat."}, {"level", 1}});
    c.expect(rephrase.status == 200 && rephrase.j == json{{"variant", "The cat sat on the mat."}, {"level", 1}},
             "rephrase: " + rephrase.body);
    c.expect(error_schema(s.post("/api/expert/rephrase", {{"sentence", "x"}, {"level", 4}}), 400, "invalid_level"),
             "invalid_level");
    // Echoed prose is not a synonym list or a definition.
    c.expect(error_schema(s.post("/api/expert/synonyms", {{"word", "cat"}, {"sentence", "The cat sat."}}), 502,
                          "malformed_model_output"),
             "synonyms under echo");
    c.expect(error_schema(s.post("/api/expert/definition", {{"word", "dog"}, {"sentence", "The cat sat."}}), 400,
                          "word_not_in_context"),
             "word_not_in_context");

    const auto up = s.upload("note.txt", "Plain text upload.\r\nSecond line.");
    c.expect(up.status == 200 && up.j.value("text", "") == "Plain text upload.\nSecond line." &&
                 up.j.value("format", "") == "txt" && up.j.contains("warnings") && up.j.contains("page_or_paragraph_count"),
             "upload: " + up.body);
    c.expect(error_schema(s.upload("scan.pdf", fixtures::read("ingest/image_only.pdf")), 422, "no_text_content"),
             "no_text_content");

    // Scripted answers exercise the synonym and definition success schemas.
    {
        const auto& lib = prompting::PromptLibrary::embedded();
        auto t = std::make_shared<llm::Transcript>();
        const std::string sentence = "The committee postponed the vote.";
        t->add(llm::transcript_key(lib.build_synonym_prompt("postponed", sentence).user_message),
               {R"(["delayed","put off"])"});
        t->add(llm::transcript_key(lib.build_definition_prompt("committee", sentence).user_message),
               {R"({"definition": "A group chosen to decide things."})"});
        Server scripted(std::make_shared<llm::Gateway>(std::make_unique<llm::MockBackend>(llm::MockMode::Scripted, t),
                                                       core::ModelConfig{}));
        const auto syn = scripted.post("/api/expert/synonyms", {{"word", "postponed"}, {"sentence", sentence}});
        c.expect(syn.status == 200 && syn.j == json{{"synonyms", {"delayed", "put off"}}}, "synonyms: " + syn.body);
        const auto def = scripted.post("/api/expert/definition", {{"word", "committee"}, {"sentence", sentence}});
        c.expect(def.status == 200 && def.j == json{{"definition", "A group chosen to decide things."}},
                 "definition: " + def.body);
    }

    // 16 concurrent requests, each must get its own text back.
    constexpr int kConcurrent = 16;
    std::vector<Reply> replies(kConcurrent);
    std::vector<std::string> errors(kConcurrent);
    std::vector<std::thread> threads;
    for (int k = 0; k < kConcurrent; ++k) {
        threads.emplace_back([&, k] {
            try {
                replies[k] = s.post("/api/simplify",
                                    {{"text", "Request number " + std::to_string(k) + " says hello."},
                                     {"audience", core::canonical_label(core::kAllAudiences[k % 5])}});
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        });
    }
    for (auto& t : threads) t.join();
    std::set<std::string> ids;
    int bleed = 0;
    for (int k = 0; k < kConcurrent; ++k) {
        c.expect(errors[k].empty(), "request " + std::to_string(k) + ": " + errors[k]);
        if (!errors[k].empty()) continue;
        const auto& r = replies[k];
        if (r.status != 200 || r.j.value("simplified_text", "") != "Request number " + std::to_string(k) + " says hello." ||
            r.j.value("audience", "") != core::canonical_label(core::kAllAudiences[k % 5])) {
            ++bleed;
        }
        ids.insert(r.j.value("job_id", ""));
    }
    c.expect(bleed == 0, std::to_string(bleed) + " concurrent replies mismatched");
    c.expect(ids.size() == kConcurrent, "job ids not unique");

    // Feedback: last write wins per job.
    const auto job_a = s.post("/api/simplify", {{"text", "First job."}}).j.value("job_id", "");
    const auto job_b = s.post("/api/simplify", {{"text", "Second job."}, {"audience", "students"}}).j.value("job_id", "");
    const auto before = s.get("/api/feedback/summary").j.value("count", -1);
    c.expect(s.post("/api/feedback", {{"job_id", job_a}, {"stars", 2}}).status == 204, "feedback 204");
    c.expect(s.post("/api/feedback", {{"job_id", job_b}, {"stars", 4}, {"comment", "clear"}}).status == 204, "feedback b");
    c.expect(s.post("/api/feedback", {{"job_id", job_a}, {"stars", 5}}).status == 204, "feedback overwrite");
    const auto summary = s.get("/api/feedback/summary");
    c.expect(before == 0 && summary.j.value("count", -1) == 2, "summary count: " + summary.body);
    c.expect(std::abs(summary.j.value("mean_stars", 0.0) - 4.5) < 1e-12, "last-write-wins mean: " + summary.body);
    c.expect(s.get("/api/feedback/summary?audience=students").j.value("count", -1) == 1, "per-audience filter");
    c.expect(error_schema(s.post("/api/feedback", {{"job_id", job_a}, {"stars", 6}}), 400, "invalid_stars"),
             "invalid_stars");
    c.expect(error_schema(s.post("/api/feedback", {{"job_id", core::JobId::generate().str()}, {"stars", 3}}), 404,
                          "unknown_job"),
             "unknown_job");

    truncation_property(c);
    c.note("schemas, default audience, 16-way concurrency, last-write-wins");
    ::unsetenv("MOCK_MODE");
    return c.outcome();
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"metric hand cases", metric_hand_cases},
        {"bleu/sari vs brute-force oracle", oracle_equivalence},
        {"end-to-end mock evaluation", table2_mock_run},
        {"live smoke test", live_smoke},
        {"readability gain on the bundled abstract", table1_direction},
        {"ingestion round trip and fuzz", ingestion_round_trip},
        {"service conformance", service_conformance},
    };

    int failed = 0;
    int index = 0;
    for (const auto& criterion : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criterion.run();
        } catch (const std::exception& e) {
            out = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        const char* label = out.status == Status::Pass ? "PASS" : out.status == Status::Skip ? "SKIP" : "FAIL";
        if (out.status == Status::Fail) ++failed;
        std::printf("%s [%d] %s (%.0f ms)%s%s\n", label, index, criterion.name, ms, out.detail.empty() ? "" : ": ",
                    out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
