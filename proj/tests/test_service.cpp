#include <httplib.h>

#include <atomic>
#include <set>
#include <thread>

#include "doctest.h"
#include "plainlang/core/strings.hpp"
#include "plainlang/metrics/metrics.hpp"
#include "plainlang/service/http_server.hpp"
#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

using namespace plainlang;
using namespace plainlang::service;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

constexpr const char* kSecret = "sk-live-DO-NOT-LEAK-7f3a9c";

const prompting::PromptLibrary& lib() {
    static const auto l = prompting::PromptLibrary::embedded();
    return l;
}

// Every response seen by any test, for the key-leak scan.
std::vector<std::string>& seen_responses() {
    static std::vector<std::string> all;
    return all;
}
std::mutex seen_mutex;

struct Reply {
    int status = 0;
    std::string body;
    json j;
    httplib::Headers headers;
};

class Harness {
public:
    explicit Harness(std::unique_ptr<llm::Backend> backend, ServiceConfig config = {}, core::ModelConfig model = {})
        : store_dir_("plainlang_service") {
        config.port = 0;
        config.host = "127.0.0.1";
        config.log_requests = false;
        if (model.api_key.empty()) model.api_key = kSecret;
        gateway_ = std::make_shared<llm::Gateway>(std::move(backend), model, 4);
        store_ = std::make_shared<feedback::FeedbackStore>(
            feedback::FeedbackStore::Options{store_dir_.path, feedback::kDefaultRotateBytes, false});
        service_ = std::make_shared<Service>(config, gateway_, store_);
        server_ = std::make_unique<HttpServer>(service_);
        port_ = server_->start();
    }
    ~Harness() { server_->stop(); }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(20, 0);
        return c;
    }

    Reply post(const std::string& path, const json& body) const { return post_raw(path, body.dump()); }

    Reply post_raw(const std::string& path, const std::string& body) const {
        auto res = client().Post(path, body, "application/json");
        return capture(res);
    }

    Reply get(const std::string& path) const { return capture(client().Get(path)); }

    Reply upload(const std::string& filename, const std::string& content) const {
        httplib::MultipartFormDataItems items = {{"file", content, filename, "application/octet-stream"}};
        return capture(client().Post("/api/upload", items));
    }

    static Reply capture(const httplib::Result& res) {
        if (!res) throw std::runtime_error("request failed: " + httplib::to_string(res.error()));
        Reply r;
        r.status = res->status;
        r.body = res->body;
        r.headers = res->headers;
        if (!r.body.empty()) r.j = json::parse(r.body, nullptr, false);
        std::lock_guard lock(seen_mutex);
        std::string all = r.body;
        for (const auto& [k, v] : r.headers) all += "\n" + k + ": " + v;
        seen_responses().push_back(std::move(all));
        return r;
    }

    feedback::FeedbackStore& store() { return *store_; }
    int port() const { return port_; }

private:
    fixtures::TempDir store_dir_;
    std::shared_ptr<llm::Gateway> gateway_;
    std::shared_ptr<feedback::FeedbackStore> store_;
    std::shared_ptr<Service> service_;
    std::unique_ptr<HttpServer> server_;
    int port_ = 0;
};

std::unique_ptr<llm::Backend> echo() { return std::make_unique<llm::MockBackend>(llm::MockMode::EchoSource); }

void check_error(const Reply& r, int status, std::string_view code) {
    CAPTURE(r.body);
    CHECK(r.status == status);
    REQUIRE(r.j.is_object());
    CHECK(r.j.size() == 3);
    CHECK(r.j.value("code", "") == code);
    CHECK(r.j["message"].is_string());
    CHECK(r.j.value("http_status", 0) == status);
    bool known = false;
    for (ApiErrorCode c : all_error_codes()) {
        if (code_label(c) == r.j.value("code", "")) known = http_status(c) == status;
    }
    CHECK_MESSAGE(known, "code outside the closed set or wrong status");
}

// Chat-completions stub whose error bodies echo the caller's credentials.
class HostileUpstream {
public:
    HostileUpstream(int status, std::chrono::milliseconds delay = 0ms) {
        server_.Post("/v1/chat/completions", [status, delay](const httplib::Request& req, httplib::Response& res) {
            if (delay > 0ms) std::this_thread::sleep_for(delay);
            res.status = status;
            res.set_content(json{{"error", {{"message", "bad key " + req.get_header_value("Authorization")}}}}.dump(),
                            "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~HostileUpstream() {
        server_.stop();
        thread_.join();
    }
    core::ModelConfig model(std::chrono::milliseconds timeout = 2000ms) const {
        core::ModelConfig m;
        m.api_base = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
        m.api_key = kSecret;
        m.max_retries = 1;
        m.timeout = timeout;
        return m;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::unique_ptr<llm::Backend> fast_openai() {
    llm::RetryPolicy p;
    p.sleep = [](std::chrono::milliseconds) {};
    return std::make_unique<llm::OpenAiBackend>(p);
}

}  // namespace

TEST_CASE("health reports the configured model") {
    Harness h(echo());
    const auto r = h.get("/api/health");
    CHECK(r.status == 200);
    CHECK(r.j == json{{"status", "ok"}, {"model", "gpt-4o"}});
}

TEST_CASE("simplify with the echo mock") {
    Harness h(echo());
    const std::string original = fixtures::read("alexnet_abstract_original.txt");

    const auto r = h.post("/api/simplify", {{"text", original}, {"audience", "general_public"}});
    REQUIRE(r.status == 200);
    CHECK(r.j["simplified_text"] == std::string(core::trim(original)));
    CHECK(r.j["audience"] == "general_public");
    CHECK(r.j["model"] == "gpt-4o");
    CHECK(core::JobId::is_valid(r.j["job_id"].get<std::string>()));
    const auto expected = metrics::readability(r.j["simplified_text"].get<std::string>());
    CHECK(r.j["readability"]["fre"].get<double>() == doctest::Approx(expected.fre));
    CHECK(r.j["readability"]["fk_grade"].get<double>() == doctest::Approx(expected.fk_grade));
    CHECK(r.j["latency_ms"].is_number_integer());
    CHECK(h.store().has_job(core::JobId::parse(r.j["job_id"].get<std::string>())));

    SUBCASE("audience defaults to the general public") {
        const auto d = h.post("/api/simplify", {{"text", "Short text here."}});
        CHECK(d.status == 200);
        CHECK(d.j["audience"] == "general_public");
    }
    SUBCASE("audience labels and model override") {
        const auto d = h.post("/api/simplify", {{"text", "Short text."}, {"audience", "Students and Academics"}, {"model", "gpt-4o-mini"}});
        CHECK(d.j["audience"] == "students_academics");
        CHECK(d.j["model"] == "gpt-4o-mini");
    }
    SUBCASE("job ids are unique") {
        std::set<std::string> ids;
        for (int i = 0; i < 20; ++i) ids.insert(h.post("/api/simplify", {{"text", "Same text."}}).j["job_id"].get<std::string>());
        CHECK(ids.size() == 20);
    }
}

TEST_CASE("simplify validation errors") {
    Harness h(echo());
    check_error(h.post("/api/simplify", {{"text", ""}}), 400, "empty_text");
    check_error(h.post("/api/simplify", {{"text", " \n\t "}}), 400, "empty_text");
    check_error(h.post("/api/simplify", json::object()), 400, "empty_text");
    check_error(h.post("/api/simplify", {{"text", std::string(50'001, 'a')}}), 400, "too_long");
    CHECK(h.post("/api/simplify", {{"text", std::string(50'000, 'a')}}).status == 200);
    check_error(h.post("/api/simplify", {{"text", "ok"}, {"audience", "wizards"}}), 400, "unknown_audience");
    check_error(h.post("/api/simplify", {{"text", 42}}), 400, "invalid_request");
    check_error(h.post("/api/simplify", json::array({1, 2})), 400, "invalid_request");
    check_error(h.post_raw("/api/simplify", "{not json"), 400, "invalid_request");
    check_error(h.post_raw("/api/simplify", ""), 400, "invalid_request");
    check_error(h.post("/api/simplify", {{"text", "ok"}, {"model", ""}}), 400, "invalid_request");
}

TEST_CASE("routing errors use the error schema") {
    Harness h(echo());
    check_error(h.get("/api/nope"), 404, "not_found");
    check_error(h.get("/api/simplify"), 405, "method_not_allowed");
    check_error(h.get("/"), 404, "not_found");
}

TEST_CASE("upload extracts text") {
    ServiceConfig config;
    config.max_upload_bytes = 10 * 1024 * 1024;
    Harness h(echo(), config);

    const auto docx = h.upload("hello.docx", fixtures::read("ingest/hello.docx"));
    CHECK(docx.status == 200);
    CHECK(docx.j["text"] == "Hello world");
    CHECK(docx.j["format"] == "docx");
    CHECK(docx.j["warnings"].is_array());

    const auto pdf = h.upload("hello.pdf", fixtures::read("ingest/hello_helvetica.pdf"));
    CHECK(pdf.j["text"] == "Hello world");
    CHECK(pdf.j["format"] == "pdf");

    const auto txt = h.upload("notes.txt", "line one\r\nline two");
    CHECK(txt.j["text"] == "line one\nline two");

    check_error(h.upload("scan.pdf", fixtures::read("ingest/image_only.pdf")), 422, "no_text_content");
    check_error(h.upload("locked.pdf", fixtures::read("ingest/encrypted.pdf")), 422, "encrypted_pdf");
    check_error(h.upload("blob.bin", std::string("\x00\x01\x02\x03", 4)), 400, "unsupported_format");
    check_error(h.upload("empty.txt", ""), 400, "unsupported_format");
    const std::string docx_bytes = fixtures::read("ingest/hello.docx");
    check_error(h.upload("cut.docx", docx_bytes.substr(0, docx_bytes.size() / 2)), 400, "corrupt_file");
    check_error(h.upload("big.txt", std::string(11 * 1024 * 1024, 'a')), 413, "too_large");
    check_error(h.upload("edge.txt", std::string(10 * 1024 * 1024 + 1, 'a')), 413, "too_large");
    CHECK(h.upload("edge.txt", std::string(10 * 1024 * 1024, 'a')).status == 200);

    // Not multipart, or multipart without the field.
    check_error(h.post("/api/upload", {{"file", "x"}}), 400, "invalid_request");
    httplib::MultipartFormDataItems items = {{"other", "x", "a.txt", "text/plain"}};
    check_error(Harness::capture(h.client().Post("/api/upload", items)), 400, "invalid_request");
}

TEST_CASE("expert mode with the scripted mock") {
    auto transcript = std::make_shared<llm::Transcript>();
    const std::string sentence = "The network has 60 million parameters and 650,000 neurons.";
    auto key = [](const prompting::PromptBundle& b) { return llm::transcript_key(b.user_message); };
    transcript->add(key(lib().build_rephrase_prompt(sentence, prompting::ComplexityLevel(1))),
                    {"\"The network has many settings.\""});
    transcript->add(key(lib().build_synonym_prompt("parameters", sentence)), {R"(["settings","values"])"});
    transcript->add(key(lib().build_definition_prompt("neurons", sentence)),
                    {R"({"definition": "Small units that pass signals along."})"});
    transcript->add(key(lib().build_synonym_prompt("network", sentence)), {"no idea", "still prose"});
    transcript->add(key(lib().build_synonym_prompt("neurons", sentence)), {"not json", R"({"synonyms": ["nodes"]})"});
    Harness h(std::make_unique<llm::MockBackend>(llm::MockMode::Scripted, transcript));

    const auto r1 = h.post("/api/expert/rephrase", {{"sentence", sentence}, {"level", 1}});
    CHECK(r1.status == 200);
    CHECK(r1.j["variant"] == "The network has many settings.");
    CHECK(r1.j["level"] == 1);

    check_error(h.post("/api/expert/rephrase", {{"sentence", sentence}, {"level", 4}}), 400, "invalid_level");
    check_error(h.post("/api/expert/rephrase", {{"sentence", sentence}, {"level", 0}}), 400, "invalid_level");
    check_error(h.post("/api/expert/rephrase", {{"sentence", sentence}, {"level", "2"}}), 400, "invalid_level");
    check_error(h.post("/api/expert/rephrase", {{"sentence", sentence}}), 400, "invalid_level");
    check_error(h.post("/api/expert/rephrase", {{"sentence", ""}, {"level", 2}}), 400, "empty_text");
    // Not in the transcript: the scripted mock misses, reported as an upstream failure.
    check_error(h.post("/api/expert/rephrase", {{"sentence", "An unscripted sentence."}, {"level", 2}}), 502, "upstream_error");

    const auto syn = h.post("/api/expert/synonyms", {{"word", "parameters"}, {"sentence", sentence}});
    CHECK(syn.status == 200);
    CHECK(syn.j["synonyms"] == json::array({"settings", "values"}));

    const auto def = h.post("/api/expert/definition", {{"word", "neurons"}, {"sentence", sentence}});
    CHECK(def.status == 200);
    CHECK(def.j["definition"] == "Small units that pass signals along.");

    check_error(h.post("/api/expert/synonyms", {{"word", "gpu"}, {"sentence", "We used CPUs."}}), 400,
                "word_not_in_context");
    check_error(h.post("/api/expert/definition", {{"word", "gpu"}, {"sentence", "We used CPUs."}}), 400,
                "word_not_in_context");
    check_error(h.post("/api/expert/synonyms", {{"word", ""}, {"sentence", sentence}}), 400, "empty_text");
    check_error(h.post("/api/expert/synonyms", {{"word", "network"}, {"sentence", sentence}}), 502,
                "malformed_model_output");

    // One reprompt recovers from a single bad answer.
    const auto retry = h.post("/api/expert/synonyms", {{"word", "neurons"}, {"sentence", sentence}});
    CHECK(retry.status == 200);
    CHECK(retry.j["synonyms"] == json::array({"nodes"}));
}

TEST_CASE("sentence splitting endpoint") {
    Harness h(echo());
    const auto r = h.post("/api/sentences", {{"text", "First one. Second one? Third!"}});
    CHECK(r.status == 200);
    CHECK(r.j["sentences"].size() == 3);
    check_error(h.post("/api/sentences", {{"text", ""}}), 400, "empty_text");

    const auto split = h.get("/api/split?text=" + httplib::detail::encode_query_param("First one. Second one? Third!"));
    CHECK(split.status == 200);
    CHECK(split.j == r.j);
    CHECK(h.post("/api/split", {{"text", "One. Two."}}).j["sentences"].size() == 2);
    check_error(h.get("/api/split"), 400, "invalid_request");
    check_error(h.get("/api/split?text=%20"), 400, "empty_text");
}

TEST_CASE("feedback round trip") {
    Harness h(echo());
    const auto job = h.post("/api/simplify", {{"text", "Rate me."}, {"audience", "journalists"}}).j["job_id"].get<std::string>();

    const auto ok = h.post("/api/feedback", {{"job_id", job}, {"stars", 5}});
    CHECK(ok.status == 204);
    CHECK(ok.body.empty());
    CHECK(h.post("/api/feedback", {{"job_id", job}, {"stars", 3}, {"comment", "second thoughts"}}).status == 204);

    const auto summary = h.get("/api/feedback/summary");
    CHECK(summary.status == 200);
    CHECK(summary.j["count"] == 1);
    CHECK(summary.j["mean_stars"].get<double>() == doctest::Approx(3.0));
    CHECK(summary.j["per_audience"]["journalists_media"]["count"] == 1);
    CHECK(h.get("/api/feedback/summary?audience=general").j["count"] == 0);
    check_error(h.get("/api/feedback/summary?audience=wizards"), 400, "unknown_audience");

    check_error(h.post("/api/feedback", {{"job_id", core::JobId::generate().str()}, {"stars", 3}}), 404, "unknown_job");
    check_error(h.post("/api/feedback", {{"job_id", "not-an-id"}, {"stars", 3}}), 404, "unknown_job");
    check_error(h.post("/api/feedback", {{"job_id", job}, {"stars", 0}}), 400, "invalid_stars");
    check_error(h.post("/api/feedback", {{"job_id", job}, {"stars", 6}}), 400, "invalid_stars");
    check_error(h.post("/api/feedback", {{"job_id", job}, {"stars", "5"}}), 400, "invalid_stars");
    check_error(h.post("/api/feedback", {{"job_id", job}, {"stars", 4.5}}), 400, "invalid_stars");
    check_error(h.post("/api/feedback", {{"job_id", job}, {"stars", 4}, {"comment", std::string(2001, 'x')}}), 400,
                "comment_too_long");
    check_error(h.post("/api/feedback", {{"job_id", job}, {"stars", 4}, {"comment", 7}}), 400, "invalid_request");
}

TEST_CASE("upstream failures map to gateway errors") {
    SUBCASE("server errors") {
        HostileUpstream up(500);
        Harness h(fast_openai(), {}, up.model());
        check_error(h.post("/api/simplify", {{"text", "Some text."}}), 502, "upstream_error");
    }
    SUBCASE("rejected credentials") {
        HostileUpstream up(401);
        Harness h(fast_openai(), {}, up.model());
        const auto r = h.post("/api/simplify", {{"text", "Some text."}});
        check_error(r, 502, "upstream_error");
    }
    SUBCASE("rate limits") {
        HostileUpstream up(429);
        Harness h(fast_openai(), {}, up.model());
        check_error(h.post("/api/expert/definition", {{"word", "text"}, {"sentence", "Some text."}}), 502, "upstream_error");
    }
    SUBCASE("timeouts") {
        HostileUpstream up(200, 1500ms);
        auto model = up.model(300ms);
        model.max_retries = 0;
        Harness h(fast_openai(), {}, model);
        check_error(h.post("/api/simplify", {{"text", "Some text."}}), 504, "timeout");
    }
}

TEST_CASE("16 concurrent simplify requests keep their own outputs") {
    Harness h(echo());
    constexpr int kRequests = 16;
    std::vector<Reply> replies(kRequests);
    std::vector<std::string> failures(kRequests);
    std::vector<std::thread> threads;
    for (int i = 0; i < kRequests; ++i) {
        threads.emplace_back([&, i] {
            const auto k = static_cast<std::size_t>(i);
            try {
                replies[k] = h.post("/api/simplify", {{"text", "Request number " + std::to_string(i) + " says hello."},
                                                      {"audience", core::canonical_label(core::kAllAudiences[k % 5])}});
            } catch (const std::exception& e) {
                failures[k] = e.what();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& f : failures) CHECK_MESSAGE(f.empty(), f);
    std::set<std::string> ids;
    for (int i = 0; i < kRequests; ++i) {
        const auto& r = replies[static_cast<std::size_t>(i)];
        CAPTURE(i);
        REQUIRE(r.status == 200);
        CHECK(r.j["simplified_text"] == "Request number " + std::to_string(i) + " says hello.");
        CHECK(r.j["audience"] == core::canonical_label(core::kAllAudiences[static_cast<std::size_t>(i % 5)]));
        ids.insert(r.j["job_id"].get<std::string>());
    }
    CHECK(ids.size() == kRequests);
}

TEST_CASE("cors headers follow UI_ORIGIN") {
    {
        Harness h(echo());
        const auto r = h.get("/api/health");
        CHECK(r.headers.count("Access-Control-Allow-Origin") == 0);
    }
    ServiceConfig config;
    config.ui_origin = "http://localhost:5173";
    Harness h(echo(), config);
    const auto r = h.get("/api/health");
    CHECK(r.headers.find("Access-Control-Allow-Origin")->second == "http://localhost:5173");
    auto pre = h.client().Options("/api/simplify", {{"Origin", "http://localhost:5173"},
                                                    {"Access-Control-Request-Method", "POST"}});
    REQUIRE(pre);
    CHECK(pre->status == 204);
    CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
    check_error(h.post("/api/simplify", {{"text", ""}}), 400, "empty_text");
}

TEST_CASE("service config from the environment") {
    ::setenv("PORT", "9123", 1);
    ::setenv("UI_ORIGIN", "https://ui.example", 1);
    auto c = ServiceConfig::from_env();
    CHECK(c.port == 9123);
    CHECK(c.ui_origin == "https://ui.example");
    ::setenv("PORT", "eighty", 1);
    CHECK_THROWS_AS(ServiceConfig::from_env(), ApiError);
    ::unsetenv("PORT");
    ::unsetenv("UI_ORIGIN");
    c = ServiceConfig::from_env();
    CHECK(c.port == 8080);
    CHECK_FALSE(c.ui_origin.has_value());
}

TEST_CASE("error codes are a closed, documented set") {
    std::set<std::string_view> labels;
    for (ApiErrorCode c : all_error_codes()) {
        labels.insert(code_label(c));
        CHECK(http_status(c) >= 400);
        CHECK(http_status(c) < 600);
    }
    CHECK(labels.size() == all_error_codes().size());
    for (std::string_view required : {"empty_text", "too_long", "unknown_audience", "upstream_error", "timeout",
                                      "unsupported_format", "corrupt_file", "too_large", "no_text_content",
                                      "encrypted_pdf", "invalid_level", "word_not_in_context", "malformed_model_output",
                                      "unknown_job"}) {
        CHECK(labels.count(required) == 1);
    }
}

// Runs last (doctest orders by file position): every response captured above.
TEST_CASE("no response ever contains the API key") {
    std::lock_guard lock(seen_mutex);
    REQUIRE(seen_responses().size() > 50);
    for (const auto& r : seen_responses()) {
        CHECK(r.find(kSecret) == std::string::npos);
        CHECK(r.find("DO-NOT-LEAK") == std::string::npos);
    }
}
