#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "doctest.h"
#include "plainlang/llm/gateway.hpp"
#include "plainlang/metrics/metrics.hpp"

using namespace plainlang;
using namespace plainlang::llm;
using namespace std::chrono_literals;

namespace {

LlmErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const LlmError& e) {
        return e.kind();
    }
    FAIL("expected LlmError");
    return LlmErrorKind::InvalidConfig;
}

const prompting::PromptLibrary& lib() {
    static const auto l = prompting::PromptLibrary::embedded();
    return l;
}

std::string ok_body(const std::string& text) {
    return nlohmann::json{{"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", text}}}}}},
                          {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 7}}}}
        .dump();
}

// Chat-completions stub that answers with a scripted sequence of statuses.
class StubServer {
public:
    explicit StubServer(std::vector<int> statuses, std::chrono::milliseconds delay = 0ms)
        : statuses_(std::move(statuses)), delay_(delay) {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            const int i = hits_.fetch_add(1);
            {
                std::lock_guard lock(mutex_);
                last_body_ = req.body;
                last_auth_ = req.get_header_value("Authorization");
            }
            if (delay_ > 0ms) std::this_thread::sleep_for(delay_);
            const int status = statuses_[std::min<std::size_t>(i, statuses_.size() - 1)];
            res.status = status;
            if (status == 200) {
                res.set_content(ok_body("reply " + std::to_string(i)), "application/json");
            } else if (status == 299) {
                res.status = 200;
                res.set_content("not json", "text/plain");
            } else {
                res.set_content(R"({"error":{"message":"stub"}})", "application/json");
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    core::ModelConfig config(int max_retries = 3) const {
        core::ModelConfig c;
        c.api_base = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
        c.api_key = "sk-test-secret";
        c.model_name = "stub-model";
        c.max_retries = max_retries;
        c.timeout = 2000ms;
        return c;
    }
    int hits() const { return hits_.load(); }
    nlohmann::json last_body() const {
        std::lock_guard lock(mutex_);
        return nlohmann::json::parse(last_body_);
    }
    std::string last_auth() const {
        std::lock_guard lock(mutex_);
        return last_auth_;
    }

private:
    httplib::Server server_;
    std::vector<int> statuses_;
    std::chrono::milliseconds delay_;
    std::atomic<int> hits_{0};
    int port_ = 0;
    std::thread thread_;
    mutable std::mutex mutex_;
    std::string last_body_;
    std::string last_auth_;
};

struct SleepLog {
    std::shared_ptr<std::vector<std::chrono::milliseconds>> waits = std::make_shared<std::vector<std::chrono::milliseconds>>();
    RetryPolicy policy() const {
        RetryPolicy p;
        p.seed = 7;
        p.sleep = [w = waits](std::chrono::milliseconds d) { w->push_back(d); };
        return p;
    }
};

CompletionRequest simplify_request(const core::ModelConfig& cfg, const std::string& text = "abc def") {
    return {lib().build_simplify_prompt(text), cfg};
}

}  // namespace

TEST_CASE("429 twice then 200 succeeds with two retries") {
    StubServer stub({429, 429, 200});
    SleepLog log;
    OpenAiBackend backend(log.policy());
    const auto res = backend.complete(simplify_request(stub.config()));
    CHECK(res.text == "reply 2");
    CHECK(res.attempts == 3);
    CHECK(stub.hits() == 3);
    CHECK(res.prompt_tokens == 11);
    CHECK(res.completion_tokens == 7);
    REQUIRE(log.waits->size() == 2);
    CHECK((*log.waits)[0] <= 1000ms);
    CHECK((*log.waits)[1] <= 2000ms);
}

TEST_CASE("401 and 403 fail without retry") {
    for (int status : {401, 403}) {
        StubServer stub({status, 200});
        SleepLog log;
        OpenAiBackend backend(log.policy());
        CHECK(kind_of([&] { backend.complete(simplify_request(stub.config())); }) == LlmErrorKind::AuthFailed);
        CHECK(stub.hits() == 1);
        CHECK(log.waits->empty());
    }
}

TEST_CASE("attempts never exceed max_retries + 1") {
    for (int retries : {0, 1, 3}) {
        StubServer stub({503});
        SleepLog log;
        OpenAiBackend backend(log.policy());
        CHECK(kind_of([&] { backend.complete(simplify_request(stub.config(retries))); }) ==
              LlmErrorKind::UpstreamError);
        CHECK(stub.hits() == retries + 1);
        CHECK(static_cast<int>(log.waits->size()) == retries);
    }
    StubServer limited({429});
    SleepLog log;
    OpenAiBackend backend(log.policy());
    CHECK(kind_of([&] { backend.complete(simplify_request(limited.config(2))); }) == LlmErrorKind::RateLimited);
    CHECK(limited.hits() == 3);
}

TEST_CASE("other client errors are not retried") {
    StubServer stub({400, 200});
    SleepLog log;
    OpenAiBackend backend(log.policy());
    CHECK(kind_of([&] { backend.complete(simplify_request(stub.config())); }) == LlmErrorKind::UpstreamError);
    CHECK(stub.hits() == 1);
}

TEST_CASE("malformed success bodies are reported") {
    StubServer stub({299});
    SleepLog log;
    OpenAiBackend backend(log.policy());
    CHECK(kind_of([&] { backend.complete(simplify_request(stub.config())); }) == LlmErrorKind::MalformedResponse);
    CHECK(kind_of([] { parse_chat_response(R"({"choices": []})"); }) == LlmErrorKind::MalformedResponse);
    CHECK(kind_of([] { parse_chat_response(R"({"choices": [{"message": {"content": 3}}]})"); }) ==
          LlmErrorKind::MalformedResponse);
    CHECK(parse_chat_response(R"({"choices": [{"message": {"content": null}}]})").text.empty());
    CHECK(parse_chat_response(R"({"choices": [{"message": {"content": ""}}]})").text.empty());
}

TEST_CASE("requests use the chat-completions wire format") {
    StubServer stub({200});
    SleepLog log;
    OpenAiBackend backend(log.policy());
    const auto req = simplify_request(stub.config(), "Some text.");
    backend.complete(req);
    const auto body = stub.last_body();
    CHECK(stub.last_auth() == "Bearer sk-test-secret");
    CHECK(body["model"] == "stub-model");
    CHECK(body["messages"].size() == 2);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == req.bundle.system_message);
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["messages"][1]["content"] == req.bundle.user_message);
    CHECK(body["temperature"] == req.bundle.temperature);
    CHECK(body["max_tokens"] == req.bundle.max_output_tokens);
}

TEST_CASE("slow upstreams time out") {
    StubServer stub({200}, 1500ms);
    SleepLog log;
    OpenAiBackend backend(log.policy());
    auto cfg = stub.config(0);
    cfg.timeout = 300ms;
    CHECK(kind_of([&] { backend.complete(simplify_request(cfg)); }) == LlmErrorKind::Timeout);
}

TEST_CASE("unreachable upstreams are retried and reported") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    core::ModelConfig cfg;
    cfg.api_base = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    cfg.max_retries = 2;
    cfg.timeout = 1000ms;
    SleepLog log;
    OpenAiBackend backend(log.policy());
    const auto kind = kind_of([&] { backend.complete(simplify_request(cfg)); });
    CHECK((kind == LlmErrorKind::UpstreamError || kind == LlmErrorKind::Timeout));
    CHECK(log.waits->size() == 2);
}

TEST_CASE("backoff windows grow by the factor") {
    RetryPolicy p;
    CHECK(p.ceiling(0) == 1000ms);
    CHECK(p.ceiling(1) == 2000ms);
    CHECK(p.ceiling(2) == 4000ms);
    CHECK(p.ceiling(10) == 30'000ms);
}

TEST_CASE("echo_source returns the delimited source verbatim") {
    MockBackend mock(MockMode::EchoSource);
    CHECK(mock.complete({lib().build_simplify_prompt("abc def"), {}}).text == "abc def");
    const std::string tricky = "line one\n<<<END_SOURCE_TEXT>>>\n  spaced  ";
    CHECK(mock.complete({lib().build_simplify_prompt(tricky), {}}).text == tricky);
    CHECK(mock.complete({prompting::PromptBundle{"sys", "no markers", 0.3, 10}, {}}).text == "no markers");
}

TEST_CASE("title_case capitalizes each word") {
    MockBackend mock(MockMode::TitleCase);
    CHECK(mock.complete({lib().build_simplify_prompt("abc def"), {}}).text == "Abc Def");
    CHECK(title_case("über  élan\tx") == "Über  Élan\tX");
    CHECK(title_case("") == "");
    CHECK(title_case("1st (quoted)") == "1st (quoted)");
}

TEST_CASE("scripted mocks replay transcripts") {
    MockBackend empty(MockMode::Scripted);
    CHECK(kind_of([&] { empty.complete({lib().build_simplify_prompt("abc"), {}}); }) == LlmErrorKind::ScriptMiss);

    const auto bundle = lib().build_synonym_prompt("parameters", "The network has 60 million parameters.");
    const auto path = std::filesystem::temp_directory_path() / "plainlang_test_transcript.jsonl";
    {
        std::ofstream f(path);
        f << nlohmann::json{{"key", transcript_key(bundle.user_message)}, {"responses", {"[\"settings\"]", "[]"}}}.dump()
          << "\n\n"
          << nlohmann::json{{"user_message", "hello"}, {"response", "hi"}}.dump() << "\n";
    }
    MockBackend scripted(MockMode::Scripted, Transcript::load(path));
    CHECK(scripted.complete({bundle, {}}).text == "[\"settings\"]");
    CHECK(scripted.complete({bundle, {}}).text == "[]");
    CHECK(scripted.complete({bundle, {}}).text == "[]");
    CHECK(scripted.complete({prompting::PromptBundle{"", "hello", 0.2, 5}, {}}).text == "hi");
    std::filesystem::remove(path);

    CHECK(transcript_key("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(kind_of([] { Transcript::load("/nonexistent/transcript.jsonl"); }) == LlmErrorKind::InvalidConfig);
}

TEST_CASE("recorded exchanges replay through a scripted mock") {
    const auto path = std::filesystem::temp_directory_path() / "plainlang_test_recording.jsonl";
    std::filesystem::remove(path);
    RecordingBackend rec(std::make_unique<MockBackend>(MockMode::TitleCase), path);
    const auto bundle = lib().build_simplify_prompt("record me");
    CHECK(rec.complete({bundle, {}}).text == "Record Me");
    MockBackend replay(MockMode::Scripted, Transcript::load(path));
    CHECK(replay.complete({bundle, {}}).text == "Record Me");
    std::filesystem::remove(path);
}

TEST_CASE("mock modes parse from labels") {
    CHECK(mock_mode_from_string("echo_source") == MockMode::EchoSource);
    CHECK(mock_mode_from_string(" TITLE_CASE ") == MockMode::TitleCase);
    CHECK(mock_mode_from_string("scripted") == MockMode::Scripted);
    CHECK(kind_of([] { mock_mode_from_string("echo"); }) == LlmErrorKind::InvalidConfig);
}

namespace {

class SlowBackend final : public Backend {
public:
    CompletionResponse complete(const CompletionRequest& request) override {
        const int now = ++active_;
        int seen = max_seen_.load();
        while (now > seen && !max_seen_.compare_exchange_weak(seen, now)) {}
        std::this_thread::sleep_for(15ms);
        --active_;
        return {request.bundle.user_message, 0, 0, 0ms, 1};
    }
    std::string name() const override { return "slow"; }
    int max_seen() const { return max_seen_.load(); }

private:
    std::atomic<int> active_{0};
    std::atomic<int> max_seen_{0};
};

}  // namespace

TEST_CASE("in-flight requests never exceed the cap") {
    auto backend = std::make_unique<SlowBackend>();
    const SlowBackend* raw = backend.get();
    Gateway gw(std::move(backend), core::ModelConfig{}, 4);
    std::vector<std::thread> threads;
    std::atomic<int> mismatches{0};
    for (int t = 0; t < 16; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 5; ++i) {
                const std::string msg = "t" + std::to_string(t) + "-" + std::to_string(i);
                if (gw.complete(prompting::PromptBundle{"", msg, 0.3, 1}).text != msg) ++mismatches;
            }
        });
    }
    for (auto& th : threads) th.join();
    CHECK(mismatches.load() == 0);
    CHECK(raw->max_seen() <= 4);
    CHECK(gw.peak_in_flight() <= 4);
    CHECK(gw.peak_in_flight() >= 2);
    CHECK_THROWS_AS(Gateway(std::make_unique<SlowBackend>(), core::ModelConfig{}, 0), LlmError);
}

TEST_CASE("gateway reads its backend from the environment") {
    ::setenv("MOCK_MODE", "title_case", 1);
    ::setenv("LLM_MODEL", "env-model", 1);
    const auto gw = Gateway::from_env();
    CHECK(gw->backend_name() == "mock:title_case");
    CHECK(gw->model().model_name == "env-model");
    CHECK(gw->complete(lib().build_simplify_prompt("from env")).text == "From Env");

    ::setenv("MOCK_MODE", "scripted", 1);
    ::unsetenv("MOCK_TRANSCRIPT");
    CHECK(kind_of([] { Gateway::from_env(); }) == LlmErrorKind::InvalidConfig);
    ::unsetenv("MOCK_MODE");
    ::unsetenv("LLM_MODEL");
}

TEST_CASE("echo pipeline leaves BLEU unchanged") {
    MockBackend mock(MockMode::EchoSource);
    std::mt19937 rng(5);
    const std::vector<std::string> words = {"the", "cat", "sat", "on", "mat", "Dog", "runs", ".", ",", "é"};
    for (int i = 0; i < 500; ++i) {
        std::string src, ref;
        for (int k = 1 + static_cast<int>(rng() % 12); k > 0; --k) src += words[rng() % words.size()] + " ";
        for (int k = 1 + static_cast<int>(rng() % 12); k > 0; --k) ref += words[rng() % words.size()] + " ";
        const auto out = mock.complete({lib().build_simplify_prompt(src), {}}).text;
        REQUIRE(out == src);
        REQUIRE(metrics::bleu(text::tokenize(out), text::tokenize(ref)) ==
                metrics::bleu(text::tokenize(src), text::tokenize(ref)));
    }
}
