#include "plainlang/llm/gateway.hpp"

#include <cstdlib>

#include "plainlang/core/strings.hpp"

namespace plainlang::llm {

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || core::trim(v).empty()) return std::nullopt;
    return std::string(core::trim(v));
}

// Holds one in-flight slot for the lifetime of a call.
class SlotGuard {
public:
    SlotGuard(std::mutex& m, std::condition_variable& cv, int& in_flight, int& peak, int cap)
        : m_(m), cv_(cv), in_flight_(in_flight) {
        std::unique_lock lock(m_);
        cv_.wait(lock, [&] { return in_flight_ < cap; });
        ++in_flight_;
        peak = std::max(peak, in_flight_);
    }
    ~SlotGuard() {
        {
            std::lock_guard lock(m_);
            --in_flight_;
        }
        cv_.notify_one();
    }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::mutex& m_;
    std::condition_variable& cv_;
    int& in_flight_;
};

}  // namespace

Gateway::Gateway(std::unique_ptr<Backend> backend, core::ModelConfig model, int max_in_flight)
    : backend_(std::move(backend)), model_(std::move(model)), max_in_flight_(max_in_flight) {
    if (!backend_) throw LlmError(LlmErrorKind::InvalidConfig, "gateway needs a backend");
    if (max_in_flight_ < 1) throw LlmError(LlmErrorKind::InvalidConfig, "max_in_flight must be at least 1");
}

std::unique_ptr<Gateway> Gateway::from_env() {
    core::ModelConfig model = core::ModelConfig::from_env();
    int cap = kDefaultMaxInFlight;
    if (auto v = env("LLM_MAX_IN_FLIGHT")) {
        try {
            cap = std::stoi(*v);
        } catch (const std::exception&) {
            throw LlmError(LlmErrorKind::InvalidConfig, "LLM_MAX_IN_FLIGHT is not an integer");
        }
    }

    std::unique_ptr<Backend> backend;
    auto mode = env("MOCK_MODE");
    if (mode && core::ascii_lower(*mode) == "off") mode.reset();
    if (mode) {
        const MockMode m = mock_mode_from_string(*mode);
        std::shared_ptr<Transcript> transcript;
        if (auto path = env("MOCK_TRANSCRIPT")) {
            transcript = Transcript::load(*path);
        } else if (m == MockMode::Scripted) {
            throw LlmError(LlmErrorKind::InvalidConfig, "MOCK_MODE=scripted needs MOCK_TRANSCRIPT");
        }
        backend = std::make_unique<MockBackend>(m, std::move(transcript));
    } else {
        model.validate();
        backend = std::make_unique<OpenAiBackend>();
    }
    if (auto rec = env("LLM_RECORD_TRANSCRIPT")) {
        backend = std::make_unique<RecordingBackend>(std::move(backend), *rec);
    }
    return std::make_unique<Gateway>(std::move(backend), std::move(model), cap);
}

CompletionResponse Gateway::complete(const prompting::PromptBundle& bundle) {
    return complete(CompletionRequest{bundle, model_});
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
    SlotGuard slot(mutex_, slot_free_, in_flight_, peak_, max_in_flight_);
    const auto started = std::chrono::steady_clock::now();
    CompletionResponse out = backend_->complete(request);
    if (out.latency.count() == 0) {
        out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    }
    return out;
}

int Gateway::peak_in_flight() const {
    std::lock_guard lock(mutex_);
    return peak_;
}

}  // namespace plainlang::llm
