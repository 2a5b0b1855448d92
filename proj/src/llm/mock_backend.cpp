#include <openssl/evp.h>

#include <fstream>

#include "plainlang/core/strings.hpp"
#include "plainlang/llm/gateway.hpp"
#include "plainlang/text/unicode.hpp"

namespace plainlang::llm {

MockMode mock_mode_from_string(std::string_view label) {
    const std::string l = core::ascii_lower(core::trim(label));
    if (l == "echo_source") return MockMode::EchoSource;
    if (l == "title_case") return MockMode::TitleCase;
    if (l == "scripted") return MockMode::Scripted;
    throw LlmError(LlmErrorKind::InvalidConfig, "unknown mock mode '" + std::string(label) + "'");
}

std::string_view to_string(MockMode mode) noexcept {
    switch (mode) {
        case MockMode::EchoSource: return "echo_source";
        case MockMode::TitleCase: return "title_case";
        case MockMode::Scripted: return "scripted";
    }
    return "unknown";
}

std::string transcript_key(std::string_view user_message) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(user_message.data(), user_message.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

std::shared_ptr<Transcript> Transcript::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LlmError(LlmErrorKind::InvalidConfig, "cannot read transcript " + path.string());
    auto t = std::make_shared<Transcript>();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (core::trim(line).empty()) continue;
        const auto fail = [&](const std::string& why) {
            return LlmError(LlmErrorKind::InvalidConfig,
                            path.string() + ":" + std::to_string(line_no) + ": " + why);
        };
        const auto obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) throw fail("not a JSON object");

        std::string key;
        if (obj.contains("key") && obj["key"].is_string()) {
            key = obj["key"].get<std::string>();
        } else if (obj.contains("user_message") && obj["user_message"].is_string()) {
            key = transcript_key(obj["user_message"].get<std::string>());
        } else {
            throw fail("missing key");
        }

        std::vector<std::string> responses;
        if (obj.contains("responses") && obj["responses"].is_array()) {
            for (const auto& r : obj["responses"]) {
                if (!r.is_string()) throw fail("responses must be strings");
                responses.push_back(r.get<std::string>());
            }
        } else if (obj.contains("response") && obj["response"].is_string()) {
            responses.push_back(obj["response"].get<std::string>());
        }
        if (responses.empty()) throw fail("no response");
        t->add(std::move(key), std::move(responses));
    }
    return t;
}

void Transcript::add(std::string key, std::vector<std::string> responses) {
    std::lock_guard lock(mutex_);
    auto& entry = entries_[std::move(key)];
    for (auto& r : responses) entry.responses.push_back(std::move(r));
}

std::string Transcript::next(const std::string& key) {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end() || it->second.responses.empty()) {
        throw LlmError(LlmErrorKind::ScriptMiss, "no scripted response for key " + key);
    }
    auto& e = it->second;
    const std::size_t i = std::min(e.cursor, e.responses.size() - 1);
    if (e.cursor < e.responses.size()) ++e.cursor;
    return e.responses[i];
}

bool Transcript::empty() const {
    std::lock_guard lock(mutex_);
    return entries_.empty();
}

std::string title_case(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool at_word_start = true;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t start = pos;
        const char32_t cp = text::next_code_point(text, pos);
        if (text::is_whitespace(cp)) {
            at_word_start = true;
            out.append(text.substr(start, pos - start));
            continue;
        }
        if (at_word_start && cp != text::kReplacementChar) {
            text::append_utf8(out, text::to_upper(cp));
        } else {
            out.append(text.substr(start, pos - start));
        }
        at_word_start = false;
    }
    return out;
}

MockBackend::MockBackend(MockMode mode, std::shared_ptr<Transcript> transcript)
    : mode_(mode), transcript_(std::move(transcript)) {
    if (!transcript_) transcript_ = std::make_shared<Transcript>();
}

std::string MockBackend::name() const { return "mock:" + std::string(to_string(mode_)); }

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
    const auto& user = request.bundle.user_message;
    CompletionResponse out;
    switch (mode_) {
        case MockMode::EchoSource:
            out.text = prompting::extract_delimited_source(user).value_or(user);
            break;
        case MockMode::TitleCase:
            out.text = title_case(prompting::extract_delimited_source(user).value_or(user));
            break;
        case MockMode::Scripted:
            out.text = transcript_->next(transcript_key(user));
            break;
    }
    out.prompt_tokens =
        prompting::estimate_tokens(request.bundle.system_message) + prompting::estimate_tokens(user);
    out.completion_tokens = prompting::estimate_tokens(out.text);
    return out;
}

RecordingBackend::RecordingBackend(std::unique_ptr<Backend> inner, std::filesystem::path path)
    : inner_(std::move(inner)), path_(std::move(path)) {}

CompletionResponse RecordingBackend::complete(const CompletionRequest& request) {
    CompletionResponse out = inner_->complete(request);
    const nlohmann::json line = {
        {"key", transcript_key(request.bundle.user_message)},
        {"user_message", request.bundle.user_message},
        {"response", out.text},
    };
    std::lock_guard lock(mutex_);
    std::ofstream f(path_, std::ios::binary | std::ios::app);
    f << line.dump() << '\n';
    return out;
}

}  // namespace plainlang::llm
