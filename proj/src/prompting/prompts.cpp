#include "plainlang/prompting/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embedded_prompts.hpp"
#include "plainlang/core/strings.hpp"
#include "plainlang/text/unicode.hpp"

namespace plainlang::prompting {

namespace {

constexpr std::string_view kOpenMarker = "<<<SOURCE_TEXT";
constexpr std::string_view kCloseMarker = "<<<END_SOURCE_TEXT";

constexpr double kSimplifyTemperature = 0.3;
constexpr double kRephraseTemperature = 0.4;
constexpr double kExpertJsonTemperature = 0.2;

struct PromptSpec {
    std::string_view name;
    std::set<std::string> allowed;
    std::set<std::string> required;
};

const std::vector<PromptSpec>& prompt_specs() {
    static const std::vector<PromptSpec> specs = {
        {"simplify", {"audience_block", "text"}, {"audience_block", "text"}},
        {"rephrase", {"level", "sentence"}, {"level", "sentence"}},
        {"synonyms", {"word", "sentence"}, {"word", "sentence"}},
        {"definition", {"word", "sentence"}, {"word", "sentence"}},
    };
    return specs;
}

PromptError template_error(const std::string& msg) {
    return PromptError(PromptErrorKind::TemplateError, msg);
}

std::string without_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

// Splits a .prompt file into its @@system and @@user sections. Lines before
// the first section marker are comments.
std::pair<std::string, std::string> split_sections(const std::string& name, std::string_view content) {
    std::string system;
    std::string user;
    std::string* current = nullptr;
    bool seen_system = false;
    bool seen_user = false;
    for (const auto& raw : core::split(content, '\n')) {
        std::string line = raw;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "@@system") {
            if (seen_system) throw template_error(name + ": duplicate @@system section");
            seen_system = true;
            current = &system;
            continue;
        }
        if (line == "@@user") {
            if (seen_user) throw template_error(name + ": duplicate @@user section");
            seen_user = true;
            current = &user;
            continue;
        }
        if (current != nullptr) {
            current->append(line);
            current->push_back('\n');
        }
    }
    system = without_trailing_newlines(std::move(system));
    user = without_trailing_newlines(std::move(user));
    if (core::trim(system).empty() || core::trim(user).empty()) {
        throw template_error(name + ": needs non-empty @@system and @@user sections");
    }
    return {system, user};
}

std::string require_trimmed(std::string_view s, const char* what) {
    const auto t = core::trim(s);
    if (t.empty()) throw PromptError(PromptErrorKind::EmptyText, std::string(what) + " is empty");
    return std::string(t);
}

std::string strip_code_fence(std::string_view s) {
    auto t = core::trim(s);
    if (t.substr(0, 3) == "```") {
        const auto first_newline = t.find('\n');
        const auto last_fence = t.rfind("```");
        if (first_newline != std::string_view::npos && last_fence > first_newline) {
            t = core::trim(t.substr(first_newline + 1, last_fence - first_newline - 1));
        }
    }
    return std::string(t);
}

std::optional<nlohmann::json> parse_json_answer(std::string_view output, char open, char close) {
    const std::string body = strip_code_fence(output);
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (!j.is_discarded()) return j;
    // Tolerate prose around a single JSON value.
    const auto a = body.find(open);
    const auto b = body.rfind(close);
    if (a == std::string::npos || b == std::string::npos || b <= a) return std::nullopt;
    j = nlohmann::json::parse(body.substr(a, b - a + 1), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

PromptError malformed(const std::string& msg) { return PromptError(PromptErrorKind::MalformedOutput, msg); }

bool is_word_char(char32_t cp) { return !text::is_whitespace(cp) && !text::is_punctuation(cp); }

}  // namespace

ComplexityLevel::ComplexityLevel(int level) : level_(level) {
    if (level < 1 || level > 3) {
        throw PromptError(PromptErrorKind::InvalidLevel,
                          "complexity level must be 1, 2 or 3, got " + std::to_string(level));
    }
}

Template::Template(std::string_view source) {
    std::size_t pos = 0;
    std::string literal;
    while (pos < source.size()) {
        const auto open = source.find("{{", pos);
        if (open == std::string_view::npos) {
            literal.append(source.substr(pos));
            break;
        }
        literal.append(source.substr(pos, open - pos));
        const auto close = source.find("}}", open + 2);
        if (close == std::string_view::npos) throw template_error("unterminated placeholder");
        const std::string name(source.substr(open + 2, close - open - 2));
        const bool valid = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
            return (c >= 'a' && c <= 'z') || c == '_';
        });
        if (!valid) throw template_error("malformed placeholder '{{" + name + "}}'");
        if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
        literal.clear();
        pieces_.push_back({true, name});
        names_.insert(name);
        pos = close + 2;
    }
    if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
}

std::string Template::render(const std::map<std::string, std::string>& values) const {
    std::string out;
    for (const auto& p : pieces_) {
        if (!p.is_placeholder) {
            out += p.text;
            continue;
        }
        const auto it = values.find(p.text);
        if (it == values.end()) throw template_error("no value for placeholder '" + p.text + "'");
        out += it->second;
    }
    return out;
}

std::string delimit_source(std::string_view text) {
    std::string suffix;
    auto occurs = [&](std::string_view marker) {
        return text.find(std::string(marker) + suffix + ">>>") != std::string_view::npos;
    };
    for (int k = 1; occurs(kOpenMarker) || occurs(kCloseMarker); ++k) suffix = "_" + std::to_string(k);
    std::string out;
    out.reserve(text.size() + 64);
    out.append(kOpenMarker).append(suffix).append(">>>\n");
    out.append(text);
    out.append("\n").append(kCloseMarker).append(suffix).append(">>>");
    return out;
}

std::optional<std::string> extract_delimited_source(std::string_view message) {
    std::size_t search = 0;
    while (true) {
        const auto open = message.find(kOpenMarker, search);
        if (open == std::string_view::npos) return std::nullopt;
        std::size_t p = open + kOpenMarker.size();
        std::string suffix;
        if (p < message.size() && message[p] == '_') {
            std::size_t q = p + 1;
            while (q < message.size() && message[q] >= '0' && message[q] <= '9') ++q;
            if (q > p + 1) {
                suffix = std::string(message.substr(p, q - p));
                p = q;
            }
        }
        if (message.substr(p, 4) != ">>>\n") {
            search = open + 1;
            continue;
        }
        const std::size_t body = p + 4;
        const std::string close = "\n" + std::string(kCloseMarker) + suffix + ">>>";
        const auto end = message.find(close, body);
        if (end == std::string_view::npos) return std::nullopt;
        return std::string(message.substr(body, end - body));
    }
}

std::vector<std::string> parse_synonyms(std::string_view model_output) {
    auto j = parse_json_answer(model_output, '[', ']');
    if (!j) throw malformed("synonyms answer is not JSON");
    if (j->is_object() && j->contains("synonyms")) j = (*j)["synonyms"];
    if (!j->is_array()) throw malformed("synonyms answer is not a JSON array");
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& item : *j) {
        if (!item.is_string()) throw malformed("synonyms array contains a non-string");
        std::string s(core::trim(item.get<std::string>()));
        if (s.empty()) continue;
        if (!seen.insert(text::fold_case(s)).second) continue;
        out.push_back(std::move(s));
        if (out.size() == 5) break;
    }
    return out;
}

std::string parse_definition(std::string_view model_output) {
    auto j = parse_json_answer(model_output, '{', '}');
    if (!j) throw malformed("definition answer is not JSON");
    std::string def;
    if (j->is_object() && j->contains("definition") && (*j)["definition"].is_string()) {
        def = (*j)["definition"].get<std::string>();
    } else if (j->is_string()) {
        def = j->get<std::string>();
    } else {
        throw malformed("definition answer lacks a 'definition' string");
    }
    def = std::string(core::trim(def));
    if (def.empty()) throw malformed("definition is empty");
    return def;
}

std::string clean_rephrase(std::string_view model_output) {
    std::string_view t = core::trim(model_output);
    for (std::string_view q : {"\"", "'", "“"}) {
        const std::string_view closing = q == "“" ? std::string_view("”") : q;
        if (t.size() >= q.size() + closing.size() && t.substr(0, q.size()) == q &&
            t.substr(t.size() - closing.size()) == closing) {
            t = core::trim(t.substr(q.size(), t.size() - q.size() - closing.size()));
            break;
        }
    }
    if (t.empty()) throw malformed("rephrase answer is empty");
    return std::string(t);
}

bool word_in_context(std::string_view word, std::string_view sentence) {
    const std::string w = text::fold_case(core::trim(word));
    const std::string s = text::fold_case(sentence);
    if (w.empty()) return false;
    for (auto pos = s.find(w); pos != std::string::npos; pos = s.find(w, pos + 1)) {
        bool left_ok = true;
        if (pos > 0) {
            std::size_t start = pos - 1;
            while (start > 0 && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) --start;
            std::size_t p = start;
            left_ok = !is_word_char(text::next_code_point(s, p));
        }
        bool right_ok = true;
        if (pos + w.size() < s.size()) {
            std::size_t p = pos + w.size();
            right_ok = !is_word_char(text::next_code_point(s, p));
        }
        if (left_ok && right_ok) return true;
    }
    return false;
}

int estimate_tokens(std::string_view text) {
    return static_cast<int>((text.size() + 3) / 4);
}

PromptLibrary PromptLibrary::embedded() {
    std::map<std::string, std::string> files;
    for (const auto& f : detail::embedded_files()) files.emplace(f.path, f.content);
    return from_files(files, std::string(detail::kEmbeddedVersion));
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
    std::map<std::string, std::string> files;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw template_error("prompt directory '" + dir.string() + "' does not exist");
    }
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        files.emplace(std::filesystem::relative(entry.path(), dir).generic_string(), buf.str());
    }
    return from_files(files, dir.filename().string());
}

PromptLibrary PromptLibrary::from_files(const std::map<std::string, std::string>& files,
                                        std::string version) {
    PromptLibrary lib;
    lib.version_ = std::move(version);
    auto file = [&](const std::string& path) -> const std::string& {
        const auto it = files.find(path);
        if (it == files.end()) throw template_error("missing template file '" + path + "'");
        return it->second;
    };

    for (const auto& spec : prompt_specs()) {
        const std::string name(spec.name);
        auto [sys_src, user_src] = split_sections(name, file(name + ".prompt"));
        Template sys(sys_src);
        Template user(user_src);
        std::set<std::string> used = sys.placeholders();
        used.insert(user.placeholders().begin(), user.placeholders().end());
        for (const auto& p : used) {
            if (!spec.allowed.count(p)) throw template_error(name + ": unknown placeholder '" + p + "'");
        }
        for (const auto& p : spec.required) {
            if (!used.count(p)) throw template_error(name + ": missing placeholder '" + p + "'");
        }
        lib.prompts_.emplace(name, Prompt{std::move(sys), std::move(user)});
    }
    for (core::Audience a : core::kAllAudiences) {
        const auto block = without_trailing_newlines(
            file("audiences/" + std::string(core::canonical_label(a)) + ".txt"));
        if (core::trim(block).empty()) throw template_error("empty audience block");
        lib.audiences_.emplace(a, block);
    }
    for (int level = 1; level <= 3; ++level) {
        const auto desc = without_trailing_newlines(file("levels/level_" + std::to_string(level) + ".txt"));
        if (core::trim(desc).empty()) throw template_error("empty level descriptor");
        lib.levels_.emplace(level, desc);
    }
    return lib;
}

const std::string& PromptLibrary::audience_block(core::Audience audience) const {
    return audiences_.at(audience);
}

const PromptLibrary::Prompt& PromptLibrary::prompt(const std::string& name) const {
    return prompts_.at(name);
}

PromptBundle PromptLibrary::build_simplify_prompt(std::string_view text, core::Audience audience) const {
    if (core::trim(text).empty()) throw PromptError(PromptErrorKind::EmptyText, "text is empty");
    const std::map<std::string, std::string> values = {
        {"audience_block", audience_block(audience)},
        {"text", delimit_source(text)},
    };
    const auto& p = prompt("simplify");
    return {p.system.render(values), p.user.render(values), kSimplifyTemperature,
            2 * estimate_tokens(text) + 256};
}

PromptBundle PromptLibrary::build_rephrase_prompt(std::string_view sentence, ComplexityLevel level) const {
    const std::string s = require_trimmed(sentence, "sentence");
    const std::map<std::string, std::string> values = {
        {"level", levels_.at(level.value())},
        {"sentence", delimit_source(s)},
    };
    const auto& p = prompt("rephrase");
    return {p.system.render(values), p.user.render(values), kRephraseTemperature,
            2 * estimate_tokens(s) + 128};
}

PromptBundle PromptLibrary::build_synonym_prompt(std::string_view word, std::string_view context_sentence) const {
    const std::string w = require_trimmed(word, "word");
    const std::string s = require_trimmed(context_sentence, "sentence");
    if (!word_in_context(w, s)) {
        throw PromptError(PromptErrorKind::WordNotInContext, "'" + w + "' does not occur in the sentence");
    }
    const std::map<std::string, std::string> values = {{"word", w}, {"sentence", delimit_source(s)}};
    const auto& p = prompt("synonyms");
    return {p.system.render(values), p.user.render(values), kExpertJsonTemperature, 200};
}

PromptBundle PromptLibrary::build_definition_prompt(std::string_view word,
                                                    std::string_view context_sentence) const {
    const std::string w = require_trimmed(word, "word");
    const std::string s = require_trimmed(context_sentence, "sentence");
    if (!word_in_context(w, s)) {
        throw PromptError(PromptErrorKind::WordNotInContext, "'" + w + "' does not occur in the sentence");
    }
    const std::map<std::string, std::string> values = {{"word", w}, {"sentence", delimit_source(s)}};
    const auto& p = prompt("definition");
    return {p.system.render(values), p.user.render(values), kExpertJsonTemperature, 150};
}

}  // namespace plainlang::prompting
