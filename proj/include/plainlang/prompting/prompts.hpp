#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "plainlang/core/error.hpp"
#include "plainlang/core/types.hpp"

namespace plainlang::prompting {

enum class PromptErrorKind { EmptyText, WordNotInContext, InvalidLevel, TemplateError, MalformedOutput };
using PromptError = CodedError<PromptErrorKind>;

struct PromptBundle {
    std::string system_message;
    std::string user_message;
    double temperature = 0.3;
    int max_output_tokens = 256;

    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

/// Rephrase register: 1 is the simplest, 3 stays near the original.
class ComplexityLevel {
public:
    /// Throws PromptError{InvalidLevel} outside 1..3.
    explicit ComplexityLevel(int level);
    int value() const noexcept { return level_; }

private:
    int level_;
};

/// A text with `{{name}}` placeholders, parsed once.
class Template {
public:
    /// Throws PromptError{TemplateError} on an unterminated or malformed placeholder.
    explicit Template(std::string_view source);

    const std::set<std::string>& placeholders() const noexcept { return names_; }

    /// Single pass: substituted values are never re-expanded. Throws
    /// PromptError{TemplateError} when a placeholder has no value.
    std::string render(const std::map<std::string, std::string>& values) const;

private:
    struct Piece {
        bool is_placeholder;
        std::string text;
    };
    std::vector<Piece> pieces_;
    std::set<std::string> names_;
};

/// Wraps text in SOURCE_TEXT markers that do not occur inside it.
std::string delimit_source(std::string_view text);

/// Returns the first delimited block of a user message, byte-identical to
/// what was passed to delimit_source.
std::optional<std::string> extract_delimited_source(std::string_view message);

/// Up to five distinct, trimmed synonyms from a JSON array answer (a bare
/// array or {"synonyms": [...]}, optionally inside a code fence).
/// Throws PromptError{MalformedOutput}.
std::vector<std::string> parse_synonyms(std::string_view model_output);

/// The definition from a {"definition": "..."} answer or a bare JSON string.
/// Throws PromptError{MalformedOutput}.
std::string parse_definition(std::string_view model_output);

/// Trims whitespace and wrapping quotes. Throws PromptError{MalformedOutput}
/// when nothing is left.
std::string clean_rephrase(std::string_view model_output);

/// True when `word` occurs in `sentence` as a whole word, ignoring case.
bool word_in_context(std::string_view word, std::string_view sentence);

/// Rough size of a text in model tokens (4 bytes per token).
int estimate_tokens(std::string_view text);

/// The versioned prompt templates used to build every LLM request.
///
/// A library is a directory of `*.prompt` files (`@@system` / `@@user`
/// sections), one audience block per canonical audience label under
/// `audiences/` and one descriptor per complexity level under `levels/`.
/// The shipped `v1` set is compiled in; `load` reads an override directory
/// with the same layout. Libraries are immutable after construction.
class PromptLibrary {
public:
    static PromptLibrary embedded();
    /// Throws PromptError{TemplateError} on missing files or bad placeholders.
    static PromptLibrary load(const std::filesystem::path& dir);
    static PromptLibrary from_files(const std::map<std::string, std::string>& files, std::string version);

    const std::string& version() const noexcept { return version_; }
    const std::string& audience_block(core::Audience audience) const;

    PromptBundle build_simplify_prompt(std::string_view text,
                                       core::Audience audience = core::kDefaultAudience) const;
    PromptBundle build_rephrase_prompt(std::string_view sentence, ComplexityLevel level) const;
    PromptBundle build_synonym_prompt(std::string_view word, std::string_view context_sentence) const;
    PromptBundle build_definition_prompt(std::string_view word, std::string_view context_sentence) const;

private:
    struct Prompt {
        Template system;
        Template user;
    };

    PromptLibrary() = default;

    std::string version_;
    std::map<std::string, Prompt> prompts_;
    std::map<core::Audience, std::string> audiences_;
    std::map<int, std::string> levels_;

    const Prompt& prompt(const std::string& name) const;
};

}  // namespace plainlang::prompting
