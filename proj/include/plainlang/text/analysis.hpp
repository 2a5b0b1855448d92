#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "plainlang/core/error.hpp"

namespace plainlang::text {

enum class TextErrorKind { InvalidN };
using TextError = CodedError<TextErrorKind>;

/// Case-folded tokens of a text. Tokens are never empty and never contain
/// whitespace; punctuation marks at word edges are separate tokens.
struct TokenSequence {
    std::vector<std::string> tokens;
    /// Non-whitespace code points in the original text.
    std::size_t source_span_count = 0;

    std::size_t size() const noexcept { return tokens.size(); }
    bool empty() const noexcept { return tokens.empty(); }

    friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Convenience for building sequences by hand (tests, oracles).
TokenSequence make_tokens(std::vector<std::string> tokens);

TokenSequence tokenize(std::string_view text);

/// True when the token is a single punctuation mark rather than a word.
bool is_punctuation_token(std::string_view token) noexcept;

/// Word tokens only (punctuation tokens dropped).
std::vector<std::string> word_tokens(const TokenSequence& seq);

/// Splits after '.', '!' or '?' (plus closing quotes/brackets) when followed
/// by whitespace and an uppercase letter or digit, or by the end of text.
/// Known abbreviations ("Dr.", "e.g.", ...) never end a sentence.
std::vector<std::string> split_sentences(std::string_view text);

/// Vowel-group syllable estimate; always >= 1.
int count_syllables(std::string_view word);

using Ngram = std::vector<std::string>;

struct NgramMultiset {
    int n = 1;
    std::map<Ngram, std::size_t> counts;

    std::size_t total() const noexcept;
    std::size_t count(const Ngram& gram) const noexcept;
};

inline constexpr int kMaxNgramOrder = 4;

/// Sliding-window n-gram counts; throws TextError{InvalidN} unless 1 <= n <= 4.
NgramMultiset ngrams(const TokenSequence& seq, int n);

}  // namespace plainlang::text
