#include "plainlang/text/analysis.hpp"

#include <algorithm>
#include <array>

#include "plainlang/text/unicode.hpp"

namespace plainlang::text {

namespace {

struct CodePoint {
    char32_t value;
    std::size_t begin;  // byte offset
    std::size_t end;
};

std::vector<CodePoint> decode(std::string_view s) {
    std::vector<CodePoint> cps;
    cps.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) {
        const std::size_t begin = pos;
        const char32_t cp = next_code_point(s, pos);
        cps.push_back({cp, begin, pos});
    }
    return cps;
}

std::string folded(const std::vector<CodePoint>& cps, std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to; ++i) append_utf8(out, fold_case(cps[i].value));
    return out;
}

bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool is_closer(char32_t c) {
    return c == U')' || c == U']' || c == U'"' || c == U'\'' || c == 0x2019 || c == 0x201D ||
           c == 0xBB;
}

bool is_opener(char32_t c) {
    return c == U'(' || c == U'[' || c == U'"' || c == U'\'' || c == 0x2018 || c == 0x201C ||
           c == 0xAB;
}

constexpr std::array<std::string_view, 28> kAbbreviations = {
    "dr.",   "mr.",   "mrs.", "ms.",   "prof.", "e.g.", "i.e.", "etc.", "fig.", "figs.",
    "eq.",   "eqs.",  "vs.",  "st.",   "jr.",   "sr.",  "cf.",  "al.",  "approx.", "dept.",
    "inc.",  "ltd.",  "vol.", "pp.",   "resp.", "ca.",  "capt.", "gen.",
};

bool is_abbreviation(std::string_view lowered_word) {
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), lowered_word) !=
           kAbbreviations.end();
}

}  // namespace

TokenSequence make_tokens(std::vector<std::string> tokens) {
    TokenSequence seq;
    for (const auto& t : tokens) seq.source_span_count += code_point_count(t);
    seq.tokens = std::move(tokens);
    return seq;
}

TokenSequence tokenize(std::string_view text) {
    TokenSequence seq;
    const auto cps = decode(text);
    std::size_t i = 0;
    while (i < cps.size()) {
        if (is_whitespace(cps[i].value)) {
            ++i;
            continue;
        }
        std::size_t chunk_end = i;
        while (chunk_end < cps.size() && !is_whitespace(cps[chunk_end].value)) ++chunk_end;
        seq.source_span_count += chunk_end - i;

        std::size_t word_begin = i;
        while (word_begin < chunk_end && is_punctuation(cps[word_begin].value)) ++word_begin;
        std::size_t word_end = chunk_end;
        while (word_end > word_begin && is_punctuation(cps[word_end - 1].value)) --word_end;

        for (std::size_t k = i; k < word_begin; ++k) seq.tokens.push_back(folded(cps, k, k + 1));
        if (word_begin < word_end) seq.tokens.push_back(folded(cps, word_begin, word_end));
        for (std::size_t k = word_end; k < chunk_end; ++k) {
            seq.tokens.push_back(folded(cps, k, k + 1));
        }
        i = chunk_end;
    }
    return seq;
}

bool is_punctuation_token(std::string_view token) noexcept {
    if (token.empty()) return false;
    std::size_t pos = 0;
    while (pos < token.size()) {
        if (!is_punctuation(next_code_point(token, pos))) return false;
    }
    return true;
}

std::vector<std::string> word_tokens(const TokenSequence& seq) {
    std::vector<std::string> words;
    for (const auto& t : seq.tokens) {
        if (!is_punctuation_token(t)) words.push_back(t);
    }
    return words;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    const auto cps = decode(text);
    auto emit = [&](std::size_t from_byte, std::size_t to_byte) {
        std::string_view piece = text.substr(from_byte, to_byte - from_byte);
        std::size_t a = 0;
        std::size_t b = piece.size();
        // Trim by code point so Unicode spaces are dropped too.
        while (a < b) {
            std::size_t p = a;
            if (!is_whitespace(next_code_point(piece, p))) break;
            a = p;
        }
        while (b > a) {
            std::size_t start = b - 1;
            while (start > a && (static_cast<unsigned char>(piece[start]) & 0xC0) == 0x80) --start;
            std::size_t p = start;
            if (!is_whitespace(next_code_point(piece, p))) break;
            b = start;
        }
        if (a < b) sentences.emplace_back(piece.substr(a, b - a));
    };

    std::size_t sentence_start = 0;
    std::size_t i = 0;
    while (i < cps.size()) {
        if (!is_terminator(cps[i].value)) {
            ++i;
            continue;
        }
        const std::size_t term = i;
        std::size_t k = i + 1;
        while (k < cps.size() && (is_terminator(cps[k].value) || is_closer(cps[k].value))) ++k;

        bool split = false;
        if (k == cps.size()) {
            split = true;
        } else if (is_whitespace(cps[k].value)) {
            std::size_t m = k;
            while (m < cps.size() && is_whitespace(cps[m].value)) ++m;
            while (m < cps.size() && is_opener(cps[m].value)) ++m;
            split = m == cps.size() || is_upper(cps[m].value) || is_ascii_digit(cps[m].value);
        }

        if (split && cps[term].value == U'.' && k == term + 1) {
            std::size_t w = term;
            while (w > 0 && !is_whitespace(cps[w - 1].value)) --w;
            while (w < term && is_opener(cps[w].value)) ++w;
            if (is_abbreviation(folded(cps, w, term + 1))) split = false;
        }

        if (split) {
            const std::size_t end_byte = k == cps.size() ? text.size() : cps[k].begin;
            emit(cps[sentence_start].begin, end_byte);
            sentence_start = k;
        }
        i = k;
    }
    if (sentence_start < cps.size()) emit(cps[sentence_start].begin, text.size());
    return sentences;
}

int count_syllables(std::string_view word) {
    std::string letters;
    for (char c : word) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c >= 'a' && c <= 'z') letters.push_back(c);
    }
    auto vowel = [](char c) {
        return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
    };
    int groups = 0;
    bool in_group = false;
    for (char c : letters) {
        const bool v = vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    const std::size_t n = letters.size();
    // Silent final 'e' only when it forms its own vowel group ("make", not "see").
    if (n >= 2 && letters[n - 1] == 'e' && !vowel(letters[n - 2])) {
        const bool consonant_le = n >= 3 && letters[n - 2] == 'l' && !vowel(letters[n - 3]);
        if (!consonant_le) --groups;
    }
    return std::max(groups, 1);
}

std::size_t NgramMultiset::total() const noexcept {
    std::size_t sum = 0;
    for (const auto& [gram, c] : counts) sum += c;
    return sum;
}

std::size_t NgramMultiset::count(const Ngram& gram) const noexcept {
    const auto it = counts.find(gram);
    return it == counts.end() ? 0 : it->second;
}

NgramMultiset ngrams(const TokenSequence& seq, int n) {
    if (n < 1 || n > kMaxNgramOrder) {
        throw TextError(TextErrorKind::InvalidN, "n-gram order must be in 1..4, got " + std::to_string(n));
    }
    NgramMultiset result;
    result.n = n;
    const auto order = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + order <= seq.tokens.size(); ++i) {
        Ngram gram(seq.tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   seq.tokens.begin() + static_cast<std::ptrdiff_t>(i + order));
        ++result.counts[std::move(gram)];
    }
    return result;
}

}  // namespace plainlang::text
