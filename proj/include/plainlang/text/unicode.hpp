#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace plainlang::text {

inline constexpr char32_t kReplacementChar = 0xFFFD;

/// Decodes the code point starting at `pos` and advances `pos` past it.
/// Malformed or truncated sequences yield U+FFFD and advance one byte.
char32_t next_code_point(std::string_view s, std::size_t& pos) noexcept;

void append_utf8(std::string& out, char32_t cp);

bool is_valid_utf8(std::string_view s) noexcept;

/// Number of code points (malformed bytes count as one each).
std::size_t code_point_count(std::string_view s) noexcept;

/// Simple one-to-one case folding for Latin, Greek, Cyrillic and fullwidth
/// Latin letters. Code points outside those blocks fold to themselves.
char32_t fold_case(char32_t cp) noexcept;
char32_t to_upper(char32_t cp) noexcept;
inline bool is_upper(char32_t cp) noexcept { return fold_case(cp) != cp && to_upper(cp) == cp; }

std::string fold_case(std::string_view s);

bool is_whitespace(char32_t cp) noexcept;

/// Punctuation and symbol marks that the tokenizer detaches from words.
bool is_punctuation(char32_t cp) noexcept;

inline bool is_ascii_digit(char32_t cp) noexcept { return cp >= U'0' && cp <= U'9'; }

}  // namespace plainlang::text
