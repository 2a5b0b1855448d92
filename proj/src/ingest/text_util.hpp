#pragma once

#include <string>
#include <string_view>

namespace plainlang::ingest::detail {

/// Replaces malformed UTF-8 sequences and C0 controls other than tab and
/// newline with U+FFFD / nothing.
std::string sanitize_utf8(std::string_view s);

/// Strips trailing spaces from each line, collapses runs of three or more
/// newlines to a paragraph break and trims the ends.
std::string normalize_layout(std::string_view s);

/// Number of "\n\n"-separated non-blank blocks.
std::size_t count_blocks(std::string_view s);

}  // namespace plainlang::ingest::detail
