#include "text_util.hpp"

#include "plainlang/text/unicode.hpp"

namespace plainlang::ingest::detail {

std::string sanitize_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t pos = 0;
    while (pos < s.size()) {
        const std::size_t start = pos;
        const char32_t cp = text::next_code_point(s, pos);
        if (cp < 0x20 && cp != U'\n' && cp != U'\t') continue;
        if (cp == 0x7F) continue;
        if (cp == text::kReplacementChar && !(pos - start == 3 && s.substr(start, 3) == "\xEF\xBF\xBD")) {
            text::append_utf8(out, text::kReplacementChar);
            continue;
        }
        out.append(s.substr(start, pos - start));
    }
    return out;
}

std::string normalize_layout(std::string_view s) {
    std::string lines;
    lines.reserve(s.size());
    std::size_t start = 0;
    while (start <= s.size()) {
        auto nl = s.find('\n', start);
        if (nl == std::string_view::npos) nl = s.size();
        std::string_view line = s.substr(start, nl - start);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        lines.append(line);
        if (nl < s.size()) lines.push_back('\n');
        start = nl + 1;
    }

    std::string out;
    out.reserve(lines.size());
    int newlines = 0;
    for (char c : lines) {
        if (c == '\n') {
            ++newlines;
            continue;
        }
        if (newlines > 0) {
            if (!out.empty()) out.append(newlines >= 2 ? "\n\n" : "\n");
            newlines = 0;
        }
        out.push_back(c);
    }
    std::size_t lead = 0;
    while (lead < out.size() && (out[lead] == ' ' || out[lead] == '\t')) ++lead;
    return out.substr(lead);
}

std::size_t count_blocks(std::string_view s) {
    std::size_t n = 0;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto end = s.find("\n\n", start);
        if (end == std::string_view::npos) end = s.size();
        const auto block = s.substr(start, end - start);
        if (block.find_first_not_of(" \t\n") != std::string_view::npos) ++n;
        start = end + 2;
    }
    return n;
}

}  // namespace plainlang::ingest::detail
