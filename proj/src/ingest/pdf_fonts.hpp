#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pdf_objects.hpp"

namespace plainlang::ingest::pdf {

/// Unicode for a glyph name: Adobe glyph list, uniXXXX / uXXXX[XX] forms,
/// suffixed variants ("a.sc") and ligatures ("f_i").
std::u32string glyph_name_to_unicode(std::string_view name);

/// A ToUnicode or encoding CMap: code-space ranges plus code -> text.
class CMap {
public:
    struct Range {
        int bytes;
        std::uint32_t lo;
        std::uint32_t hi;
    };

    static CMap parse(std::string_view data);

    const std::vector<Range>& codespace() const noexcept { return codespace_; }
    const std::u32string* lookup(std::uint32_t code, int bytes) const;
    bool empty() const noexcept { return map_.empty(); }

private:
    std::vector<Range> codespace_;
    std::unordered_map<std::uint64_t, std::u32string> map_;
};

struct Glyph {
    std::uint32_t code;
    int bytes;
};

/// What the text extractor needs from a font: how to split strings into
/// codes, the Unicode for each code and the advance widths.
class Font {
public:
    static Font load(const Document& doc, const Dict& font_dict);
    /// Helvetica with WinAnsi encoding; used when a content stream shows
    /// text without a usable font.
    static Font fallback();

    std::vector<Glyph> split(std::string_view bytes) const;
    std::u32string to_unicode(const Glyph& g) const;
    /// Advance in text space units per unit of font size.
    double advance(const Glyph& g) const;
    bool composite() const noexcept { return composite_; }

private:
    bool composite_ = false;
    std::optional<CMap> to_unicode_;
    std::vector<CMap::Range> codespace_;
    std::array<std::u32string, 256> encoding_{};
    std::unordered_map<std::uint32_t, double> widths_;
    double default_width_ = 500.0;
    double width_scale_ = 0.001;
};

}  // namespace plainlang::ingest::pdf
