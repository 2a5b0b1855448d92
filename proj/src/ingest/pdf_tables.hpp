#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace plainlang::ingest::pdf_tables {

struct GlyphName {
    std::string_view name;
    char32_t code_point;
};

// Code -> Unicode for the predefined simple-font encodings (0 = undefined).
extern const std::array<char32_t, 256> kWinAnsi;
extern const std::array<char32_t, 256> kMacRoman;
extern const std::array<char32_t, 256> kStandard;
extern const std::array<char32_t, 256> kPdfDoc;

// Standard-14 advance widths (1/1000 em), indexed by WinAnsi code.
extern const std::array<std::uint16_t, 256> kHelveticaWidths;
extern const std::array<std::uint16_t, 256> kHelveticaBoldWidths;
extern const std::array<std::uint16_t, 256> kTimesRomanWidths;
extern const std::array<std::uint16_t, 256> kTimesBoldWidths;

// Sorted by name for binary search.
extern const std::array<GlyphName, 4200> kGlyphNames;

}  // namespace plainlang::ingest::pdf_tables
