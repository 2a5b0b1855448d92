#include "pdf_fonts.hpp"

#include <algorithm>

#include "pdf_tables.hpp"
#include "plainlang/core/strings.hpp"

namespace plainlang::ingest::pdf {

namespace {

constexpr std::size_t kMaxCMapEntries = 1u << 20;
constexpr std::uint32_t kMaxRangeSpan = 1u << 16;
constexpr std::size_t kMaxWidthEntries = 1u << 20;

std::optional<std::uint32_t> parse_hex(std::string_view s) {
    if (s.empty() || s.size() > 8) return std::nullopt;
    std::uint32_t v = 0;
    for (char c : s) {
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
        else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
        else return std::nullopt;
        v = v * 16 + static_cast<std::uint32_t>(d);
    }
    return v;
}

char32_t lookup_glyph(std::string_view name) {
    const auto& table = pdf_tables::kGlyphNames;
    const auto it = std::lower_bound(table.begin(), table.end(), name,
                                     [](const pdf_tables::GlyphName& g, std::string_view n) { return g.name < n; });
    if (it != table.end() && it->name == name) return it->code_point;
    return 0;
}

bool valid_scalar(std::uint32_t cp) { return cp > 0 && cp <= 0x10FFFF && (cp < 0xD800 || cp > 0xDFFF); }

std::u32string single_glyph(std::string_view name) {
    if (name.empty()) return {};
    if (const char32_t cp = lookup_glyph(name)) return std::u32string(1, cp);
    if (name.size() >= 7 && name.substr(0, 3) == "uni" && (name.size() - 3) % 4 == 0) {
        std::u32string out;
        for (std::size_t i = 3; i < name.size(); i += 4) {
            const auto v = parse_hex(name.substr(i, 4));
            if (!v || !valid_scalar(*v)) return {};
            out.push_back(static_cast<char32_t>(*v));
        }
        return out;
    }
    if (name.size() >= 5 && name.size() <= 7 && name[0] == 'u') {
        const auto v = parse_hex(name.substr(1));
        if (v && valid_scalar(*v)) return std::u32string(1, static_cast<char32_t>(*v));
    }
    return {};
}

std::uint32_t big_endian(std::string_view bytes) {
    std::uint32_t v = 0;
    for (char c : bytes) v = (v << 8) | static_cast<unsigned char>(c);
    return v;
}

std::u32string decode_utf16be(std::string_view bytes) {
    std::u32string out;
    if (bytes.size() % 2 != 0) {
        for (char c : bytes) out.push_back(static_cast<unsigned char>(c));
        return out;
    }
    for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
        const char32_t unit = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
        if (unit >= 0xD800 && unit <= 0xDBFF && i + 3 < bytes.size()) {
            const char32_t low = (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
            if (low >= 0xDC00 && low <= 0xDFFF) {
                out.push_back(0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00));
                i += 2;
                continue;
            }
        }
        if (unit >= 0xD800 && unit <= 0xDFFF) continue;
        out.push_back(unit);
    }
    return out;
}

const std::array<char32_t, 256>* encoding_by_name(std::string_view name) {
    if (name == "WinAnsiEncoding") return &pdf_tables::kWinAnsi;
    if (name == "MacRomanEncoding") return &pdf_tables::kMacRoman;
    if (name == "StandardEncoding") return &pdf_tables::kStandard;
    if (name == "PDFDocEncoding") return &pdf_tables::kPdfDoc;
    return nullptr;
}

const std::unordered_map<char32_t, std::uint8_t>& win_ansi_codes() {
    static const auto table = [] {
        std::unordered_map<char32_t, std::uint8_t> m;
        for (int c = 0; c < 256; ++c) {
            if (pdf_tables::kWinAnsi[static_cast<std::size_t>(c)] != 0) {
                m.emplace(pdf_tables::kWinAnsi[static_cast<std::size_t>(c)], static_cast<std::uint8_t>(c));
            }
        }
        return m;
    }();
    return table;
}

// Widths of a standard-14 font, or nullptr when the name is not one of the
// families we carry metrics for. Courier is handled by the caller.
const std::array<std::uint16_t, 256>* standard_widths(const std::string& lower) {
    const bool bold = lower.find("bold") != std::string::npos;
    if (lower.find("helvetica") != std::string::npos || lower.find("arial") != std::string::npos) {
        return bold ? &pdf_tables::kHelveticaBoldWidths : &pdf_tables::kHelveticaWidths;
    }
    if (lower.find("times") != std::string::npos) {
        return bold ? &pdf_tables::kTimesBoldWidths : &pdf_tables::kTimesRomanWidths;
    }
    return nullptr;
}

}  // namespace

std::u32string glyph_name_to_unicode(std::string_view name) {
    if (const auto dot = name.find('.'); dot != std::string_view::npos) name = name.substr(0, dot);
    if (name.find('_') == std::string_view::npos) return single_glyph(name);
    std::u32string out;
    for (const auto& part : core::split(name, '_')) out += single_glyph(part);
    return out;
}

CMap CMap::parse(std::string_view data) {
    CMap cmap;
    Lexer lx(data);
    std::vector<Object> operands;
    std::size_t entries = 0;
    auto add = [&](std::uint32_t code, int bytes, std::u32string text) {
        if (entries >= kMaxCMapEntries) return;
        ++entries;
        cmap.map_[(static_cast<std::uint64_t>(bytes) << 32) | code] = std::move(text);
    };
    while (lx.pos() < data.size()) {
        Object obj;
        try {
            obj = parse_object(lx, false);
        } catch (const PdfError&) {
            if (lx.pos() >= data.size()) break;
            continue;
        }
        const Keyword* kw = obj.keyword();
        if (kw == nullptr) {
            if (operands.size() < 3 * 100 + 2) operands.push_back(std::move(obj));
            continue;
        }
        if (kw->value == "endcodespacerange") {
            for (std::size_t i = 0; i + 1 < operands.size(); i += 2) {
                const auto* lo = operands[i].string();
                const auto* hi = operands[i + 1].string();
                if (lo && hi && lo->size() == hi->size() && !lo->empty() && lo->size() <= 4) {
                    cmap.codespace_.push_back({static_cast<int>(lo->size()), big_endian(*lo), big_endian(*hi)});
                }
            }
        } else if (kw->value == "endbfchar") {
            for (std::size_t i = 0; i + 1 < operands.size(); i += 2) {
                const auto* src = operands[i].string();
                if (!src || src->empty() || src->size() > 4) continue;
                if (const auto* dst = operands[i + 1].string()) {
                    add(big_endian(*src), static_cast<int>(src->size()), decode_utf16be(*dst));
                } else if (const auto* name = operands[i + 1].name()) {
                    add(big_endian(*src), static_cast<int>(src->size()), glyph_name_to_unicode(*name));
                }
            }
        } else if (kw->value == "endbfrange") {
            for (std::size_t i = 0; i + 2 < operands.size(); i += 3) {
                const auto* lo_s = operands[i].string();
                const auto* hi_s = operands[i + 1].string();
                if (!lo_s || !hi_s || lo_s->empty() || lo_s->size() > 4) continue;
                const int bytes = static_cast<int>(lo_s->size());
                const std::uint32_t lo = big_endian(*lo_s);
                const std::uint32_t hi = big_endian(*hi_s);
                if (hi < lo) continue;
                const std::uint32_t span = std::min(hi - lo, kMaxRangeSpan - 1);
                if (const auto* dst = operands[i + 2].string()) {
                    if (dst->empty()) continue;
                    std::string cur = *dst;
                    for (std::uint32_t k = 0; k <= span; ++k) {
                        std::string d = cur;
                        // Offset the final UTF-16 unit (or byte) by k.
                        if (d.size() >= 2) {
                            const std::uint32_t last = ((static_cast<unsigned char>(d[d.size() - 2]) << 8) |
                                                        static_cast<unsigned char>(d[d.size() - 1])) + k;
                            d[d.size() - 2] = static_cast<char>((last >> 8) & 0xFF);
                            d[d.size() - 1] = static_cast<char>(last & 0xFF);
                        } else {
                            d[0] = static_cast<char>(static_cast<unsigned char>(d[0]) + k);
                        }
                        add(lo + k, bytes, decode_utf16be(d));
                    }
                } else if (const auto* arr = operands[i + 2].array()) {
                    for (std::uint32_t k = 0; k <= span && k < arr->size(); ++k) {
                        if (const auto* d = (*arr)[k].string()) add(lo + k, bytes, decode_utf16be(*d));
                    }
                }
            }
        }
        operands.clear();
    }
    return cmap;
}

const std::u32string* CMap::lookup(std::uint32_t code, int bytes) const {
    const auto it = map_.find((static_cast<std::uint64_t>(bytes) << 32) | code);
    return it == map_.end() ? nullptr : &it->second;
}

Font Font::fallback() {
    Font f;
    for (std::size_t c = 0; c < 256; ++c) {
        if (pdf_tables::kWinAnsi[c] != 0) f.encoding_[c] = std::u32string(1, pdf_tables::kWinAnsi[c]);
        if (pdf_tables::kHelveticaWidths[c] != 0) f.widths_[static_cast<std::uint32_t>(c)] = pdf_tables::kHelveticaWidths[c];
    }
    return f;
}

Font Font::load(const Document& doc, const Dict& dict) {
    Font f;
    const std::string subtype = doc.get(dict, "Subtype").name() ? *doc.get(dict, "Subtype").name() : "";
    std::string base_font = doc.get(dict, "BaseFont").name() ? *doc.get(dict, "BaseFont").name() : "";
    if (const auto plus = base_font.find('+'); plus == 6) base_font = base_font.substr(7);
    const std::string base_lower = core::ascii_lower(base_font);

    if (const Stream* tu = doc.get(dict, "ToUnicode").stream()) {
        try {
            f.to_unicode_ = CMap::parse(doc.decode(*tu));
        } catch (const PdfError&) {
        }
    }

    if (subtype == "Type0") {
        f.composite_ = true;
        const Object& enc = doc.get(dict, "Encoding");
        if (const Stream* s = enc.stream()) {
            try {
                f.codespace_ = CMap::parse(doc.decode(*s)).codespace();
            } catch (const PdfError&) {
            }
        }
        if (f.codespace_.empty() && f.to_unicode_) f.codespace_ = f.to_unicode_->codespace();
        if (f.codespace_.empty()) f.codespace_.push_back({2, 0, 0xFFFF});

        f.default_width_ = 1000.0;
        const Array* descendants = doc.get(dict, "DescendantFonts").array();
        const Dict* cid_font = descendants && !descendants->empty() ? doc.resolve((*descendants)[0]).dict() : nullptr;
        if (cid_font) {
            if (auto dw = doc.get(*cid_font, "DW").as_number()) f.default_width_ = *dw;
            if (const Array* w = doc.get(*cid_font, "W").array()) {
                std::size_t i = 0;
                while (i < w->size() && f.widths_.size() < kMaxWidthEntries) {
                    const auto first = doc.resolve((*w)[i]).as_int();
                    if (!first || i + 1 >= w->size()) break;
                    const Object& second = doc.resolve((*w)[i + 1]);
                    if (const Array* list = second.array()) {
                        for (std::size_t k = 0; k < list->size() && f.widths_.size() < kMaxWidthEntries; ++k) {
                            if (auto v = doc.resolve((*list)[k]).as_number()) {
                                f.widths_[static_cast<std::uint32_t>(*first + static_cast<std::int64_t>(k))] = *v;
                            }
                        }
                        i += 2;
                    } else {
                        const auto last = second.as_int();
                        if (!last || i + 2 >= w->size()) break;
                        const auto v = doc.resolve((*w)[i + 2]).as_number();
                        if (v && *last >= *first && *last - *first < static_cast<std::int64_t>(kMaxRangeSpan)) {
                            for (std::int64_t c = *first; c <= *last; ++c) f.widths_[static_cast<std::uint32_t>(c)] = *v;
                        }
                        i += 3;
                    }
                }
            }
        }
        return f;
    }

    // Simple font.
    const std::array<char32_t, 256>* base = subtype == "TrueType" ? &pdf_tables::kWinAnsi : &pdf_tables::kStandard;
    if (base_lower.find("symbol") != std::string::npos || base_lower.find("dingbats") != std::string::npos) base = nullptr;
    const Object& enc = doc.get(dict, "Encoding");
    const Array* differences = nullptr;
    if (const auto* n = enc.name()) {
        if (const auto* table = encoding_by_name(*n)) base = table;
    } else if (const Dict* ed = enc.dict()) {
        if (const auto* n = doc.get(*ed, "BaseEncoding").name()) {
            if (const auto* table = encoding_by_name(*n)) base = table;
        }
        differences = doc.get(*ed, "Differences").array();
    }
    if (base) {
        for (std::size_t c = 0; c < 256; ++c) {
            if ((*base)[c] != 0) f.encoding_[c] = std::u32string(1, (*base)[c]);
        }
    }
    if (differences) {
        std::int64_t code = 0;
        for (const Object& item : *differences) {
            const Object& o = doc.resolve(item);
            if (auto c = o.as_int()) {
                code = *c;
            } else if (const auto* n = o.name()) {
                if (code >= 0 && code < 256) f.encoding_[static_cast<std::size_t>(code)] = glyph_name_to_unicode(*n);
                ++code;
            }
        }
    }

    if (subtype == "Type3") {
        if (const Array* m = doc.get(dict, "FontMatrix").array(); m && !m->empty()) {
            if (auto a = doc.resolve((*m)[0]).as_number(); a && *a != 0.0) f.width_scale_ = std::abs(*a);
        }
    }

    if (const Dict* fd = doc.get(dict, "FontDescriptor").dict()) {
        if (auto mw = doc.get(*fd, "MissingWidth").as_number(); mw && *mw > 0) f.default_width_ = *mw;
    }
    const Array* widths = doc.get(dict, "Widths").array();
    const auto first_char = doc.get(dict, "FirstChar").as_int().value_or(0);
    if (widths) {
        for (std::size_t i = 0; i < widths->size() && i < 256; ++i) {
            if (auto v = doc.resolve((*widths)[i]).as_number()) {
                f.widths_[static_cast<std::uint32_t>(first_char + static_cast<std::int64_t>(i))] = *v;
            }
        }
    } else if (base_lower.find("courier") != std::string::npos) {
        f.default_width_ = 600.0;
    } else if (const auto* metrics = standard_widths(base_lower)) {
        const auto& codes = win_ansi_codes();
        for (std::size_t c = 0; c < 256; ++c) {
            if (f.encoding_[c].size() != 1) continue;
            const auto it = codes.find(f.encoding_[c][0]);
            if (it != codes.end() && (*metrics)[it->second] != 0) {
                f.widths_[static_cast<std::uint32_t>(c)] = (*metrics)[it->second];
            }
        }
    }
    return f;
}

std::vector<Glyph> Font::split(std::string_view bytes) const {
    std::vector<Glyph> out;
    if (!composite_) {
        out.reserve(bytes.size());
        for (char c : bytes) out.push_back({static_cast<unsigned char>(c), 1});
        return out;
    }
    std::size_t i = 0;
    while (i < bytes.size()) {
        int matched = 0;
        std::uint32_t code = 0;
        for (int n = 1; n <= 4 && matched == 0 && i + static_cast<std::size_t>(n) <= bytes.size(); ++n) {
            const std::uint32_t v = big_endian(bytes.substr(i, static_cast<std::size_t>(n)));
            for (const auto& r : codespace_) {
                if (r.bytes == n && v >= r.lo && v <= r.hi) {
                    matched = n;
                    code = v;
                    break;
                }
            }
        }
        if (matched == 0) {
            matched = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(codespace_.front().bytes), bytes.size() - i));
            code = big_endian(bytes.substr(i, static_cast<std::size_t>(matched)));
        }
        out.push_back({code, matched});
        i += static_cast<std::size_t>(matched);
    }
    return out;
}

std::u32string Font::to_unicode(const Glyph& g) const {
    if (to_unicode_) {
        if (const auto* s = to_unicode_->lookup(g.code, g.bytes)) return *s;
    }
    if (composite_) return {};
    if (g.code < 256 && !encoding_[g.code].empty()) return encoding_[g.code];
    if (g.code >= 32 && g.code < 127) return std::u32string(1, static_cast<char32_t>(g.code));
    return {};
}

double Font::advance(const Glyph& g) const {
    const auto it = widths_.find(g.code);
    return (it == widths_.end() ? default_width_ : it->second) * width_scale_;
}

}  // namespace plainlang::ingest::pdf
