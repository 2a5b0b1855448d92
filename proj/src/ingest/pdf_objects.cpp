#include "pdf_objects.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "inflate.hpp"

namespace plainlang::ingest::pdf {

namespace {

constexpr int kMaxNesting = 100;
constexpr int kMaxResolveDepth = 64;
constexpr int kMaxXrefSections = 64;

const Object& null_object() {
    static const Object kNull;
    return kNull;
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

bool is_regular(char c) { return !is_pdf_whitespace(c) && !is_pdf_delimiter(c); }

}  // namespace

bool is_pdf_whitespace(char c) noexcept {
    return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\0';
}

bool is_pdf_delimiter(char c) noexcept {
    return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' || c == '}' ||
           c == '/' || c == '%';
}

const Object* Dict::get(std::string_view key) const {
    for (const auto& [k, v] : entries) {
        if (k == key) return &v;
    }
    return nullptr;
}

std::optional<std::int64_t> Object::as_int() const {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    if (const auto* d = std::get_if<double>(&v)) {
        if (std::isfinite(*d) && std::abs(*d) < 9e15) return static_cast<std::int64_t>(*d);
    }
    return std::nullopt;
}

std::optional<double> Object::as_number() const {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) {
        if (std::isfinite(*d)) return *d;
    }
    return std::nullopt;
}

const std::string* Object::name() const {
    const auto* n = std::get_if<Name>(&v);
    return n ? &n->value : nullptr;
}

const std::string* Object::string() const {
    const auto* s = std::get_if<String>(&v);
    return s ? &s->bytes : nullptr;
}

const Array* Object::array() const { return std::get_if<Array>(&v); }

const Dict* Object::dict() const {
    if (const auto* d = std::get_if<Dict>(&v)) return d;
    if (const auto* s = std::get_if<std::shared_ptr<const Stream>>(&v)) return &(*s)->dict;
    return nullptr;
}

const Stream* Object::stream() const {
    const auto* s = std::get_if<std::shared_ptr<const Stream>>(&v);
    return s ? s->get() : nullptr;
}

const Keyword* Object::keyword() const { return std::get_if<Keyword>(&v); }

// ---------------------------------------------------------------------------
// Lexer

void Lexer::skip_whitespace() {
    while (pos_ < data_.size()) {
        const char c = data_[pos_];
        if (is_pdf_whitespace(c)) {
            ++pos_;
        } else if (c == '%') {
            while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
        } else {
            break;
        }
    }
}

std::string Lexer::literal_string() {
    ++pos_;  // '('
    std::string out;
    int depth = 1;
    while (pos_ < data_.size()) {
        char c = data_[pos_++];
        if (c == '\\') {
            if (pos_ >= data_.size()) break;
            c = data_[pos_++];
            switch (c) {
                case 'n': out += '\n'; break;
                case 'r': out += '\r'; break;
                case 't': out += '\t'; break;
                case 'b': out += '\b'; break;
                case 'f': out += '\f'; break;
                case '\r':
                    if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
                    break;
                case '\n': break;
                default:
                    if (c >= '0' && c <= '7') {
                        int value = c - '0';
                        for (int k = 0; k < 2 && pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '7'; ++k) {
                            value = value * 8 + (data_[pos_++] - '0');
                        }
                        out += static_cast<char>(value & 0xFF);
                    } else {
                        out += c;
                    }
            }
            continue;
        }
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            if (--depth == 0) return out;
        } else if (c == '\r') {
            if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
            c = '\n';
        }
        out += c;
    }
    return out;
}

std::string Lexer::hex_string() {
    ++pos_;  // '<'
    std::string out;
    int pending = -1;
    while (pos_ < data_.size()) {
        const char c = data_[pos_++];
        if (c == '>') break;
        const int h = hex_value(c);
        if (h < 0) continue;
        if (pending < 0) {
            pending = h;
        } else {
            out += static_cast<char>(pending * 16 + h);
            pending = -1;
        }
    }
    if (pending >= 0) out += static_cast<char>(pending * 16);
    return out;
}

std::string Lexer::name() {
    ++pos_;  // '/'
    std::string out;
    while (pos_ < data_.size() && is_regular(data_[pos_])) {
        const char c = data_[pos_++];
        if (c == '#' && pos_ + 1 < data_.size()) {
            const int hi = hex_value(data_[pos_]);
            const int lo = hex_value(data_[pos_ + 1]);
            if (hi >= 0 && lo >= 0) {
                out += static_cast<char>(hi * 16 + lo);
                pos_ += 2;
                continue;
            }
        }
        out += c;
    }
    return out;
}

Lexer::Token Lexer::next() {
    for (;;) {
        skip_whitespace();
        Token t;
        if (pos_ >= data_.size()) return t;
        const char c = data_[pos_];
        switch (c) {
            case '[': ++pos_; t.kind = Tok::ArrayOpen; return t;
            case ']': ++pos_; t.kind = Tok::ArrayClose; return t;
            case '<':
                if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') {
                    pos_ += 2;
                    t.kind = Tok::DictOpen;
                    return t;
                }
                t.kind = Tok::String;
                t.text = hex_string();
                return t;
            case '>':
                if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '>') {
                    pos_ += 2;
                    t.kind = Tok::DictClose;
                    return t;
                }
                ++pos_;
                continue;
            case '(':
                t.kind = Tok::String;
                t.text = literal_string();
                return t;
            case ')':
                ++pos_;
                continue;
            case '/':
                t.kind = Tok::Name;
                t.text = name();
                return t;
            case '{':
            case '}':
                ++pos_;
                t.kind = Tok::Keyword;
                t.text = std::string(1, c);
                return t;
            default: break;
        }

        const std::size_t start = pos_;
        while (pos_ < data_.size() && is_regular(data_[pos_])) ++pos_;
        if (pos_ == start) {
            ++pos_;  // stray byte
            continue;
        }
        const std::string_view word = data_.substr(start, pos_ - start);
        const bool numeric = std::all_of(word.begin(), word.end(), [](char ch) {
            return (ch >= '0' && ch <= '9') || ch == '.' || ch == '-' || ch == '+';
        });
        if (!numeric) {
            t.kind = Tok::Keyword;
            t.text = std::string(word);
            return t;
        }
        // Lenient number parsing: leading sign run, digits, at most one dot.
        std::size_t i = 0;
        bool negative = false;
        while (i < word.size() && (word[i] == '-' || word[i] == '+')) {
            negative = negative || word[i] == '-';
            ++i;
        }
        std::string digits;
        bool dot = false;
        for (; i < word.size(); ++i) {
            const char ch = word[i];
            if (ch == '.') {
                if (dot) break;
                dot = true;
                digits += ch;
            } else if (ch >= '0' && ch <= '9') {
                digits += ch;
            } else {
                break;
            }
        }
        if (!dot && !digits.empty() && digits.size() <= 18) {
            std::int64_t value = 0;
            std::from_chars(digits.data(), digits.data() + digits.size(), value);
            t.kind = Tok::Int;
            t.integer = negative ? -value : value;
            return t;
        }
        t.kind = Tok::Real;
        t.real = digits.empty() || digits == "." ? 0.0 : std::strtod(digits.c_str(), nullptr);
        if (negative) t.real = -t.real;
        if (!std::isfinite(t.real)) t.real = 0.0;
        return t;
    }
}

// ---------------------------------------------------------------------------
// Parser

Object parse_object(Lexer& lx, bool allow_refs, int depth) {
    if (depth > kMaxNesting) throw PdfError("objects nested too deeply");
    Lexer::Token t = lx.next();
    switch (t.kind) {
        case Lexer::Tok::End: throw PdfError("unexpected end of data");
        case Lexer::Tok::Int: {
            if (allow_refs) {
                const std::size_t save = lx.pos();
                const auto gen = lx.next();
                if (gen.kind == Lexer::Tok::Int) {
                    const auto r = lx.next();
                    if (r.kind == Lexer::Tok::Keyword && r.text == "R" && t.integer >= 0 && t.integer <= INT32_MAX &&
                        gen.integer >= 0 && gen.integer <= 65535) {
                        return Object{Ref{static_cast<int>(t.integer), static_cast<int>(gen.integer)}};
                    }
                }
                lx.seek(save);
            }
            return Object{t.integer};
        }
        case Lexer::Tok::Real: return Object{t.real};
        case Lexer::Tok::String: return Object{String{std::move(t.text)}};
        case Lexer::Tok::Name: return Object{Name{std::move(t.text)}};
        case Lexer::Tok::ArrayOpen: {
            Array arr;
            for (;;) {
                const std::size_t save = lx.pos();
                const auto peek = lx.next();
                if (peek.kind == Lexer::Tok::ArrayClose) break;
                if (peek.kind == Lexer::Tok::End) throw PdfError("unterminated array");
                if (peek.kind == Lexer::Tok::DictClose) throw PdfError("unbalanced array");
                lx.seek(save);
                arr.push_back(parse_object(lx, allow_refs, depth + 1));
            }
            return Object{std::move(arr)};
        }
        case Lexer::Tok::DictOpen: {
            Dict dict;
            for (;;) {
                auto key = lx.next();
                if (key.kind == Lexer::Tok::DictClose) break;
                if (key.kind == Lexer::Tok::End) throw PdfError("unterminated dictionary");
                if (key.kind != Lexer::Tok::Name) continue;  // tolerate junk between entries
                const std::size_t save = lx.pos();
                const auto peek = lx.next();
                if (peek.kind == Lexer::Tok::DictClose) {
                    dict.entries.emplace_back(std::move(key.text), Object{});
                    break;
                }
                lx.seek(save);
                Object value = parse_object(lx, allow_refs, depth + 1);
                if (dict.get(key.text) == nullptr) dict.entries.emplace_back(std::move(key.text), std::move(value));
            }
            return Object{std::move(dict)};
        }
        case Lexer::Tok::ArrayClose:
        case Lexer::Tok::DictClose: throw PdfError("unexpected closing delimiter");
        case Lexer::Tok::Keyword:
            if (t.text == "true") return Object{true};
            if (t.text == "false") return Object{false};
            if (t.text == "null") return Object{};
            return Object{Keyword{std::move(t.text)}};
    }
    throw PdfError("unreachable token");
}

// ---------------------------------------------------------------------------
// Filters

namespace {

void charge(std::size_t& budget, std::size_t n) {
    if (n > budget) throw PdfError("decoded data exceeds limit");
    budget -= n;
}

std::string ascii_hex(std::string_view in) {
    std::string out;
    int pending = -1;
    for (char c : in) {
        if (c == '>') break;
        const int h = hex_value(c);
        if (h < 0) continue;
        if (pending < 0) {
            pending = h;
        } else {
            out += static_cast<char>(pending * 16 + h);
            pending = -1;
        }
    }
    if (pending >= 0) out += static_cast<char>(pending * 16);
    return out;
}

std::string ascii85(std::string_view in) {
    std::string out;
    std::uint64_t group = 0;
    int n = 0;
    auto flush = [&](int count) {
        for (int k = 0; k < count; ++k) out += static_cast<char>((group >> (24 - 8 * k)) & 0xFF);
    };
    std::size_t i = 0;
    if (in.substr(0, 2) == "<~") i = 2;
    for (; i < in.size(); ++i) {
        const char c = in[i];
        if (c == '~') break;
        if (is_pdf_whitespace(c)) continue;
        if (c == 'z' && n == 0) {
            out.append(4, '\0');
            continue;
        }
        if (c < '!' || c > 'u') continue;
        group = group * 85 + static_cast<std::uint64_t>(c - '!');
        if (++n == 5) {
            if (group <= 0xFFFFFFFFull) flush(4);
            group = 0;
            n = 0;
        }
    }
    if (n > 1) {
        for (int k = n; k < 5; ++k) group = group * 85 + 84;
        if (group <= 0xFFFFFFFFull) flush(n - 1);
    }
    return out;
}

std::string run_length(std::string_view in, std::size_t& budget) {
    std::string out;
    std::size_t i = 0;
    while (i < in.size()) {
        const auto len = static_cast<unsigned char>(in[i++]);
        if (len == 128) break;
        if (len < 128) {
            const std::size_t n = std::min<std::size_t>(len + 1u, in.size() - i);
            charge(budget, n);
            out.append(in.substr(i, n));
            i += n;
        } else {
            if (i >= in.size()) break;
            const std::size_t n = 257u - len;
            charge(budget, n);
            out.append(n, in[i++]);
        }
    }
    return out;
}

std::string lzw(std::string_view in, int early_change, std::size_t& budget) {
    std::string out;
    std::vector<std::string> table;
    int width = 9;
    std::string prev;
    bool have_prev = false;
    auto reset = [&] {
        table.clear();
        table.reserve(4096);
        for (int i = 0; i < 256; ++i) table.emplace_back(1, static_cast<char>(i));
        table.emplace_back();
        table.emplace_back();
        width = 9;
        have_prev = false;
    };
    reset();
    std::uint32_t bitbuf = 0;
    int bits = 0;
    std::size_t i = 0;
    for (;;) {
        while (bits < width && i < in.size()) {
            bitbuf = (bitbuf << 8) | static_cast<unsigned char>(in[i++]);
            bits += 8;
        }
        if (bits < width) break;
        const std::uint32_t code = (bitbuf >> (bits - width)) & ((1u << width) - 1);
        bits -= width;
        if (code == 256) {
            reset();
            continue;
        }
        if (code == 257) break;
        std::string entry;
        if (code < table.size() && code != 256 && code != 257) {
            entry = table[code];
        } else if (code == table.size() && have_prev) {
            entry = prev + prev[0];
        } else {
            break;
        }
        charge(budget, entry.size());
        out += entry;
        if (have_prev && table.size() < 4096) table.push_back(prev + entry[0]);
        prev = std::move(entry);
        have_prev = true;
        if (static_cast<int>(table.size()) + early_change >= (1 << width) && width < 12) ++width;
    }
    return out;
}

std::int64_t param_int(const Dict* parms, std::string_view key, std::int64_t fallback, const Document* doc) {
    if (parms == nullptr) return fallback;
    const Object* o = parms->get(key);
    if (o == nullptr) return fallback;
    const Object& r = doc ? doc->resolve(*o) : *o;
    return r.as_int().value_or(fallback);
}

std::string apply_predictor(std::string data, const Dict* parms, const Document* doc) {
    const std::int64_t predictor = param_int(parms, "Predictor", 1, doc);
    if (predictor < 2) return data;
    const std::int64_t colors = std::clamp<std::int64_t>(param_int(parms, "Colors", 1, doc), 1, 32);
    std::int64_t bpc = param_int(parms, "BitsPerComponent", 8, doc);
    if (bpc != 1 && bpc != 2 && bpc != 4 && bpc != 8 && bpc != 16) bpc = 8;
    const std::int64_t columns = std::clamp<std::int64_t>(param_int(parms, "Columns", 1, doc), 1, 1 << 20);
    const auto bpp = static_cast<std::size_t>(std::max<std::int64_t>(1, colors * bpc / 8));
    const auto row_len = static_cast<std::size_t>((colors * bpc * columns + 7) / 8);

    if (predictor == 2) {
        if (bpc != 8) return data;
        for (std::size_t row = 0; row < data.size(); row += row_len) {
            const std::size_t end = std::min(data.size(), row + row_len);
            for (std::size_t i = row + bpp; i < end; ++i) {
                data[i] = static_cast<char>(static_cast<unsigned char>(data[i]) + static_cast<unsigned char>(data[i - bpp]));
            }
        }
        return data;
    }

    std::string out;
    out.reserve(data.size());
    std::vector<unsigned char> prior(row_len, 0);
    std::vector<unsigned char> cur(row_len, 0);
    std::size_t pos = 0;
    while (pos < data.size()) {
        const auto filter = static_cast<unsigned char>(data[pos++]);
        const std::size_t n = std::min(row_len, data.size() - pos);
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned raw = static_cast<unsigned char>(data[pos + i]);
            const unsigned left = i >= bpp ? cur[i - bpp] : 0;
            const unsigned up = prior[i];
            const unsigned up_left = i >= bpp ? prior[i - bpp] : 0;
            unsigned value = raw;
            switch (filter) {
                case 1: value = raw + left; break;
                case 2: value = raw + up; break;
                case 3: value = raw + (left + up) / 2; break;
                case 4: {
                    const int p = static_cast<int>(left) + static_cast<int>(up) - static_cast<int>(up_left);
                    const int pa = std::abs(p - static_cast<int>(left));
                    const int pb = std::abs(p - static_cast<int>(up));
                    const int pc = std::abs(p - static_cast<int>(up_left));
                    const unsigned pred = (pa <= pb && pa <= pc) ? left : (pb <= pc ? up : up_left);
                    value = raw + pred;
                    break;
                }
                default: break;
            }
            cur[i] = static_cast<unsigned char>(value & 0xFF);
        }
        out.append(reinterpret_cast<const char*>(cur.data()), n);
        pos += n;
        std::swap(prior, cur);
    }
    return out;
}

}  // namespace

std::string decode_stream(const Dict& dict, std::string_view raw, const Document* doc, std::size_t& budget) {
    auto lookup = [&](std::string_view a, std::string_view b) -> const Object& {
        const Object* o = dict.get(a);
        if (o == nullptr) o = dict.get(b);
        if (o == nullptr) return null_object();
        return doc ? doc->resolve(*o) : *o;
    };
    const Object& filter = lookup("Filter", "F");
    const Object& parms = lookup("DecodeParms", "DP");

    std::vector<std::string> names;
    std::vector<const Dict*> parm_list;
    if (const auto* n = filter.name()) {
        names.push_back(*n);
        parm_list.push_back(parms.dict());
    } else if (const auto* arr = filter.array()) {
        const Array* parr = parms.array();
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const Object& f = doc ? doc->resolve((*arr)[i]) : (*arr)[i];
            if (const auto* n = f.name()) names.push_back(*n);
            else continue;
            const Dict* p = nullptr;
            if (parr && i < parr->size()) p = (doc ? doc->resolve((*parr)[i]) : (*parr)[i]).dict();
            parm_list.push_back(p);
        }
    }

    charge(budget, raw.size());
    std::string data(raw);
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& name = names[i];
        const Dict* p = parm_list[i];
        if (name == "FlateDecode" || name == "Fl") {
            using detail::Wrapper;
            detail::InflateResult r;
            try {
                r = detail::inflate(data, Wrapper::ZlibOrGzip, budget);
            } catch (const detail::InflateError&) {
                try {
                    r = detail::inflate(data, Wrapper::Raw, budget);
                } catch (const detail::InflateError& e) {
                    throw PdfError(std::string("flate: ") + e.what());
                }
            }
            charge(budget, r.data.size());
            data = apply_predictor(std::move(r.data), p, doc);
        } else if (name == "ASCIIHexDecode" || name == "AHx") {
            data = ascii_hex(data);
        } else if (name == "ASCII85Decode" || name == "A85") {
            data = ascii85(data);
            charge(budget, data.size());
        } else if (name == "LZWDecode" || name == "LZW") {
            data = apply_predictor(lzw(data, static_cast<int>(param_int(p, "EarlyChange", 1, doc) != 0), budget), p, doc);
        } else if (name == "RunLengthDecode" || name == "RL") {
            data = run_length(data, budget);
        } else {
            throw UnsupportedFilter("unsupported filter " + name);
        }
    }
    return data;
}

// ---------------------------------------------------------------------------
// Document

Document::Document(std::string_view bytes, std::size_t decode_budget) : bytes_(bytes), budget_(decode_budget) {
    const auto header = bytes_.substr(0, 1024).find("%PDF-");
    if (header == std::string_view::npos) throw PdfError("missing %PDF- header");

    bool ok = false;
    const auto sx = bytes_.rfind("startxref");
    if (sx != std::string_view::npos) {
        Lexer lx(bytes_, sx + 9);
        const auto t = lx.next();
        if (t.kind == Lexer::Tok::Int && t.integer >= 0 && static_cast<std::uint64_t>(t.integer) < bytes_.size()) {
            try {
                read_xref_chain(static_cast<std::size_t>(t.integer));
                ok = !xref_.empty();
            } catch (const PdfError&) {
                ok = false;
            }
        }
    }

    const auto root_ok = [&] { return trailer_.get("Root") && resolve(*trailer_.get("Root")).dict() != nullptr; };
    if (!ok || !root_ok()) {
        if (!reconstructed_) {
            for (const auto& d : reconstruct()) merge_trailer(d);
        }
        if (!root_ok()) {
            // Last resort: any catalog object.
            std::vector<int> nums;
            for (const auto& [num, e] : xref_) nums.push_back(num);
            std::sort(nums.begin(), nums.end());
            for (int num : nums) {
                const Dict* d = load(num).dict();
                const Object* type = d ? d->get("Type") : nullptr;
                if (type && type->name() && *type->name() == "Catalog") {
                    trailer_.entries.erase(std::remove_if(trailer_.entries.begin(), trailer_.entries.end(),
                                                          [](const auto& kv) { return kv.first == "Root"; }),
                                           trailer_.entries.end());
                    trailer_.entries.emplace_back("Root", Object{Ref{num, 0}});
                    break;
                }
            }
        }
    }
    if (!encrypted() && !root_ok()) throw PdfError("document catalog not found");
}

void Document::merge_trailer(const Dict& d) {
    for (const auto& [k, v] : d.entries) {
        if (trailer_.get(k) == nullptr) trailer_.entries.emplace_back(k, v);
    }
}

void Document::read_xref_chain(std::size_t offset) {
    std::set<std::size_t> seen;
    std::optional<std::size_t> next = offset;
    int sections = 0;
    while (next && seen.insert(*next).second && sections++ < kMaxXrefSections) {
        const std::size_t off = *next;
        next.reset();
        if (off >= bytes_.size()) throw PdfError("xref offset out of range");
        Lexer lx(bytes_, off);
        const auto t = lx.next();
        Dict section_trailer;
        if (t.kind == Lexer::Tok::Keyword && t.text == "xref") {
            section_trailer = read_xref_table(off);
        } else if (t.kind == Lexer::Tok::Int) {
            const Object obj = load_at(off, static_cast<int>(t.integer));
            read_xref_stream(obj);
            if (const Dict* d = obj.dict()) section_trailer = *d;
        } else {
            throw PdfError("no cross-reference data at startxref");
        }
        merge_trailer(section_trailer);
        if (const Object* xs = section_trailer.get("XRefStm")) {
            if (auto pos = xs->as_int(); pos && *pos >= 0 && static_cast<std::uint64_t>(*pos) < bytes_.size()) {
                try {
                    Lexer l2(bytes_, static_cast<std::size_t>(*pos));
                    const auto n = l2.next();
                    if (n.kind == Lexer::Tok::Int) read_xref_stream(load_at(static_cast<std::size_t>(*pos), static_cast<int>(n.integer)));
                } catch (const PdfError&) {
                }
            }
        }
        if (const Object* prev = section_trailer.get("Prev")) {
            if (auto p = prev->as_int(); p && *p >= 0) next = static_cast<std::size_t>(*p);
        }
    }
}

Dict Document::read_xref_table(std::size_t offset) {
    Lexer lx(bytes_, offset);
    lx.next();  // xref
    for (;;) {
        const auto t = lx.next();
        if (t.kind == Lexer::Tok::Keyword && t.text == "trailer") {
            const Object d = parse_object(lx, true);
            if (!d.dict()) throw PdfError("trailer is not a dictionary");
            return *d.dict();
        }
        if (t.kind != Lexer::Tok::Int) throw PdfError("malformed xref table");
        const auto count = lx.next();
        if (count.kind != Lexer::Tok::Int || t.integer < 0 || count.integer < 0 || count.integer > 10'000'000) {
            throw PdfError("malformed xref subsection");
        }
        for (std::int64_t i = 0; i < count.integer; ++i) {
            const auto off = lx.next();
            const auto gen = lx.next();
            const auto kind = lx.next();
            if (off.kind != Lexer::Tok::Int || gen.kind != Lexer::Tok::Int || kind.kind != Lexer::Tok::Keyword) {
                throw PdfError("malformed xref entry");
            }
            const std::int64_t num = t.integer + i;
            if (num > INT32_MAX) throw PdfError("object number out of range");
            const int n = static_cast<int>(num);
            if (xref_.count(n)) continue;
            if (kind.text == "n" && off.integer > 0) {
                xref_[n] = {1, static_cast<std::uint64_t>(off.integer), 0};
            } else {
                xref_[n] = {0, 0, 0};
            }
        }
    }
}

void Document::read_xref_stream(const Object& obj) {
    const Stream* s = obj.stream();
    if (s == nullptr) throw PdfError("xref stream expected");
    const Array* w = s->dict.get("W") ? s->dict.get("W")->array() : nullptr;
    if (w == nullptr || w->size() < 3) throw PdfError("xref stream without /W");
    int widths[3];
    for (int i = 0; i < 3; ++i) {
        const auto v = (*w)[static_cast<std::size_t>(i)].as_int();
        if (!v || *v < 0 || *v > 8) throw PdfError("bad /W entry");
        widths[i] = static_cast<int>(*v);
    }
    const std::size_t row = static_cast<std::size_t>(widths[0] + widths[1] + widths[2]);
    if (row == 0) throw PdfError("empty xref rows");

    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    const Object* index = s->dict.get("Index");
    if (index && index->array()) {
        const Array& a = *index->array();
        for (std::size_t i = 0; i + 1 < a.size(); i += 2) {
            ranges.emplace_back(a[i].as_int().value_or(0), a[i + 1].as_int().value_or(0));
        }
    } else {
        const Object* size = s->dict.get("Size");
        ranges.emplace_back(0, size ? size->as_int().value_or(0) : 0);
    }

    const std::string data = decode(*s);
    std::size_t pos = 0;
    auto field = [&](int width, std::uint64_t fallback) {
        if (width == 0) return fallback;
        std::uint64_t v = 0;
        for (int k = 0; k < width; ++k) v = (v << 8) | static_cast<unsigned char>(data[pos++]);
        return v;
    };
    for (const auto& [start, count] : ranges) {
        if (start < 0 || count < 0) throw PdfError("bad xref stream index");
        for (std::int64_t i = 0; i < count; ++i) {
            if (pos + row > data.size()) return;
            const std::uint64_t type = field(widths[0], 1);
            const std::uint64_t a = field(widths[1], 0);
            const std::uint64_t b = field(widths[2], 0);
            const std::int64_t num = start + i;
            if (num > INT32_MAX) return;
            const int n = static_cast<int>(num);
            if (xref_.count(n)) continue;
            if (type == 1) {
                xref_[n] = {1, a, 0};
            } else if (type == 2) {
                xref_[n] = {2, a, static_cast<std::uint32_t>(b)};
            } else {
                xref_[n] = {0, 0, 0};
            }
        }
    }
}

std::vector<Dict> Document::reconstruct() const {
    reconstructed_ = true;
    std::unordered_map<int, XrefEntry> found;
    std::vector<Dict> trailers;
    std::size_t pos = 0;
    for (;;) {
        pos = bytes_.find("obj", pos);
        if (pos == std::string_view::npos) break;
        const std::size_t kw = pos;
        pos += 3;
        if (kw > 0 && !is_pdf_whitespace(bytes_[kw - 1])) continue;
        if (pos < bytes_.size() && is_regular(bytes_[pos])) continue;
        // Walk back over "num gen ".
        std::size_t i = kw;
        while (i > 0 && is_pdf_whitespace(bytes_[i - 1])) --i;
        const std::size_t gen_end = i;
        while (i > 0 && bytes_[i - 1] >= '0' && bytes_[i - 1] <= '9') --i;
        if (i == gen_end) continue;
        while (i > 0 && is_pdf_whitespace(bytes_[i - 1])) --i;
        const std::size_t num_end = i;
        while (i > 0 && bytes_[i - 1] >= '0' && bytes_[i - 1] <= '9') --i;
        if (i == num_end || num_end - i > 9) continue;
        int num = 0;
        std::from_chars(bytes_.data() + i, bytes_.data() + num_end, num);
        found[num] = {1, i, 0};
    }
    for (std::size_t t = bytes_.find("trailer"); t != std::string_view::npos; t = bytes_.find("trailer", t + 7)) {
        try {
            Lexer lx(bytes_, t + 7);
            const Object d = parse_object(lx, true);
            if (d.dict()) trailers.push_back(*d.dict());
        } catch (const PdfError&) {
        }
    }
    if (!found.empty()) {
        // Entries that point into object streams stay valid.
        for (const auto& [num, e] : xref_) {
            if (e.type == 2 && !found.count(num)) found[num] = e;
        }
        xref_ = std::move(found);
    }
    // Cross-reference streams carry the trailer keys of newer files.
    for (const auto& [num, e] : xref_) {
        if (e.type != 1) continue;
        try {
            Lexer lx(bytes_, static_cast<std::size_t>(e.a));
            lx.next();
            lx.next();
            lx.next();
            const Object d = parse_object(lx, true);
            const Dict* dict = d.dict();
            const Object* type = dict ? dict->get("Type") : nullptr;
            if (type && type->name() && *type->name() == "XRef") trailers.push_back(*dict);
        } catch (const PdfError&) {
        }
    }
    return trailers;
}

const Object& Document::resolve(const Object& obj) const {
    const Object* cur = &obj;
    for (int hops = 0; hops < kMaxResolveDepth && cur->is_ref(); ++hops) {
        cur = &load(std::get<Ref>(cur->v).num);
    }
    return cur->is_ref() ? null_object() : *cur;
}

const Object& Document::get(const Dict& dict, std::string_view key) const {
    const Object* o = dict.get(key);
    return o ? resolve(*o) : null_object();
}

std::string Document::decode(const Stream& stream) const { return decode_stream(stream.dict, stream.raw, this, budget_); }

const Object& Document::load(int num) const {
    if (const auto it = cache_.find(num); it != cache_.end()) return it->second;
    if (resolving_.count(num) || resolving_.size() >= static_cast<std::size_t>(kMaxResolveDepth)) return null_object();
    resolving_.insert(num);
    struct Unmark {
        std::set<int>& s;
        int n;
        ~Unmark() { s.erase(n); }
    } unmark{resolving_, num};

    auto entry = xref_.find(num);
    if (entry == xref_.end() && !reconstructed_) {
        reconstruct();
        entry = xref_.find(num);
    }
    Object result;
    if (entry != xref_.end()) {
        const XrefEntry e = entry->second;
        try {
            if (e.type == 1) {
                result = load_at(static_cast<std::size_t>(e.a), num);
            } else if (e.type == 2) {
                result = load_from_objstm(static_cast<int>(std::min<std::uint64_t>(e.a, INT32_MAX)), e.b, num);
            }
        } catch (const UnsupportedFilter&) {
            result = Object{};
        } catch (const PdfError&) {
            if (!reconstructed_) {
                reconstruct();
                const auto again = xref_.find(num);
                if (again != xref_.end() && again->second.type == 1) {
                    try {
                        result = load_at(static_cast<std::size_t>(again->second.a), num);
                    } catch (const PdfError&) {
                        result = Object{};
                    }
                }
            }
        }
    }
    return cache_.emplace(num, std::move(result)).first->second;
}

Object Document::load_at(std::size_t offset, int expected_num) const {
    if (offset >= bytes_.size()) throw PdfError("object offset out of range");
    Lexer lx(bytes_, offset);
    const auto num = lx.next();
    const auto gen = lx.next();
    const auto kw = lx.next();
    if (num.kind != Lexer::Tok::Int || num.integer != expected_num || gen.kind != Lexer::Tok::Int ||
        kw.kind != Lexer::Tok::Keyword || kw.text != "obj") {
        throw PdfError("object " + std::to_string(expected_num) + " not found at its offset");
    }
    Object obj = parse_object(lx, true);
    if (!std::holds_alternative<Dict>(obj.v)) return obj;

    const std::size_t save = lx.pos();
    const auto next = lx.next();
    if (next.kind != Lexer::Tok::Keyword || next.text != "stream") {
        lx.seek(save);
        return obj;
    }
    std::size_t start = lx.pos();
    while (start < bytes_.size() && (bytes_[start] == ' ' || bytes_[start] == '\t')) ++start;
    if (start < bytes_.size() && bytes_[start] == '\r') ++start;
    if (start < bytes_.size() && bytes_[start] == '\n') ++start;

    auto stream = std::make_shared<Stream>();
    stream->dict = std::move(std::get<Dict>(obj.v));
    std::optional<std::size_t> length;
    if (const Object* l = stream->dict.get("Length")) {
        if (auto v = resolve(*l).as_int(); v && *v >= 0) length = static_cast<std::size_t>(*v);
    }
    bool found = false;
    if (length && *length <= bytes_.size() - start) {
        Lexer after(bytes_, start + *length);
        const auto t = after.next();
        if (t.kind == Lexer::Tok::Keyword && t.text.rfind("endstream", 0) == 0) {
            stream->raw = bytes_.substr(start, *length);
            found = true;
        }
    }
    if (!found) {
        const auto end = bytes_.find("endstream", start);
        if (end == std::string_view::npos) throw PdfError("unterminated stream");
        std::size_t stop = end;
        if (stop > start && bytes_[stop - 1] == '\n') --stop;
        if (stop > start && bytes_[stop - 1] == '\r') --stop;
        stream->raw = bytes_.substr(start, stop - start);
    }
    return Object{std::shared_ptr<const Stream>(std::move(stream))};
}

Object Document::load_from_objstm(int stream_num, std::uint32_t index, int num) const {
    std::shared_ptr<ObjStm> os;
    if (const auto it = objstms_.find(stream_num); it != objstms_.end()) {
        os = it->second;
    } else {
        const Object& so = load(stream_num);
        const Stream* s = so.stream();
        if (s == nullptr) throw PdfError("object stream missing");
        os = std::make_shared<ObjStm>();
        os->data = decode(*s);
        const auto n = s->dict.get("N") ? s->dict.get("N")->as_int().value_or(0) : 0;
        const auto first = s->dict.get("First") ? s->dict.get("First")->as_int().value_or(-1) : -1;
        if (n < 0 || first < 0 || static_cast<std::uint64_t>(first) > os->data.size()) throw PdfError("bad object stream header");
        Lexer lx(os->data);
        for (std::int64_t i = 0; i < n; ++i) {
            const auto a = lx.next();
            const auto b = lx.next();
            if (a.kind != Lexer::Tok::Int || b.kind != Lexer::Tok::Int || a.integer < 0 || a.integer > INT32_MAX ||
                b.integer < 0) {
                break;
            }
            os->offsets.emplace_back(static_cast<int>(a.integer), static_cast<std::size_t>(first + b.integer));
        }
        objstms_[stream_num] = os;
    }
    std::optional<std::size_t> offset;
    if (index < os->offsets.size() && os->offsets[index].first == num) {
        offset = os->offsets[index].second;
    } else {
        for (const auto& [n, off] : os->offsets) {
            if (n == num) offset = off;
        }
    }
    if (!offset || *offset >= os->data.size()) throw PdfError("object not in its object stream");
    Lexer lx(os->data, *offset);
    return parse_object(lx, true);
}

}  // namespace plainlang::ingest::pdf
