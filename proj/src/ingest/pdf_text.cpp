#include <cmath>
#include <map>
#include <memory>

#include "pdf_fonts.hpp"
#include "pdf_objects.hpp"
#include "plainlang/ingest/ingest.hpp"
#include "plainlang/text/unicode.hpp"
#include "text_util.hpp"

namespace plainlang::ingest {

namespace {

using namespace pdf;

constexpr int kMaxFormDepth = 8;
constexpr int kMaxPageTreeDepth = 64;
constexpr std::size_t kMaxPages = 100'000;
constexpr std::size_t kMaxOperations = 20'000'000;
constexpr std::size_t kMaxOperands = 64;
constexpr std::size_t kMaxOutput = 64u << 20;

struct Matrix {
    double a = 1, b = 0, c = 0, d = 1, e = 0, f = 0;

    // this × m (row-vector convention).
    Matrix operator*(const Matrix& m) const {
        return {a * m.a + b * m.c,       a * m.b + b * m.d,       c * m.a + d * m.c,
                c * m.b + d * m.d,       e * m.a + f * m.c + m.e, e * m.b + f * m.d + m.f};
    }
    static Matrix translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
};

struct GraphicsState {
    Matrix ctm;
    std::shared_ptr<const Font> font;
    double font_size = 0;
    double char_spacing = 0;
    double word_spacing = 0;
    double h_scale = 1;
    double leading = 0;
    double rise = 0;
};

constexpr std::string_view kLigatures[] = {"ff", "fi", "fl", "ffi", "ffl", "\u017Ft", "st"};

// Accumulates glyphs into lines and words from their device positions.
class TextSink {
public:
    void glyph(const std::u32string& text, double x0, double y0, double x1, double font_size) {
        const double fs = std::max(std::abs(font_size), 0.1);
        if (have_last_) {
            const double dy = y0 - last_y_;
            const double size = std::max(fs, last_fs_);
            const bool size_change = std::abs(fs - last_fs_) > 0.2 * size;
            if (std::abs(dy) > 0.5 * size) {
                const double gap = -dy;
                const bool wide = pitch_ > 0 ? gap > 1.4 * pitch_ : gap > 2.0 * size;
                if (gap > 0 && (wide || size_change)) {
                    paragraph();
                    pitch_ = 0;
                } else {
                    newline();
                    pitch_ = gap > 0 ? gap : 0;
                }
            } else {
                const double dx = x0 - last_x_end_;
                if (dx > 0.15 * fs || dx < -1.0 * fs) space();
            }
        }
        for (char32_t cp : text) {
            if (cp == U' ' || cp == 0xA0) {
                space();
            } else if (cp == U'\n' || cp == U'\r') {
                newline();
            } else if (cp >= 0xFB00 && cp <= 0xFB06) {
                out_ += kLigatures[cp - 0xFB00];
            } else if (cp >= 0x20 && cp != 0xFFFF && cp != 0xFEFF) {
                text::append_utf8(out_, cp);
            }
        }
        if (out_.size() > kMaxOutput) throw PdfError("extracted text exceeds limit");
        have_last_ = true;
        last_x_end_ = x1;
        last_y_ = y0;
        last_fs_ = fs;
    }

    void end_page() {
        if (!out_.empty()) out_ += "\n\n";
        have_last_ = false;
        pitch_ = 0;
    }

    const std::string& text() const noexcept { return out_; }

private:
    std::string out_;
    bool have_last_ = false;
    double last_x_end_ = 0;
    double last_y_ = 0;
    double last_fs_ = 0;
    double pitch_ = 0;

    void space() {
        if (!out_.empty() && out_.back() != ' ' && out_.back() != '\n') out_ += ' ';
    }
    void paragraph() {
        newline();
        if (!out_.empty() && out_.compare(out_.size() - std::min<std::size_t>(2, out_.size()), 2, "\n\n") != 0) out_ += '\n';
    }
    void newline() {
        while (!out_.empty() && out_.back() == ' ') out_.pop_back();
        if (!out_.empty() && out_.back() != '\n') out_ += '\n';
    }
};

class Interpreter {
public:
    Interpreter(const Document& doc, TextSink& sink) : doc_(doc), sink_(sink) {}

    void run_page(const Dict& page, const Dict* resources) {
        std::string content;
        const Object& contents = doc_.get(page, "Contents");
        if (const Stream* s = contents.stream()) {
            content = decode(*s);
        } else if (const Array* arr = contents.array()) {
            for (const Object& part : *arr) {
                if (const Stream* s = doc_.resolve(part).stream()) {
                    content += decode(*s);
                    content += '\n';
                }
            }
        }
        GraphicsState gs;
        run(content, resources, gs, 0);
    }

private:
    const Document& doc_;
    TextSink& sink_;
    std::size_t operations_ = 0;
    std::map<const void*, std::shared_ptr<const Font>> fonts_;
    std::set<const void*> active_forms_;

    std::string decode(const Stream& s) {
        try {
            return doc_.decode(s);
        } catch (const UnsupportedFilter&) {
            return {};
        }
    }

    std::shared_ptr<const Font> font(const Dict* resources, const std::string& name) {
        const Dict* fonts = resources ? doc_.get(*resources, "Font").dict() : nullptr;
        const Object* entry = fonts ? fonts->get(name) : nullptr;
        const Dict* fd = entry ? doc_.resolve(*entry).dict() : nullptr;
        if (fd == nullptr) {
            static const auto fallback = std::make_shared<const Font>(Font::fallback());
            return fallback;
        }
        if (const auto it = fonts_.find(fd); it != fonts_.end()) return it->second;
        auto loaded = std::make_shared<const Font>(Font::load(doc_, *fd));
        // Direct dictionaries live in their parent; cache only cached objects.
        if (entry->is_ref()) fonts_[fd] = loaded;
        return loaded;
    }

    void show(GraphicsState& gs, Matrix& tm, const std::string& bytes) {
        const Font& f = gs.font ? *gs.font : *font(nullptr, "");
        for (const Glyph& g : f.split(bytes)) {
            const Matrix trm = Matrix{gs.font_size * gs.h_scale, 0, 0, gs.font_size, 0, gs.rise} * tm * gs.ctm;
            const Matrix scale = tm * gs.ctm;
            const double device_size = gs.font_size * std::hypot(scale.c, scale.d);
            double tx = f.advance(g) * gs.font_size + gs.char_spacing;
            if (g.bytes == 1 && g.code == 32) tx += gs.word_spacing;
            tx *= gs.h_scale;
            tm = Matrix::translate(tx, 0) * tm;
            const Matrix end = Matrix{gs.font_size * gs.h_scale, 0, 0, gs.font_size, 0, gs.rise} * tm * gs.ctm;
            sink_.glyph(f.to_unicode(g), trm.e, trm.f, end.e, device_size);
        }
    }

    static std::optional<double> num(const std::vector<Object>& ops, std::size_t i) {
        if (i >= ops.size()) return std::nullopt;
        return ops[i].as_number();
    }

    void run(std::string_view content, const Dict* resources, GraphicsState gs, int depth) {
        std::vector<GraphicsState> stack;
        std::vector<Object> ops;
        Matrix tm, tlm;
        Lexer lx(content);

        auto next_line = [&](double tx, double ty) {
            tlm = Matrix::translate(tx, ty) * tlm;
            tm = tlm;
        };

        while (true) {
            Object obj;
            const std::size_t start = lx.pos();
            try {
                obj = parse_object(lx, false);
            } catch (const PdfError&) {
                if (lx.pos() >= content.size()) break;
                if (lx.pos() <= start) lx.seek(start + 1);
                ops.clear();
                continue;
            }
            if (obj.is_null() && lx.pos() >= content.size()) break;
            const Keyword* kw = obj.keyword();
            if (kw == nullptr) {
                if (ops.size() >= kMaxOperands) ops.clear();
                ops.push_back(std::move(obj));
                continue;
            }
            if (++operations_ > kMaxOperations) throw PdfError("too many content operations");
            const std::string& op = kw->value;
            const std::size_t n = ops.size();

            if (op == "BT") {
                tm = tlm = Matrix{};
            } else if (op == "Tf" && n >= 2) {
                if (const auto* name = ops[n - 2].name()) gs.font = font(resources, *name);
                gs.font_size = num(ops, n - 1).value_or(gs.font_size);
            } else if (op == "Tc" && n >= 1) {
                gs.char_spacing = num(ops, n - 1).value_or(0);
            } else if (op == "Tw" && n >= 1) {
                gs.word_spacing = num(ops, n - 1).value_or(0);
            } else if (op == "Tz" && n >= 1) {
                gs.h_scale = num(ops, n - 1).value_or(100) / 100.0;
            } else if (op == "TL" && n >= 1) {
                gs.leading = num(ops, n - 1).value_or(0);
            } else if (op == "Ts" && n >= 1) {
                gs.rise = num(ops, n - 1).value_or(0);
            } else if (op == "Td" && n >= 2) {
                next_line(num(ops, n - 2).value_or(0), num(ops, n - 1).value_or(0));
            } else if (op == "TD" && n >= 2) {
                gs.leading = -num(ops, n - 1).value_or(0);
                next_line(num(ops, n - 2).value_or(0), num(ops, n - 1).value_or(0));
            } else if (op == "Tm" && n >= 6) {
                Matrix m;
                double* fields[] = {&m.a, &m.b, &m.c, &m.d, &m.e, &m.f};
                for (std::size_t i = 0; i < 6; ++i) *fields[i] = num(ops, n - 6 + i).value_or(0);
                tm = tlm = m;
            } else if (op == "T*") {
                next_line(0, -gs.leading);
            } else if (op == "Tj" && n >= 1) {
                if (const auto* s = ops[n - 1].string()) show(gs, tm, *s);
            } else if (op == "'" && n >= 1) {
                next_line(0, -gs.leading);
                if (const auto* s = ops[n - 1].string()) show(gs, tm, *s);
            } else if (op == "\"" && n >= 3) {
                gs.word_spacing = num(ops, n - 3).value_or(gs.word_spacing);
                gs.char_spacing = num(ops, n - 2).value_or(gs.char_spacing);
                next_line(0, -gs.leading);
                if (const auto* s = ops[n - 1].string()) show(gs, tm, *s);
            } else if (op == "TJ" && n >= 1) {
                if (const Array* arr = ops[n - 1].array()) {
                    for (const Object& item : *arr) {
                        if (const auto* s = item.string()) {
                            show(gs, tm, *s);
                        } else if (auto adj = item.as_number()) {
                            const double tx = -*adj / 1000.0 * gs.font_size * gs.h_scale;
                            tm = Matrix::translate(tx, 0) * tm;
                        }
                    }
                }
            } else if (op == "cm" && n >= 6) {
                Matrix m;
                double* fields[] = {&m.a, &m.b, &m.c, &m.d, &m.e, &m.f};
                for (std::size_t i = 0; i < 6; ++i) *fields[i] = num(ops, n - 6 + i).value_or(0);
                gs.ctm = m * gs.ctm;
            } else if (op == "q") {
                if (stack.size() < 256) stack.push_back(gs);
            } else if (op == "Q") {
                if (!stack.empty()) {
                    gs = stack.back();
                    stack.pop_back();
                }
            } else if (op == "Do" && n >= 1) {
                if (const auto* name = ops[n - 1].name()) draw_xobject(resources, *name, gs, depth);
            } else if (op == "BI") {
                skip_inline_image(lx, content);
            }
            ops.clear();
        }
    }

    void draw_xobject(const Dict* resources, const std::string& name, const GraphicsState& gs, int depth) {
        if (depth >= kMaxFormDepth || resources == nullptr) return;
        const Dict* xobjects = doc_.get(*resources, "XObject").dict();
        const Object* entry = xobjects ? xobjects->get(name) : nullptr;
        if (entry == nullptr) return;
        const Stream* form = doc_.resolve(*entry).stream();
        if (form == nullptr) return;
        const auto* subtype = doc_.get(form->dict, "Subtype").name();
        if (subtype == nullptr || *subtype != "Form") return;
        if (!active_forms_.insert(form).second) return;

        GraphicsState inner = gs;
        if (const Array* m = doc_.get(form->dict, "Matrix").array(); m && m->size() == 6) {
            Matrix fm;
            double* fields[] = {&fm.a, &fm.b, &fm.c, &fm.d, &fm.e, &fm.f};
            for (std::size_t i = 0; i < 6; ++i) *fields[i] = doc_.resolve((*m)[i]).as_number().value_or(i == 0 || i == 3 ? 1 : 0);
            inner.ctm = fm * inner.ctm;
        }
        const Dict* form_resources = doc_.get(form->dict, "Resources").dict();
        try {
            run(decode(*form), form_resources ? form_resources : resources, inner, depth + 1);
        } catch (...) {
            active_forms_.erase(form);
            throw;
        }
        active_forms_.erase(form);
    }

    // Inline image data is binary; skip past "ID ... EI".
    static void skip_inline_image(Lexer& lx, std::string_view content) {
        while (true) {
            const auto t = lx.next();
            if (t.kind == Lexer::Tok::End) return;
            if (t.kind == Lexer::Tok::Keyword && t.text == "ID") break;
        }
        std::size_t pos = lx.pos() + 1;
        while (pos + 2 <= content.size()) {
            const auto ei = content.find("EI", pos);
            if (ei == std::string_view::npos) break;
            const bool before = ei > 0 && is_pdf_whitespace(content[ei - 1]);
            const bool after = ei + 2 == content.size() || is_pdf_whitespace(content[ei + 2]);
            if (before && after) {
                lx.seek(ei + 2);
                return;
            }
            pos = ei + 1;
        }
        lx.seek(content.size());
    }
};

struct PageRef {
    const Dict* page;
    const Dict* resources;
};

void collect_pages(const Document& doc, const Dict& node, const Dict* inherited, int depth, std::set<const void*>& seen,
                   std::vector<PageRef>& pages) {
    if (depth > kMaxPageTreeDepth || pages.size() >= kMaxPages || !seen.insert(&node).second) return;
    const Dict* resources = doc.get(node, "Resources").dict();
    if (resources == nullptr) resources = inherited;
    const Array* kids = doc.get(node, "Kids").array();
    const auto* type = doc.get(node, "Type").name();
    if (kids && !(type && *type == "Page")) {
        for (const Object& kid : *kids) {
            if (const Dict* d = doc.resolve(kid).dict()) collect_pages(doc, *d, resources, depth + 1, seen, pages);
        }
        return;
    }
    pages.push_back({&node, resources});
}

}  // namespace

ExtractedDocument extract_pdf(std::string_view bytes) {
    try {
        const Document doc(bytes);
        if (doc.encrypted()) throw IngestError(IngestErrorKind::EncryptedPdf, "pdf: document is encrypted");

        const Dict* catalog = doc.get(doc.trailer(), "Root").dict();
        const Dict* root = catalog ? doc.get(*catalog, "Pages").dict() : nullptr;
        if (root == nullptr) throw IngestError(IngestErrorKind::CorruptPdf, "pdf: page tree not found");

        std::vector<PageRef> pages;
        std::set<const void*> seen;
        collect_pages(doc, *root, nullptr, 0, seen, pages);

        TextSink sink;
        Interpreter interp(doc, sink);
        ExtractedDocument out;
        out.format = Format::Pdf;
        std::size_t failed_pages = 0;
        for (const auto& p : pages) {
            try {
                interp.run_page(*p.page, p.resources);
            } catch (const UnsupportedFilter&) {
                ++failed_pages;
            }
            sink.end_page();
        }
        out.page_or_paragraph_count = pages.size();
        out.text = detail::normalize_layout(detail::sanitize_utf8(sink.text()));
        if (failed_pages > 0) {
            out.warnings.push_back(std::to_string(failed_pages) + " page(s) used unsupported stream filters");
        }
        if (out.text.empty()) {
            throw IngestError(IngestErrorKind::NoTextContent, "pdf: no extractable text (scanned or image-only?)");
        }
        return out;
    } catch (const IngestError&) {
        throw;
    } catch (const PdfError& e) {
        throw IngestError(IngestErrorKind::CorruptPdf, std::string("pdf: ") + e.what());
    } catch (const std::bad_alloc&) {
        throw IngestError(IngestErrorKind::CorruptPdf, "pdf: out of memory while parsing");
    } catch (const std::exception& e) {
        throw IngestError(IngestErrorKind::CorruptPdf, std::string("pdf: ") + e.what());
    }
}

}  // namespace plainlang::ingest
