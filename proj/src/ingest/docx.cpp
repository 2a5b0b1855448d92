#include <algorithm>

#include "plainlang/ingest/ingest.hpp"
#include "text_util.hpp"
#include "xml.hpp"
#include "zip.hpp"

namespace plainlang::ingest {

namespace {

constexpr std::string_view kMainDocument = "word/document.xml";
constexpr std::string_view kWordNs = "http://schemas.openxmlformats.org/wordprocessingml/2006/main";
constexpr std::string_view kWordStrictNs = "http://purl.oclc.org/ooxml/wordprocessingml/main";

bool is_word(const detail::XmlReader& r, std::string_view local) {
    return r.local() == local && (r.ns() == kWordNs || r.ns() == kWordStrictNs);
}

bool is_side_part(std::string_view name) {
    for (std::string_view prefix : {"word/header", "word/footer", "word/footnotes", "word/endnotes", "word/comments"}) {
        if (name.rfind(prefix, 0) == 0 && name.size() > 4 && name.substr(name.size() - 4) == ".xml") return true;
    }
    return false;
}

}  // namespace

ExtractedDocument extract_docx(std::string_view bytes) {
    const detail::ZipArchive zip(bytes);
    const auto xml = zip.read(kMainDocument);
    if (!xml) throw IngestError(IngestErrorKind::CorruptArchive, "docx: missing " + std::string(kMainDocument));

    ExtractedDocument doc;
    doc.format = Format::Docx;
    bool saw_table = false;
    bool saw_drawing = false;

    std::string out;
    detail::XmlReader reader(*xml);
    // Parent chain of Word elements, used to tell a run's w:tab from a
    // tab-stop definition.
    std::vector<std::string> stack;
    bool in_text = false;
    for (auto ev = reader.next(); ev != detail::XmlReader::Event::End; ev = reader.next()) {
        switch (ev) {
            case detail::XmlReader::Event::StartElement: {
                const bool word = reader.ns() == kWordNs || reader.ns() == kWordStrictNs;
                const std::string parent = stack.empty() ? "" : stack.back();
                stack.push_back(word ? reader.local() : "");
                if (!word) {
                    if (reader.local() == "drawing" || reader.local() == "pict" || reader.local() == "graphic") {
                        saw_drawing = true;
                    }
                    break;
                }
                if (is_word(reader, "t")) {
                    in_text = true;
                } else if (is_word(reader, "tab") && parent == "r") {
                    out += ' ';
                } else if ((is_word(reader, "br") || is_word(reader, "cr")) && parent == "r") {
                    out += '\n';
                } else if (is_word(reader, "noBreakHyphen")) {
                    out += '-';
                } else if (is_word(reader, "tbl")) {
                    saw_table = true;
                } else if (is_word(reader, "drawing") || is_word(reader, "pict") || is_word(reader, "object")) {
                    saw_drawing = true;
                }
                break;
            }
            case detail::XmlReader::Event::EndElement:
                if (is_word(reader, "t")) {
                    in_text = false;
                } else if (is_word(reader, "p")) {
                    out += "\n\n";
                } else if (is_word(reader, "tc")) {
                    out += "\n\n";
                }
                if (!stack.empty()) stack.pop_back();
                break;
            case detail::XmlReader::Event::Text:
                if (in_text) out += reader.text();
                break;
            case detail::XmlReader::Event::End:
                break;
        }
    }

    doc.text = detail::normalize_layout(detail::sanitize_utf8(out));
    if (doc.text.empty()) throw IngestError(IngestErrorKind::NoTextContent, "docx: document body has no text");
    doc.page_or_paragraph_count = detail::count_blocks(doc.text);

    if (saw_table) doc.warnings.emplace_back("tables were flattened into paragraphs in document order");
    if (saw_drawing) doc.warnings.emplace_back("images and drawings were skipped");
    if (std::any_of(zip.entries().begin(), zip.entries().end(), [](const auto& e) { return is_side_part(e.name); })) {
        doc.warnings.emplace_back("headers, footers, notes and comments were skipped");
    }
    return doc;
}

}  // namespace plainlang::ingest
