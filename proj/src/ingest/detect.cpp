#include <exception>
#include <new>

#include "plainlang/core/strings.hpp"
#include "plainlang/ingest/ingest.hpp"
#include "plainlang/text/unicode.hpp"
#include "text_util.hpp"
#include "zip.hpp"

namespace plainlang::ingest {

namespace {

constexpr std::string_view kPdfMagic = "%PDF-";
constexpr std::string_view kZipMagic = "PK\x03\x04";
constexpr std::string_view kDocxMain = "word/document.xml";
constexpr std::size_t kPdfHeaderWindow = 1024;

std::string extension(std::string_view name) {
    const auto slash = name.find_last_of("/\\");
    if (slash != std::string_view::npos) name.remove_prefix(slash + 1);
    const auto dot = name.rfind('.');
    if (dot == std::string_view::npos) return {};
    return core::ascii_lower(name.substr(dot + 1));
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

bool looks_like_text(std::string_view bytes) {
    if (!text::is_valid_utf8(bytes)) return false;
    for (unsigned char c : bytes) {
        if (c == 0) return false;
    }
    return true;
}

}  // namespace

std::string_view error_label(IngestErrorKind kind) noexcept {
    switch (kind) {
        case IngestErrorKind::UnsupportedFormat: return "unsupported_format";
        case IngestErrorKind::TooLarge: return "too_large";
        case IngestErrorKind::CorruptArchive: return "corrupt_archive";
        case IngestErrorKind::CorruptXml: return "corrupt_xml";
        case IngestErrorKind::CorruptPdf: return "corrupt_pdf";
        case IngestErrorKind::EncryptedPdf: return "encrypted_pdf";
        case IngestErrorKind::NoTextContent: return "no_text_content";
    }
    return "unknown";
}

std::string_view to_string(Format format) noexcept {
    switch (format) {
        case Format::Txt: return "txt";
        case Format::Docx: return "docx";
        case Format::Pdf: return "pdf";
    }
    return "txt";
}

Format detect_format(std::string_view bytes, std::string_view declared_name) {
    if (bytes.empty()) throw IngestError(IngestErrorKind::UnsupportedFormat, "empty input");
    const std::string ext = extension(declared_name);

    if (starts_with(bytes, kPdfMagic)) return Format::Pdf;
    if (starts_with(bytes, kZipMagic)) {
        try {
            const detail::ZipArchive zip(bytes);
            if (zip.find(kDocxMain) != nullptr) return Format::Docx;
            throw IngestError(IngestErrorKind::UnsupportedFormat, "zip archive is not a Word document");
        } catch (const IngestError& e) {
            if (e.kind() != IngestErrorKind::CorruptArchive) throw;
        }
        // Damaged archive: decide from local headers and the name so that the
        // caller reports a corrupt document rather than an unknown format.
        if (bytes.find(kDocxMain) != std::string_view::npos || ext == "docx") return Format::Docx;
        throw IngestError(IngestErrorKind::UnsupportedFormat, "unreadable zip archive");
    }
    if (ext == "pdf" && bytes.substr(0, kPdfHeaderWindow).find(kPdfMagic) != std::string_view::npos) {
        return Format::Pdf;
    }
    if (looks_like_text(bytes)) return Format::Txt;
    throw IngestError(IngestErrorKind::UnsupportedFormat, "unrecognized file format");
}

ExtractedDocument extract_txt(std::string_view bytes) {
    if (starts_with(bytes, "\xEF\xBB\xBF")) bytes.remove_prefix(3);
    if (!text::is_valid_utf8(bytes)) throw IngestError(IngestErrorKind::UnsupportedFormat, "text is not valid UTF-8");
    ExtractedDocument doc;
    doc.format = Format::Txt;
    doc.text.reserve(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (bytes[i] == '\r') {
            doc.text += '\n';
            if (i + 1 < bytes.size() && bytes[i + 1] == '\n') ++i;
        } else {
            doc.text += bytes[i];
        }
    }
    doc.page_or_paragraph_count = detail::count_blocks(doc.text);
    return doc;
}

ExtractedDocument extract_text(std::string_view bytes, std::string_view declared_name, std::size_t max_bytes) {
    if (bytes.size() > max_bytes) {
        throw IngestError(IngestErrorKind::TooLarge,
                          "upload of " + std::to_string(bytes.size()) + " bytes exceeds limit of " +
                              std::to_string(max_bytes));
    }
    try {
        switch (detect_format(bytes, declared_name)) {
            case Format::Pdf: return extract_pdf(bytes);
            case Format::Docx: return extract_docx(bytes);
            case Format::Txt: return extract_txt(bytes);
        }
        throw IngestError(IngestErrorKind::UnsupportedFormat, "unrecognized file format");
    } catch (const IngestError&) {
        throw;
    } catch (const std::bad_alloc&) {
        throw IngestError(IngestErrorKind::TooLarge, "document needs too much memory to extract");
    } catch (const std::exception& e) {
        throw IngestError(IngestErrorKind::UnsupportedFormat, std::string("extraction failed: ") + e.what());
    }
}

}  // namespace plainlang::ingest
