#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "plainlang/core/error.hpp"

namespace plainlang::ingest {

enum class IngestErrorKind {
    UnsupportedFormat,
    TooLarge,
    CorruptArchive,
    CorruptXml,
    CorruptPdf,
    EncryptedPdf,
    NoTextContent,
};
using IngestError = CodedError<IngestErrorKind>;

std::string_view error_label(IngestErrorKind kind) noexcept;

enum class Format { Txt, Docx, Pdf };

std::string_view to_string(Format format) noexcept;

struct ExtractedDocument {
    std::string text;
    Format format = Format::Txt;
    /// Pages for PDF, non-empty paragraphs for DOCX, blank-line separated
    /// blocks for plain text.
    std::size_t page_or_paragraph_count = 0;
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kDefaultMaxUploadBytes = 10 * 1024 * 1024;

/// Magic-number detection; the extension of `declared_name` only breaks ties.
/// Throws IngestError{UnsupportedFormat}.
Format detect_format(std::string_view bytes, std::string_view declared_name = {});

/// Throws IngestError{CorruptArchive, CorruptXml, NoTextContent}.
ExtractedDocument extract_docx(std::string_view bytes);

/// Throws IngestError{CorruptPdf, EncryptedPdf, NoTextContent}.
ExtractedDocument extract_pdf(std::string_view bytes);

/// UTF-8 text with CRLF and lone CR turned into LF and a leading BOM removed.
/// Throws IngestError{UnsupportedFormat} for invalid UTF-8.
ExtractedDocument extract_txt(std::string_view bytes);

/// Detects the format and dispatches. Only IngestError escapes.
ExtractedDocument extract_text(std::string_view bytes, std::string_view declared_name = {},
                               std::size_t max_bytes = kDefaultMaxUploadBytes);

}  // namespace plainlang::ingest
