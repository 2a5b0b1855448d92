#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <random>
#include <zlib.h>

#include "doctest.h"
#include "inflate.hpp"
#include "plainlang/ingest/ingest.hpp"
#include "plainlang/text/unicode.hpp"
#include "support/fixtures.hpp"
#include "xml.hpp"
#include "zip.hpp"

using namespace plainlang;
using namespace plainlang::ingest;

namespace {

IngestErrorKind kind_of(std::string_view bytes, std::string_view name = {}) {
    try {
        extract_text(bytes, name);
    } catch (const IngestError& e) {
        return e.kind();
    }
    FAIL("expected IngestError");
    return IngestErrorKind::UnsupportedFormat;
}

// Whitespace runs without a blank line become one space; runs containing a
// blank line become a paragraph break.
std::string normalize_ws(std::string_view s) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == ' ' || s[i] == '\n' || s[i] == '\t' || s[i] == '\r') {
            int newlines = 0;
            while (i < s.size() && (s[i] == ' ' || s[i] == '\n' || s[i] == '\t' || s[i] == '\r')) {
                if (s[i] == '\n') ++newlines;
                ++i;
            }
            if (!out.empty() && i < s.size()) out += newlines >= 2 ? "\n\n" : " ";
        } else {
            out += s[i++];
        }
    }
    return out;
}

void put16(std::string& s, std::uint16_t v) {
    s += static_cast<char>(v & 0xFF);
    s += static_cast<char>(v >> 8);
}

void put32(std::string& s, std::uint32_t v) {
    put16(s, static_cast<std::uint16_t>(v & 0xFFFF));
    put16(s, static_cast<std::uint16_t>(v >> 16));
}

std::string raw_deflate(std::string_view data) {
    z_stream zs{};
    deflateInit2(&zs, 9, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY);
    std::string out(deflateBound(&zs, data.size()) + 16, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    return out;
}

std::string zlib_compress(std::string_view data) {
    uLongf len = compressBound(data.size());
    std::string out(len, '\0');
    compress(reinterpret_cast<Bytef*>(out.data()), &len, reinterpret_cast<const Bytef*>(data.data()), data.size());
    out.resize(len);
    return out;
}

std::string make_zip(const std::vector<std::pair<std::string, std::string>>& files, bool deflate = true) {
    std::string local;
    std::string central;
    for (const auto& [name, content] : files) {
        const std::string body = deflate ? raw_deflate(content) : content;
        const auto offset = static_cast<std::uint32_t>(local.size());
        const std::uint32_t crc = detail::crc32(content);
        auto header = [&](std::string& s, bool central_entry) {
            put32(s, central_entry ? 0x02014b50 : 0x04034b50);
            if (central_entry) put16(s, 20);
            put16(s, 20);
            put16(s, 0);
            put16(s, deflate ? 8 : 0);
            put16(s, 0);
            put16(s, 0);
            put32(s, crc);
            put32(s, static_cast<std::uint32_t>(body.size()));
            put32(s, static_cast<std::uint32_t>(content.size()));
            put16(s, static_cast<std::uint16_t>(name.size()));
            put16(s, 0);
            if (central_entry) {
                put16(s, 0);
                put16(s, 0);
                put16(s, 0);
                put32(s, 0);
                put32(s, offset);
            }
            s += name;
        };
        header(local, false);
        local += body;
        header(central, true);
    }
    std::string out = local + central;
    put32(out, 0x06054b50);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(files.size()));
    put16(out, static_cast<std::uint16_t>(files.size()));
    put32(out, static_cast<std::uint32_t>(central.size()));
    put32(out, static_cast<std::uint32_t>(local.size()));
    put16(out, 0);
    return out;
}

std::string word_xml(std::string_view body) {
    return std::string(R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)"
                       R"(<w:document xmlns:w="http://schemas.openxmlformats.org/wordprocessingml/2006/main"><w:body>)") +
           std::string(body) + "</w:body></w:document>";
}

// Assembles a PDF from numbered object bodies with a correct xref table.
std::string make_pdf(const std::vector<std::string>& objects, std::string_view trailer_extra = {}) {
    std::string out = "%PDF-1.4\n%\xE2\xE3\xCF\xD3\n";
    std::vector<std::size_t> offsets;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        offsets.push_back(out.size());
        out += std::to_string(i + 1) + " 0 obj\n" + objects[i] + "\nendobj\n";
    }
    const std::size_t xref = out.size();
    out += "xref\n0 " + std::to_string(objects.size() + 1) + "\n0000000000 65535 f \n";
    for (std::size_t off : offsets) {
        char line[32];
        std::snprintf(line, sizeof line, "%010zu 00000 n \n", off);
        out += line;
    }
    out += "trailer\n<< /Size " + std::to_string(objects.size() + 1) + " /Root 1 0 R " + std::string(trailer_extra) +
           " >>\nstartxref\n" + std::to_string(xref) + "\n%%EOF\n";
    return out;
}

std::string stream_obj(std::string_view dict_extra, std::string_view data) {
    return "<< /Length " + std::to_string(data.size()) + " " + std::string(dict_extra) + " >>\nstream\n" +
           std::string(data) + "\nendstream";
}

// Catalog, page tree, one page with Helvetica as /F1 and the given content.
std::string simple_pdf(std::string_view content, std::string_view font = "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>",
                       std::string_view extra_resources = {}) {
    return make_pdf({"<< /Type /Catalog /Pages 2 0 R >>", "<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
                     "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Contents 4 0 R /Resources << /Font << /F1 5 0 R >> " +
                         std::string(extra_resources) + " >> >>",
                     stream_obj("", content), std::string(font)});
}

struct ManifestEntry {
    std::string file;
    std::string format;
    std::optional<std::string> text;
    std::optional<std::string> error;
    std::vector<std::string> warnings_contain;
};

std::vector<ManifestEntry> manifest() {
    const auto j = nlohmann::json::parse(fixtures::read("ingest/manifest.json"));
    std::vector<ManifestEntry> out;
    for (const auto& e : j) {
        ManifestEntry m;
        m.file = e.at("file");
        m.format = e.at("format");
        if (e.contains("text")) m.text = e["text"].get<std::string>();
        if (e.contains("error")) m.error = e["error"].get<std::string>();
        if (e.contains("warnings_contain")) m.warnings_contain = e["warnings_contain"].get<std::vector<std::string>>();
        out.push_back(std::move(m));
    }
    return out;
}

std::string kind_name(IngestErrorKind k) {
    switch (k) {
        case IngestErrorKind::UnsupportedFormat: return "UnsupportedFormat";
        case IngestErrorKind::TooLarge: return "TooLarge";
        case IngestErrorKind::CorruptArchive: return "CorruptArchive";
        case IngestErrorKind::CorruptXml: return "CorruptXml";
        case IngestErrorKind::CorruptPdf: return "CorruptPdf";
        case IngestErrorKind::EncryptedPdf: return "EncryptedPdf";
        case IngestErrorKind::NoTextContent: return "NoTextContent";
    }
    return "?";
}

void check_document_invariants(const ExtractedDocument& doc) {
    CHECK(text::is_valid_utf8(doc.text));
    CHECK(doc.text.find("\n\n\n") == std::string::npos);
    CHECK(doc.text.find('\r') == std::string::npos);
}

}  // namespace

TEST_CASE("fixtures round-trip to their source text") {
    const auto entries = manifest();
    REQUIRE(entries.size() >= 10);
    for (const auto& m : entries) {
        CAPTURE(m.file);
        const std::string bytes = fixtures::read("ingest/" + m.file);
        CHECK(to_string(detect_format(bytes, m.file)) == m.format);
        if (m.error) {
            std::string got;
            try {
                extract_text(bytes, m.file);
                got = "no error";
            } catch (const IngestError& e) {
                got = kind_name(e.kind());
            }
            CHECK(got == *m.error);
            continue;
        }
        const auto doc = extract_text(bytes, m.file);
        check_document_invariants(doc);
        CHECK(to_string(doc.format) == m.format);
        CHECK(normalize_ws(doc.text) == normalize_ws(*m.text));
        for (const auto& w : m.warnings_contain) {
            bool found = false;
            for (const auto& have : doc.warnings) found = found || have.find(w) != std::string::npos;
            CHECK_MESSAGE(found, "missing warning containing " << w);
        }
    }
}

TEST_CASE("exact outputs for the minimal fixtures") {
    const auto hello = extract_text(fixtures::read("ingest/hello.docx"));
    CHECK(hello.text == "Hello world");
    CHECK(hello.format == Format::Docx);
    CHECK(hello.page_or_paragraph_count == 1);

    const auto two = extract_docx(fixtures::read("ingest/two_paragraphs.docx"));
    CHECK(two.text == "A\n\nB");
    CHECK(two.page_or_paragraph_count == 2);

    const auto pdf = extract_text(fixtures::read("ingest/hello_helvetica.pdf"));
    CHECK(pdf.text == "Hello world");
    CHECK(pdf.format == Format::Pdf);
    CHECK(pdf.page_or_paragraph_count == 1);

    const auto multi = extract_pdf(fixtures::read("ingest/multipage.pdf"));
    CHECK(multi.page_or_paragraph_count == 3);
    CHECK(multi.text ==
          "Page one, first line.\nPage one, second line.\n\nPage two has a single line.\n\n"
          "Third page: 42% done, (parens) and \\backslash.");

    const auto runs = extract_docx(fixtures::read("ingest/runs_and_parts.docx"));
    CHECK(runs.text.find("Running header") == std::string::npos);
    CHECK(runs.text.find("Page footer") == std::string::npos);
    CHECK(runs.text.find("First line\nsecond line") != std::string::npos);
}

TEST_CASE("detect_format") {
    CHECK(detect_format("%PDF-1.7\n...") == Format::Pdf);
    CHECK(detect_format("plain words", "x.txt") == Format::Txt);
    CHECK(detect_format("plain words") == Format::Txt);
    CHECK(detect_format(fixtures::read("ingest/hello.docx"), "renamed.bin") == Format::Docx);

    const std::string other_zip = make_zip({{"content.xml", "<a/>"}, {"mimetype", "x"}});
    CHECK(kind_of(other_zip, "doc.zip") == IngestErrorKind::UnsupportedFormat);
    try {
        detect_format(other_zip);
        FAIL("expected UnsupportedFormat");
    } catch (const IngestError& e) {
        CHECK(e.kind() == IngestErrorKind::UnsupportedFormat);
    }

    CHECK(kind_of("") == IngestErrorKind::UnsupportedFormat);
    CHECK(kind_of(std::string("\x00\x01\x02\xFF\xFE", 5)) == IngestErrorKind::UnsupportedFormat);
    CHECK(kind_of("\xC3\x28 invalid utf8") == IngestErrorKind::UnsupportedFormat);

    // Junk before the header is tolerated only when the name says PDF.
    const std::string prefixed = "\x01\x02junk\n" + fixtures::read("ingest/hello_helvetica.pdf");
    CHECK(detect_format(prefixed, "report.PDF") == Format::Pdf);
    CHECK(extract_text(prefixed, "report.pdf").text == "Hello world");
}

TEST_CASE("txt normalization") {
    CHECK(extract_text("a\r\nb").text == "a\nb");
    CHECK(extract_text("a\rb\r\n\r\nc").text == "a\nb\n\nc");
    CHECK(extract_text("\xEF\xBB\xBFhello").text == "hello");
    const auto doc = extract_text("one\n\ntwo\n\n\nthree", "notes.txt");
    CHECK(doc.format == Format::Txt);
    CHECK(doc.page_or_paragraph_count == 3);
}

TEST_CASE("size limit") {
    const std::string big(2048, 'a');
    CHECK(extract_text(big, "a.txt", 4096).text.size() == 2048);
    try {
        extract_text(big, "a.txt", 1024);
        FAIL("expected TooLarge");
    } catch (const IngestError& e) {
        CHECK(e.kind() == IngestErrorKind::TooLarge);
        CHECK(error_label(e.kind()) == "too_large");
    }
}

TEST_CASE("truncated and damaged archives") {
    const std::string docx = fixtures::read("ingest/hello.docx");
    for (std::size_t cut : {docx.size() / 2, docx.size() - 10, std::size_t{30}, std::size_t{4}}) {
        CAPTURE(cut);
        CHECK(kind_of(docx.substr(0, cut), "hello.docx") == IngestErrorKind::CorruptArchive);
    }
    // Without the name, a truncated docx is still recognised by its local headers.
    CHECK(kind_of(docx.substr(0, docx.size() - 10)) == IngestErrorKind::CorruptArchive);

    std::string bad_crc = make_zip({{"word/document.xml", word_xml("<w:p><w:r><w:t>x</w:t></w:r></w:p>")}}, false);
    const auto pos = bad_crc.find("<w:t>x");
    bad_crc[pos + 5] = 'y';
    CHECK(kind_of(bad_crc) == IngestErrorKind::CorruptArchive);
}

TEST_CASE("synthetic docx parsing") {
    auto extract = [](std::string_view body, bool deflate = true) {
        return extract_docx(make_zip({{"word/document.xml", word_xml(body)}}, deflate));
    };
    CHECK(extract("<w:p><w:r><w:t>Hello</w:t></w:r><w:r><w:t xml:space=\"preserve\"> world</w:t></w:r></w:p>").text ==
          "Hello world");
    CHECK(extract("<w:p><w:r><w:t>a</w:t><w:tab/><w:t>b</w:t></w:r></w:p>", false).text == "a b");
    CHECK(extract("<w:p><w:r><w:t>R&amp;D &lt;x&gt; &#169; &#x2014;</w:t></w:r></w:p>").text == "R&D <x> © —");
    CHECK(extract("<w:p><w:r><w:t><![CDATA[<raw>]]></w:t></w:r></w:p><!-- note --><w:p/><w:p><w:r><w:t>z</w:t></w:r></w:p>")
              .text == "<raw>\n\nz");

    // Strict namespace and a different prefix.
    const std::string strict =
        R"(<?xml version="1.0"?><d:document xmlns:d="http://purl.oclc.org/ooxml/wordprocessingml/main">)"
        R"(<d:body><d:p><d:r><d:t>strict</d:t></d:r></d:p></d:body></d:document>)";
    CHECK(extract_docx(make_zip({{"word/document.xml", strict}})).text == "strict");

    // Text outside the Word namespace is not body text.
    CHECK(extract("<w:p><w:r><w:t>kept</w:t></w:r><x:t xmlns:x=\"urn:other\">dropped</x:t></w:p>").text == "kept");

    try {
        extract("<w:p><w:r></w:p>");
        FAIL("expected CorruptXml");
    } catch (const IngestError& e) {
        CHECK(e.kind() == IngestErrorKind::CorruptXml);
    }
    try {
        extract("<w:p/>");
        FAIL("expected NoTextContent");
    } catch (const IngestError& e) {
        CHECK(e.kind() == IngestErrorKind::NoTextContent);
    }
    try {
        extract_docx(make_zip({{"word/other.xml", "<a/>"}}));
        FAIL("expected CorruptArchive");
    } catch (const IngestError& e) {
        CHECK(e.kind() == IngestErrorKind::CorruptArchive);
    }
}

TEST_CASE("xml reader rejects entity expansion and bad nesting") {
    using detail::XmlReader;
    auto drain = [](std::string_view doc) {
        XmlReader r(doc);
        while (r.next() != XmlReader::Event::End) {
        }
    };
    CHECK_NOTHROW(drain("<?xml version=\"1.0\"?><!DOCTYPE a><a b='1'>t</a>"));
    CHECK_THROWS_AS(drain("<a>&lol;</a>"), IngestError);
    CHECK_THROWS_AS(drain("<a></b>"), IngestError);
    CHECK_THROWS_AS(drain("<a>"), IngestError);
    CHECK_THROWS_AS(drain("<a/><b/>"), IngestError);
    CHECK_THROWS_AS(drain("<p:a/>"), IngestError);
    std::string deep;
    for (int i = 0; i < 2000; ++i) deep += "<a>";
    CHECK_THROWS_AS(drain(deep), IngestError);
}

TEST_CASE("inflate limits") {
    const std::string zeros(1 << 20, '\0');
    const std::string packed = zlib_compress(zeros);
    CHECK(detail::inflate(packed, detail::Wrapper::ZlibOrGzip, 2 << 20).data == zeros);
    CHECK_THROWS_AS(detail::inflate(packed, detail::Wrapper::ZlibOrGzip, 1000), detail::InflateError);
    const auto partial = detail::inflate(packed.substr(0, packed.size() / 2), detail::Wrapper::ZlibOrGzip, 2 << 20);
    CHECK_FALSE(partial.complete);
    CHECK(detail::crc32("123456789") == 0xCBF43926u);
}

TEST_CASE("pdf text operators") {
    SUBCASE("Tj, TJ kerning and word gaps") {
        const auto doc = extract_pdf(simple_pdf("BT /F1 12 Tf 72 700 Td [(Hel) -20 (lo)] TJ [( ) 0 (wor) -3000 (ld)] TJ ET"));
        CHECK(doc.text == "Hello wor ld");
    }
    SUBCASE("line moves with T*, quote operators and TD") {
        const auto doc = extract_pdf(simple_pdf(
            "BT /F1 10 Tf 14 TL 72 700 Td (one) Tj T* (two) Tj (three) ' 1 0 (four) \" 0 -30 TD (five) Tj ET"));
        CHECK(doc.text == "one\ntwo\nthree\nfour\n\nfive");
    }
    SUBCASE("Tm positions and a separate text object on the same line") {
        const auto doc = extract_pdf(
            simple_pdf("BT /F1 12 Tf 1 0 0 1 72 700 Tm (left) Tj ET BT /F1 12 Tf 1 0 0 1 300 700 Tm (right) Tj ET"));
        CHECK(doc.text == "left right");
    }
    SUBCASE("hex strings, escapes and octal codes") {
        const auto doc = extract_pdf(simple_pdf("BT /F1 12 Tf 72 700 Td <48656C6C6F> Tj ( \\(x\\)\\101\\\\) Tj ET"));
        CHECK(doc.text == "Hello (x)A\\");
    }
    SUBCASE("WinAnsi upper half") {
        const auto doc = extract_pdf(simple_pdf("BT /F1 12 Tf 72 700 Td (\\223quoted\\224 caf\\351 \\200) Tj ET",
                                                "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>"));
        CHECK(doc.text == "“quoted” café €");
    }
    SUBCASE("Differences array with glyph names") {
        const auto doc = extract_pdf(simple_pdf(
            "BT /F1 12 Tf 72 700 Td (\\001\\002\\003bc) Tj ET",
            "<< /Type /Font /Subtype /Type1 /BaseFont /Foo /Encoding << /Differences [1 /fi /uni00E9 /a.sc] >> >>"));
        CHECK(doc.text == "fiéabc");
    }
    SUBCASE("ToUnicode CMap on a composite font") {
        const std::string cmap =
            "/CIDInit /ProcSet findresource begin 12 dict begin begincmap\n"
            "1 begincodespacerange <0000> <FFFF> endcodespacerange\n"
            "2 beginbfchar <0001> <0048> <0002> <0069> endbfchar\n"
            "1 beginbfrange <0010> <0012> <0061> endbfrange\n"
            "1 beginbfrange <0020> <0021> [<00660069> <00DF>] endbfrange\n"
            "endcmap end end\n";
        const std::string pdf = make_pdf(
            {"<< /Type /Catalog /Pages 2 0 R >>", "<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
             "<< /Type /Page /Parent 2 0 R /Contents 4 0 R /Resources << /Font << /F1 5 0 R >> >> >>",
             stream_obj("", "BT /F1 12 Tf 72 700 Td <000100020010001100120020> Tj <0021> Tj ET"),
             "<< /Type /Font /Subtype /Type0 /BaseFont /X /Encoding /Identity-H /DescendantFonts [6 0 R] /ToUnicode 7 0 R >>",
             "<< /Type /Font /Subtype /CIDFontType2 /BaseFont /X /DW 500 >>", stream_obj("", cmap)});
        CHECK(extract_pdf(pdf).text == "Hiabcfiß");
    }
    SUBCASE("flate content, inherited resources and an array of content streams") {
        const std::string part1 = zlib_compress("BT /F1 12 Tf 72 700 Td (first) Tj ET");
        const std::string pdf = make_pdf(
            {"<< /Type /Catalog /Pages 2 0 R >>",
             "<< /Type /Pages /Kids [3 0 R] /Count 1 /Resources << /Font << /F1 6 0 R >> >> >>",
             "<< /Type /Page /Parent 2 0 R /Contents [4 0 R 5 0 R] >>", stream_obj("/Filter /FlateDecode", part1),
             stream_obj("/Filter [/ASCIIHexDecode]", "4254202F46312031322054662037322036383020546420287365636F6E642920546A204554>"),
             "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>"});
        CHECK(extract_pdf(pdf).text == "first\nsecond");
    }
    SUBCASE("form xobjects and inline images") {
        const std::string pdf = make_pdf(
            {"<< /Type /Catalog /Pages 2 0 R >>", "<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
             "<< /Type /Page /Parent 2 0 R /Contents 4 0 R /Resources << /Font << /F1 5 0 R >> /XObject << /X1 6 0 R >> >> >>",
             stream_obj("", "BI /W 2 /H 2 /BPC 8 /CS /G ID \x01(Tj) EI\xFF\nEI Q BT /F1 12 Tf 72 700 Td (page) Tj ET /X1 Do q 1 0 0 1 0 -20 cm /X1 Do Q"),
             "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>",
             stream_obj("/Type /XObject /Subtype /Form /BBox [0 0 500 500] /Matrix [1 0 0 1 0 -100] /Resources << /Font << /F1 5 0 R >> /XObject << /X1 6 0 R >> >>",
                        "BT /F1 12 Tf 72 700 Td (form) Tj ET /X1 Do")});
        CHECK(extract_pdf(pdf).text == "page\n\nform\nform");
    }
    SUBCASE("spaces via the text cursor and no doubled spaces") {
        const auto doc = extract_pdf(simple_pdf("BT /F1 12 Tf 72 700 Td (a ) Tj 30 0 Td ( b) Tj 200 0 Td (c) Tj ET"));
        CHECK(doc.text == "a b c");
    }
}

TEST_CASE("pdf structural damage") {
    const std::string good = simple_pdf("BT /F1 12 Tf 72 700 Td (Recovered) Tj ET");

    SUBCASE("wrong startxref falls back to a scan") {
        std::string bad = good;
        const auto p = bad.rfind("startxref\n");
        bad = bad.substr(0, p) + "startxref\n999999\n%%EOF\n";
        CHECK(extract_pdf(bad).text == "Recovered");
    }
    SUBCASE("missing xref and trailer") {
        const auto p = good.find("xref\n0 ");
        CHECK(extract_pdf(good.substr(0, p) + "trailer << /Root 1 0 R >>\n").text == "Recovered");
        CHECK(extract_pdf(good.substr(0, p)).text == "Recovered");
    }
    SUBCASE("wrong stream length") {
        std::string bad = good;
        const auto p = bad.find("/Length ");
        bad.replace(p, std::strlen("/Length 38"), "/Length 5 ");
        CHECK(extract_pdf(bad).text == "Recovered");
    }
    SUBCASE("object stream and xref stream") {
        // Objects 1-3 live in object stream 6; object 7 is the xref stream.
        const std::vector<std::string> packed_objs = {
            "<< /Type /Catalog /Pages 2 0 R >>", "<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
            "<< /Type /Page /Parent 2 0 R /Contents 4 0 R /Resources << /Font << /F1 5 0 R >> >> >>"};
        std::string header;
        std::string objs;
        for (std::size_t k = 0; k < packed_objs.size(); ++k) {
            header += std::to_string(k + 1) + " " + std::to_string(objs.size()) + " ";
            objs += packed_objs[k] + " ";
        }
        const std::string objstm_data = header + objs;
        const std::string content = "BT /F1 12 Tf 72 700 Td (packed) Tj ET";
        std::string out = "%PDF-1.5\n";
        std::vector<std::size_t> off(8, 0);
        off[4] = out.size();
        out += "4 0 obj\n" + stream_obj("", content) + "\nendobj\n";
        off[5] = out.size();
        out += "5 0 obj\n<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>\nendobj\n";
        off[6] = out.size();
        out += "6 0 obj\n" + stream_obj("/Type /ObjStm /N 3 /First " + std::to_string(header.size()), objstm_data) + "\nendobj\n";
        off[7] = out.size();
        std::string rows;
        auto row = [&](int type, std::uint32_t a, int b) {
            rows += static_cast<char>(type);
            rows += static_cast<char>((a >> 24) & 0xFF);
            rows += static_cast<char>((a >> 16) & 0xFF);
            rows += static_cast<char>((a >> 8) & 0xFF);
            rows += static_cast<char>(a & 0xFF);
            rows += static_cast<char>(b);
        };
        row(0, 0, 0);
        row(2, 6, 0);
        row(2, 6, 1);
        row(2, 6, 2);
        row(1, static_cast<std::uint32_t>(off[4]), 0);
        row(1, static_cast<std::uint32_t>(off[5]), 0);
        row(1, static_cast<std::uint32_t>(off[6]), 0);
        row(1, static_cast<std::uint32_t>(off[7]), 0);
        const std::string packed = zlib_compress(rows);
        out += "7 0 obj\n" + stream_obj("/Type /XRef /Size 8 /W [1 4 1] /Root 1 0 R /Filter /FlateDecode", packed) + "\nendobj\n";
        out += "startxref\n" + std::to_string(off[7]) + "\n%%EOF\n";
        CHECK(extract_pdf(out).text == "packed");
    }
    SUBCASE("reference cycles in the page tree") {
        const std::string pdf = make_pdf({"<< /Type /Catalog /Pages 2 0 R >>", "<< /Type /Pages /Kids [2 0 R 3 0 R] /Count 1 >>",
                                          "<< /Type /Page /Parent 2 0 R /Contents 4 0 R /Resources << /Font << /F1 5 0 R >> >> >>",
                                          stream_obj("", "BT /F1 12 Tf (loop) Tj ET"),
                                          "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>"});
        CHECK(extract_pdf(pdf).text == "loop");
    }
    SUBCASE("no page tree") {
        const std::string pdf = make_pdf({"<< /Type /Catalog >>"});
        CHECK(kind_of(pdf) == IngestErrorKind::CorruptPdf);
    }
    SUBCASE("encrypted trailer") {
        const std::string pdf = make_pdf({"<< /Type /Catalog /Pages 2 0 R >>", "<< /Type /Pages /Kids [] /Count 0 >>",
                                          "<< /Filter /Standard /V 1 /R 2 /O <00> /U <00> /P -4 >>"},
                                         "/Encrypt 3 0 R /ID [<01> <01>]");
        CHECK(kind_of(pdf) == IngestErrorKind::EncryptedPdf);
    }
    SUBCASE("only garbage after the header") {
        CHECK(kind_of("%PDF-1.4\n garbage garbage") == IngestErrorKind::CorruptPdf);
    }
}

TEST_CASE("fuzz: arbitrary bytes only produce declared errors") {
    // PLAINLANG_FUZZ_BLOBS / PLAINLANG_FUZZ_SEED widen the run locally.
    const char* blobs_env = std::getenv("PLAINLANG_FUZZ_BLOBS");
    const char* seed_env = std::getenv("PLAINLANG_FUZZ_SEED");
    const int kBlobs = blobs_env ? std::atoi(blobs_env) : 10'000;
    std::mt19937_64 rng(seed_env ? std::strtoull(seed_env, nullptr, 10) : 0x5eed1234);
    std::vector<std::string> seeds;
    for (const auto& m : manifest()) seeds.push_back(fixtures::read("ingest/" + m.file));
    seeds.push_back(simple_pdf("BT /F1 12 Tf 72 700 Td [(a) -300 (b)] TJ ET"));
    seeds.push_back(make_zip({{"word/document.xml", word_xml("<w:p><w:r><w:t>fuzz</w:t></w:r></w:p>")}}, false));

    const std::array<std::string_view, 4> prefixes = {"", "%PDF-1.7\n", std::string_view("PK\x03\x04", 4), "\xEF\xBB\xBF"};
    std::uniform_int_distribution<int> byte(0, 255);

    auto random_blob = [&](std::size_t n) {
        std::string s(n, '\0');
        for (auto& c : s) c = static_cast<char>(byte(rng));
        return s;
    };

    std::size_t values = 0;
    std::size_t errors = 0;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < kBlobs; ++i) {
        std::string blob;
        switch (i % 5) {
            case 0:
            case 1: {
                const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 2048)(rng);
                blob = std::string(prefixes[rng() % prefixes.size()]) + random_blob(n);
                break;
            }
            case 2:
            case 3: {
                blob = seeds[rng() % seeds.size()];
                const int flips = 1 + static_cast<int>(rng() % 16);
                for (int f = 0; f < flips && !blob.empty(); ++f) blob[rng() % blob.size()] = static_cast<char>(byte(rng));
                break;
            }
            default: {
                const std::string& s = seeds[rng() % seeds.size()];
                const std::size_t a = rng() % (s.size() + 1);
                const std::size_t len = rng() % (s.size() - a + 1);
                blob = (rng() % 2 == 0) ? s.substr(0, a) : s.substr(0, a) + random_blob(len % 512) + s.substr(a + len);
                break;
            }
        }
        try {
            const auto doc = extract_text(blob, (i % 7 == 0) ? "upload.pdf" : (i % 7 == 1 ? "upload.docx" : ""));
            if (!text::is_valid_utf8(doc.text)) FAIL("invalid UTF-8 output for blob " << i);
            ++values;
        } catch (const IngestError&) {
            ++errors;
        } catch (const std::exception& e) {
            FAIL("undeclared exception for blob " << i << ": " << e.what());
        } catch (...) {
            FAIL("non-standard exception for blob " << i);
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE("fuzz: " << values << " values, " << errors << " declared errors in " << seconds << " s");
    CHECK(values + errors == static_cast<std::size_t>(kBlobs));
}
