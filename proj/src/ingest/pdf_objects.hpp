#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace plainlang::ingest::pdf {

/// Internal parse failure; converted to IngestError at the API boundary.
struct PdfError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedFilter : PdfError {
    using PdfError::PdfError;
};

struct Object;

struct Name {
    std::string value;
};

struct String {
    std::string bytes;
};

struct Ref {
    int num = 0;
    int gen = 0;
};

struct Keyword {
    std::string value;
};

using Array = std::vector<Object>;

struct Dict {
    std::vector<std::pair<std::string, Object>> entries;

    const Object* get(std::string_view key) const;
};

struct Stream {
    Dict dict;
    std::string_view raw;
};

struct Object {
    std::variant<std::monostate, bool, std::int64_t, double, String, Name, Array, Dict, std::shared_ptr<const Stream>,
                 Ref, Keyword>
        v;

    bool is_null() const { return std::holds_alternative<std::monostate>(v); }
    bool is_ref() const { return std::holds_alternative<Ref>(v); }
    std::optional<std::int64_t> as_int() const;
    std::optional<double> as_number() const;
    const std::string* name() const;
    const std::string* string() const;
    const Array* array() const;
    /// The dictionary of a Dict or of a Stream.
    const Dict* dict() const;
    const Stream* stream() const;
    const Keyword* keyword() const;
};

/// Tokenizer shared by file-level and content-stream parsing.
class Lexer {
public:
    enum class Tok { End, Int, Real, String, Name, ArrayOpen, ArrayClose, DictOpen, DictClose, Keyword };

    struct Token {
        Tok kind = Tok::End;
        std::string text;
        std::int64_t integer = 0;
        double real = 0.0;
    };

    explicit Lexer(std::string_view data, std::size_t pos = 0) : data_(data), pos_(pos) {}

    Token next();
    std::size_t pos() const noexcept { return pos_; }
    void seek(std::size_t pos) noexcept { pos_ = pos; }
    std::string_view data() const noexcept { return data_; }
    void skip_whitespace();

private:
    std::string_view data_;
    std::size_t pos_;

    std::string literal_string();
    std::string hex_string();
    std::string name();
};

bool is_pdf_whitespace(char c) noexcept;
bool is_pdf_delimiter(char c) noexcept;

/// Parses one object. `allow_refs` enables the `n g R` form. Keywords other
/// than true/false/null come back as Keyword objects.
Object parse_object(Lexer& lexer, bool allow_refs, int depth = 0);

/// Decoded data of a stream after its filter chain. `budget` is decremented
/// by the decoded size; exceeding it throws PdfError.
std::string decode_stream(const Dict& dict, std::string_view raw, const class Document* doc, std::size_t& budget);

/// Random access to the objects of a PDF file.
class Document {
public:
    explicit Document(std::string_view bytes, std::size_t decode_budget = 64u << 20);

    const Dict& trailer() const noexcept { return trailer_; }
    bool encrypted() const noexcept { return trailer_.get("Encrypt") != nullptr; }

    /// Follows indirect references; unknown objects resolve to null. The
    /// result refers either to `obj` or to the document's object cache.
    const Object& resolve(const Object& obj) const;
    /// Resolved dictionary entry, or null.
    const Object& get(const Dict& dict, std::string_view key) const;

    std::string decode(const Stream& stream) const;

private:
    struct XrefEntry {
        int type = 1;  // 1: at offset, 2: inside an object stream
        std::uint64_t a = 0;  // offset or object-stream number
        std::uint32_t b = 0;  // index within the object stream
    };
    struct ObjStm {
        std::string data;
        std::vector<std::pair<int, std::size_t>> offsets;
    };

    std::string_view bytes_;
    mutable std::size_t budget_;
    mutable std::unordered_map<int, XrefEntry> xref_;
    Dict trailer_;
    mutable bool reconstructed_ = false;

    mutable std::unordered_map<int, Object> cache_;
    mutable std::set<int> resolving_;
    mutable std::unordered_map<int, std::shared_ptr<ObjStm>> objstms_;

    void read_xref_chain(std::size_t offset);
    /// Parses an `xref` table into the entries and returns its trailer.
    Dict read_xref_table(std::size_t offset);
    void read_xref_stream(const Object& obj);
    void merge_trailer(const Dict& d);
    /// Rebuilds the cross-reference table by scanning for `n g obj`.
    /// Returns trailer dictionaries found along the way.
    std::vector<Dict> reconstruct() const;

    const Object& load(int num) const;
    Object load_at(std::size_t offset, int expected_num) const;
    Object load_from_objstm(int stream_num, std::uint32_t index, int num) const;
};

}  // namespace plainlang::ingest::pdf
