#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace plainlang::ingest::detail {

/// Namespace-aware pull parser for the XML subset found in office documents.
///
/// Comments, processing instructions and the DOCTYPE are skipped; internal
/// entity declarations are never expanded. Throws IngestError{CorruptXml} on
/// malformed input.
class XmlReader {
public:
    enum class Event { StartElement, EndElement, Text, End };

    struct Attribute {
        std::string ns;
        std::string local;
        std::string value;
    };

    explicit XmlReader(std::string_view doc, std::size_t max_depth = 1024);

    Event next();

    /// Valid after StartElement and EndElement.
    const std::string& ns() const noexcept { return ns_; }
    const std::string& local() const noexcept { return local_; }
    const std::vector<Attribute>& attributes() const noexcept { return attrs_; }
    /// Valid after Text; entity references already decoded.
    const std::string& text() const noexcept { return text_; }
    std::size_t depth() const noexcept { return open_.size(); }

    const std::string* attribute(std::string_view ns, std::string_view local) const;

private:
    struct Open {
        std::string qname;
        std::string ns;
        std::string local;
        std::size_t bindings_before;
    };

    std::string_view doc_;
    std::size_t pos_ = 0;
    std::size_t max_depth_;
    std::vector<Open> open_;
    std::vector<std::pair<std::string, std::string>> bindings_;  // prefix -> uri
    bool pending_end_ = false;
    bool seen_root_ = false;

    std::string ns_;
    std::string local_;
    std::vector<Attribute> attrs_;
    std::string text_;

    [[noreturn]] void fail(const std::string& why) const;
    std::string resolve(std::string_view prefix, bool is_attribute) const;
    std::string read_name();
    void skip_space();
    void decode_into(std::string_view raw, std::string& out) const;
    Event read_tag();
    void skip_markup();
};

}  // namespace plainlang::ingest::detail
