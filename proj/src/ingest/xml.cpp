#include "xml.hpp"

#include "plainlang/ingest/ingest.hpp"
#include "plainlang/text/unicode.hpp"

namespace plainlang::ingest::detail {

namespace {

constexpr std::string_view kXmlNamespace = "http://www.w3.org/XML/1998/namespace";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_char(char c) {
    return !is_space(c) && c != '>' && c != '/' && c != '=' && c != '<' && c != '"' && c != '\'';
}

std::pair<std::string_view, std::string_view> split_qname(std::string_view qname) {
    const auto colon = qname.find(':');
    if (colon == std::string_view::npos) return {{}, qname};
    return {qname.substr(0, colon), qname.substr(colon + 1)};
}

}  // namespace

XmlReader::XmlReader(std::string_view doc, std::size_t max_depth) : doc_(doc), max_depth_(max_depth) {
    if (doc_.size() >= 3 && doc_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
}

void XmlReader::fail(const std::string& why) const {
    throw IngestError(IngestErrorKind::CorruptXml, "xml: " + why + " at offset " + std::to_string(pos_));
}

const std::string* XmlReader::attribute(std::string_view ns, std::string_view local) const {
    for (const auto& a : attrs_) {
        if (a.ns == ns && a.local == local) return &a.value;
    }
    return nullptr;
}

std::string XmlReader::resolve(std::string_view prefix, bool is_attribute) const {
    if (prefix == "xml") return std::string(kXmlNamespace);
    if (prefix.empty() && is_attribute) return {};
    for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it) {
        if (it->first == prefix) return it->second;
    }
    if (prefix.empty()) return {};
    fail("unbound namespace prefix '" + std::string(prefix) + "'");
}

void XmlReader::skip_space() {
    while (pos_ < doc_.size() && is_space(doc_[pos_])) ++pos_;
}

std::string XmlReader::read_name() {
    const std::size_t start = pos_;
    while (pos_ < doc_.size() && is_name_char(doc_[pos_])) ++pos_;
    if (pos_ == start) fail("expected a name");
    return std::string(doc_.substr(start, pos_ - start));
}

void XmlReader::decode_into(std::string_view raw, std::string& out) const {
    std::size_t i = 0;
    while (i < raw.size()) {
        const auto amp = raw.find('&', i);
        if (amp == std::string_view::npos) {
            out.append(raw.substr(i));
            return;
        }
        out.append(raw.substr(i, amp - i));
        const auto semi = raw.find(';', amp);
        if (semi == std::string_view::npos || semi - amp > 12) fail("unterminated entity reference");
        const std::string_view ent = raw.substr(amp + 1, semi - amp - 1);
        if (ent == "lt") {
            out += '<';
        } else if (ent == "gt") {
            out += '>';
        } else if (ent == "amp") {
            out += '&';
        } else if (ent == "quot") {
            out += '"';
        } else if (ent == "apos") {
            out += '\'';
        } else if (ent.size() >= 2 && ent[0] == '#') {
            const bool hex = ent[1] == 'x' || ent[1] == 'X';
            const std::string_view digits = ent.substr(hex ? 2 : 1);
            if (digits.empty()) fail("empty character reference");
            std::uint32_t cp = 0;
            for (char c : digits) {
                int d;
                if (c >= '0' && c <= '9') {
                    d = c - '0';
                } else if (hex && c >= 'a' && c <= 'f') {
                    d = c - 'a' + 10;
                } else if (hex && c >= 'A' && c <= 'F') {
                    d = c - 'A' + 10;
                } else {
                    fail("bad character reference");
                }
                cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
                if (cp > 0x10FFFF) fail("character reference out of range");
            }
            if (cp == 0 || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid character reference");
            text::append_utf8(out, static_cast<char32_t>(cp));
        } else {
            fail("unknown entity '" + std::string(ent) + "'");
        }
        i = semi + 1;
    }
}

void XmlReader::skip_markup() {
    // At "<!": a DOCTYPE or other declaration; brackets may nest.
    int brackets = 0;
    for (; pos_ < doc_.size(); ++pos_) {
        const char c = doc_[pos_];
        if (c == '[') {
            ++brackets;
        } else if (c == ']') {
            --brackets;
        } else if (c == '>' && brackets <= 0) {
            ++pos_;
            return;
        }
    }
    fail("unterminated declaration");
}

XmlReader::Event XmlReader::read_tag() {
    ++pos_;  // '<'
    if (pos_ < doc_.size() && doc_[pos_] == '/') {
        ++pos_;
        const std::string qname = read_name();
        skip_space();
        if (pos_ >= doc_.size() || doc_[pos_] != '>') fail("malformed end tag");
        ++pos_;
        if (open_.empty() || open_.back().qname != qname) fail("mismatched end tag </" + qname + ">");
        ns_ = open_.back().ns;
        local_ = open_.back().local;
        attrs_.clear();
        bindings_.resize(open_.back().bindings_before);
        open_.pop_back();
        return Event::EndElement;
    }

    if (open_.empty() && seen_root_) fail("content after the root element");
    const std::string qname = read_name();
    std::vector<std::pair<std::string, std::string>> raw_attrs;
    bool self_closing = false;
    for (;;) {
        skip_space();
        if (pos_ >= doc_.size()) fail("unterminated start tag");
        if (doc_[pos_] == '>') {
            ++pos_;
            break;
        }
        if (doc_[pos_] == '/') {
            if (pos_ + 1 >= doc_.size() || doc_[pos_ + 1] != '>') fail("malformed empty-element tag");
            pos_ += 2;
            self_closing = true;
            break;
        }
        std::string name = read_name();
        skip_space();
        if (pos_ >= doc_.size() || doc_[pos_] != '=') fail("expected '=' after attribute name");
        ++pos_;
        skip_space();
        if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) fail("unquoted attribute value");
        const char quote = doc_[pos_++];
        const auto end = doc_.find(quote, pos_);
        if (end == std::string_view::npos) fail("unterminated attribute value");
        const std::string_view raw = doc_.substr(pos_, end - pos_);
        if (raw.find('<') != std::string_view::npos) fail("'<' in attribute value");
        std::string value;
        decode_into(raw, value);
        pos_ = end + 1;
        raw_attrs.emplace_back(std::move(name), std::move(value));
    }

    const std::size_t before = bindings_.size();
    for (const auto& [name, value] : raw_attrs) {
        if (name == "xmlns") {
            bindings_.emplace_back("", value);
        } else if (name.rfind("xmlns:", 0) == 0) {
            bindings_.emplace_back(name.substr(6), value);
        }
    }

    attrs_.clear();
    for (auto& [name, value] : raw_attrs) {
        if (name == "xmlns" || name.rfind("xmlns:", 0) == 0) continue;
        const auto [prefix, local] = split_qname(name);
        attrs_.push_back({resolve(prefix, true), std::string(local), std::move(value)});
    }
    const auto [prefix, local] = split_qname(qname);
    ns_ = resolve(prefix, false);
    local_ = std::string(local);
    if (local_.empty()) fail("empty local name");

    if (open_.size() >= max_depth_) fail("elements nested too deeply");
    open_.push_back({qname, ns_, local_, before});
    seen_root_ = true;
    pending_end_ = self_closing;
    return Event::StartElement;
}

XmlReader::Event XmlReader::next() {
    if (pending_end_) {
        pending_end_ = false;
        ns_ = open_.back().ns;
        local_ = open_.back().local;
        attrs_.clear();
        bindings_.resize(open_.back().bindings_before);
        open_.pop_back();
        return Event::EndElement;
    }
    for (;;) {
        if (pos_ >= doc_.size()) {
            if (!open_.empty()) fail("unclosed element <" + open_.back().qname + ">");
            if (!seen_root_) fail("no root element");
            return Event::End;
        }
        if (doc_[pos_] == '<') {
            const std::string_view rest = doc_.substr(pos_);
            if (rest.rfind("<!--", 0) == 0) {
                const auto end = doc_.find("-->", pos_ + 4);
                if (end == std::string_view::npos) fail("unterminated comment");
                pos_ = end + 3;
                continue;
            }
            if (rest.rfind("<?", 0) == 0) {
                const auto end = doc_.find("?>", pos_ + 2);
                if (end == std::string_view::npos) fail("unterminated processing instruction");
                pos_ = end + 2;
                continue;
            }
            if (rest.rfind("<![CDATA[", 0) == 0) {
                if (open_.empty()) fail("CDATA outside the root element");
                const auto end = doc_.find("]]>", pos_ + 9);
                if (end == std::string_view::npos) fail("unterminated CDATA section");
                text_.assign(doc_.substr(pos_ + 9, end - pos_ - 9));
                pos_ = end + 3;
                if (text_.empty()) continue;
                return Event::Text;
            }
            if (rest.rfind("<!", 0) == 0) {
                if (seen_root_) fail("declaration inside the document");
                skip_markup();
                continue;
            }
            return read_tag();
        }
        auto end = doc_.find('<', pos_);
        if (end == std::string_view::npos) end = doc_.size();
        const std::string_view raw = doc_.substr(pos_, end - pos_);
        if (open_.empty()) {
            for (char c : raw) {
                if (!is_space(c)) fail("text outside the root element");
            }
            pos_ = end;
            continue;
        }
        text_.clear();
        decode_into(raw, text_);
        pos_ = end;
        return Event::Text;
    }
}

}  // namespace plainlang::ingest::detail
