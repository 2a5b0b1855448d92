#include "zip.hpp"

#include "inflate.hpp"
#include "plainlang/ingest/ingest.hpp"

namespace plainlang::ingest::detail {

namespace {

constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::uint32_t kCentralHeaderSig = 0x02014b50;
constexpr std::uint32_t kEndOfCentralDirSig = 0x06054b50;
constexpr std::size_t kEocdSize = 22;
constexpr std::size_t kMaxComment = 0xFFFF;

[[noreturn]] void corrupt(const std::string& why) { throw IngestError(IngestErrorKind::CorruptArchive, "zip: " + why); }

class Reader {
public:
    Reader(std::string_view data, std::size_t pos) : data_(data), pos_(pos) {
        if (pos > data.size()) corrupt("offset out of range");
    }
    std::uint16_t u16() {
        need(2);
        const auto* p = reinterpret_cast<const unsigned char*>(data_.data() + pos_);
        pos_ += 2;
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }
    std::uint32_t u32() {
        need(4);
        const auto* p = reinterpret_cast<const unsigned char*>(data_.data() + pos_);
        pos_ += 4;
        return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    }
    std::string_view bytes(std::size_t n) {
        need(n);
        const auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    void skip(std::size_t n) { bytes(n); }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) corrupt("unexpected end of data");
    }
    std::string_view data_;
    std::size_t pos_;
};

std::size_t find_eocd(std::string_view bytes) {
    if (bytes.size() < kEocdSize) corrupt("too short");
    const std::size_t lowest = bytes.size() > kEocdSize + kMaxComment ? bytes.size() - kEocdSize - kMaxComment : 0;
    for (std::size_t i = bytes.size() - kEocdSize + 1; i-- > lowest;) {
        if (bytes[i] == 'P' && bytes[i + 1] == 'K' && bytes[i + 2] == 5 && bytes[i + 3] == 6) return i;
    }
    corrupt("end of central directory not found");
}

}  // namespace

ZipArchive::ZipArchive(std::string_view bytes, std::uint64_t max_entry_size)
    : bytes_(bytes), max_entry_size_(max_entry_size) {
    Reader eocd(bytes, find_eocd(bytes));
    eocd.u32();
    eocd.u16();  // disk number
    eocd.u16();  // disk with central directory
    eocd.u16();  // entries on this disk
    const std::uint16_t total = eocd.u16();
    const std::uint32_t cd_size = eocd.u32();
    const std::uint32_t cd_offset = eocd.u32();
    if (cd_offset == 0xFFFFFFFF || total == 0xFFFF) corrupt("zip64 archives are not supported");
    if (static_cast<std::uint64_t>(cd_offset) + cd_size > bytes.size()) corrupt("central directory out of range");

    Reader cd(bytes, cd_offset);
    entries_.reserve(total);
    for (std::uint16_t i = 0; i < total; ++i) {
        if (cd.u32() != kCentralHeaderSig) corrupt("bad central directory header");
        cd.skip(4);  // versions
        Entry e;
        e.flags = cd.u16();
        e.method = cd.u16();
        cd.skip(4);  // time, date
        e.crc = cd.u32();
        e.compressed_size = cd.u32();
        e.uncompressed_size = cd.u32();
        const std::uint16_t name_len = cd.u16();
        const std::uint16_t extra_len = cd.u16();
        const std::uint16_t comment_len = cd.u16();
        cd.skip(8);  // disk, internal and external attributes
        e.local_header_offset = cd.u32();
        e.name = std::string(cd.bytes(name_len));
        cd.skip(extra_len);
        cd.skip(comment_len);
        entries_.push_back(std::move(e));
    }
}

const ZipArchive::Entry* ZipArchive::find(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

std::optional<std::string> ZipArchive::read(std::string_view name) const {
    const Entry* e = find(name);
    if (e == nullptr) return std::nullopt;
    return read(*e);
}

std::string ZipArchive::read(const Entry& e) const {
    if (e.flags & 0x1) corrupt("encrypted entry " + e.name);
    if (e.uncompressed_size > max_entry_size_) corrupt("entry " + e.name + " is too large");
    Reader local(bytes_, e.local_header_offset);
    if (local.u32() != kLocalHeaderSig) corrupt("bad local header for " + e.name);
    local.skip(22);
    const std::uint16_t name_len = local.u16();
    const std::uint16_t extra_len = local.u16();
    local.skip(name_len);
    local.skip(extra_len);
    const std::string_view raw = local.bytes(e.compressed_size);

    std::string data;
    if (e.method == 0) {
        data = std::string(raw);
    } else if (e.method == 8) {
        try {
            auto r = inflate(raw, Wrapper::Raw, e.uncompressed_size);
            if (!r.complete) corrupt("truncated deflate data in " + e.name);
            data = std::move(r.data);
        } catch (const InflateError& err) {
            corrupt(std::string(err.what()) + " in " + e.name);
        }
    } else {
        corrupt("unsupported compression method " + std::to_string(e.method));
    }
    if (data.size() != e.uncompressed_size) corrupt("size mismatch in " + e.name);
    if (crc32(data) != e.crc) corrupt("checksum mismatch in " + e.name);
    return data;
}

}  // namespace plainlang::ingest::detail
