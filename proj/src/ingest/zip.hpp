#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plainlang::ingest::detail {

/// Read-only view of a ZIP archive held in memory. Supports stored and
/// deflated entries; throws IngestError{CorruptArchive} on damage.
class ZipArchive {
public:
    struct Entry {
        std::string name;
        std::uint16_t method = 0;
        std::uint16_t flags = 0;
        std::uint32_t crc = 0;
        std::uint64_t compressed_size = 0;
        std::uint64_t uncompressed_size = 0;
        std::uint64_t local_header_offset = 0;
    };

    explicit ZipArchive(std::string_view bytes, std::uint64_t max_entry_size = 64ull << 20);

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    const Entry* find(std::string_view name) const;
    std::string read(const Entry& entry) const;
    std::optional<std::string> read(std::string_view name) const;

private:
    std::string_view bytes_;
    std::uint64_t max_entry_size_;
    std::vector<Entry> entries_;
};

}  // namespace plainlang::ingest::detail
