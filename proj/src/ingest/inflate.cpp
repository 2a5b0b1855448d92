#include "inflate.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>

namespace plainlang::ingest::detail {

InflateResult inflate(std::string_view in, Wrapper wrapper, std::size_t max_out) {
    z_stream zs{};
    const int window = wrapper == Wrapper::Raw ? -MAX_WBITS : MAX_WBITS + 32;
    if (inflateInit2(&zs, window) != Z_OK) throw InflateError("inflateInit2 failed");

    InflateResult result;
    std::array<unsigned char, 64 * 1024> buf;
    std::size_t remaining = in.size();
    const auto* next = reinterpret_cast<const unsigned char*>(in.data());
    int rc = Z_OK;
    while (true) {
        if (zs.avail_in == 0 && remaining > 0) {
            const auto chunk = static_cast<uInt>(std::min<std::size_t>(remaining, std::numeric_limits<uInt>::max()));
            zs.next_in = const_cast<unsigned char*>(next);
            zs.avail_in = chunk;
            next += chunk;
            remaining -= chunk;
        }
        zs.next_out = buf.data();
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = ::inflate(&zs, Z_NO_FLUSH);
        const std::size_t produced = buf.size() - zs.avail_out;
        if (result.data.size() + produced > max_out) {
            inflateEnd(&zs);
            throw InflateError("decompressed data exceeds limit");
        }
        result.data.append(reinterpret_cast<const char*>(buf.data()), produced);
        if (rc == Z_STREAM_END) break;
        if (rc == Z_OK) continue;
        if (rc == Z_BUF_ERROR && zs.avail_in == 0 && remaining > 0) continue;
        result.complete = false;  // truncated or damaged input
        break;
    }
    inflateEnd(&zs);
    if (!result.complete && result.data.empty()) throw InflateError("corrupt deflate stream");
    return result;
}

std::uint32_t crc32(std::string_view data) noexcept {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::size_t off = 0;
    while (off < data.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - off, std::numeric_limits<uInt>::max()));
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(data.data() + off), chunk);
        off += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace plainlang::ingest::detail
