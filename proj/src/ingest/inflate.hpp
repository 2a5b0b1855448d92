#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace plainlang::ingest::detail {

struct InflateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Wrapper { Raw, ZlibOrGzip };

struct InflateResult {
    std::string data;
    /// False when the stream ended early or was damaged; `data` then holds
    /// whatever was recovered.
    bool complete = true;
};

/// Throws InflateError when the output would exceed `max_out` or nothing
/// could be decoded at all.
InflateResult inflate(std::string_view in, Wrapper wrapper, std::size_t max_out);

std::uint32_t crc32(std::string_view data) noexcept;

}  // namespace plainlang::ingest::detail
