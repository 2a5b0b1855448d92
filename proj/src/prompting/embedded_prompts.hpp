#pragma once

#include <array>
#include <span>
#include <string_view>

namespace plainlang::prompting::detail {

struct EmbeddedFile {
    std::string_view path;
    std::string_view content;
};

extern const std::string_view kEmbeddedVersion;

std::span<const EmbeddedFile> embedded_files();

}  // namespace plainlang::prompting::detail
