#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace plainlang {

/// Exception carrying a module-specific error kind.
///
/// Each module declares its own `enum class` of failure kinds and throws
/// `CodedError<ThatEnum>`; callers that need to branch on the failure switch
/// on `kind()` instead of parsing messages.
template <typename Kind>
class CodedError : public std::runtime_error {
public:
    CodedError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace plainlang
