#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nldt {

// Structured error: a short machine-readable code plus a human message.
// Codes are stable strings ("cyclic-program", "shape-error", ...) so callers
// and tests can match on them.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

inline void require(bool cond, std::string_view code, const std::string& message) {
    if (!cond) throw Error(std::string(code), message);
}

}  // namespace nldt
