#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace edc {

// Failure classes map onto process exit codes (see tools/).
enum class ErrorKind : int {
    data = 2,         // unreadable/0-row/ill-formed inputs
    config = 3,       // invalid parameter combinations
    unlearnable = 4,  // data that admits no binary decision boundary
    internal = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    // Stable machine-checkable identifier, e.g. "target-column-not-found".
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void throw_data(const std::string& code, const std::string& detail) {
    throw Error(ErrorKind::data, code, detail);
}
[[noreturn]] inline void throw_config(const std::string& code, const std::string& detail) {
    throw Error(ErrorKind::config, code, detail);
}
[[noreturn]] inline void throw_unlearnable(const std::string& code, const std::string& detail) {
    throw Error(ErrorKind::unlearnable, code, detail);
}
[[noreturn]] inline void throw_internal(const std::string& code, const std::string& detail) {
    throw Error(ErrorKind::internal, code, detail);
}

}  // namespace edc
