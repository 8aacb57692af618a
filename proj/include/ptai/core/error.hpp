#pragma once

#include <stdexcept>
#include <string>

namespace ptai {

enum class ErrorKind {
    invalid_dimension,
    invalid_input,
    unsupported,
    size_limit,
    degenerate,
    invalid_config,
    insufficient_augmentations,
    corrupt_file,
    format,
    io,
    numerical,
    collapse,
};

const char* to_string(ErrorKind kind) noexcept;

/// Library-wide exception. Every failure path raises this with a kind that
/// callers (tests, the CLI exit-code mapping) can dispatch on.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool cond, ErrorKind kind, const std::string& message) {
    if (!cond) fail(kind, message);
}

}  // namespace ptai
