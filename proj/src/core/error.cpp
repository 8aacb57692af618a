#include "ptai/core/error.hpp"

namespace ptai {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_dimension: return "invalid-dimension";
        case ErrorKind::invalid_input: return "invalid-input";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::size_limit: return "size-limit";
        case ErrorKind::degenerate: return "degenerate";
        case ErrorKind::invalid_config: return "invalid-configuration";
        case ErrorKind::insufficient_augmentations: return "insufficient-augmentations";
        case ErrorKind::corrupt_file: return "corrupt-file";
        case ErrorKind::format: return "format";
        case ErrorKind::io: return "io";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::collapse: return "collapse";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace ptai
