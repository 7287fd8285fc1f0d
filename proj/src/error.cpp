#include "pbm/error.hpp"

namespace pbm {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::dimension_mismatch: return "dimension_mismatch";
        case ErrorKind::empty_input: return "empty_input";
        case ErrorKind::parse_error: return "parse_error";
        case ErrorKind::io: return "io";
        case ErrorKind::unusable_patch: return "unusable_patch";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::conflict: return "conflict";
    }
    return "unknown";
}

}  // namespace pbm
