#include "difreg/core/error.hpp"

namespace difreg {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "invalid_input";
        case ErrorCode::EmptyRender: return "empty_render";
        case ErrorCode::Estimation: return "estimation";
        case ErrorCode::Io: return "io";
        case ErrorCode::FileMissing: return "file_missing";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::FormatMagic: return "format_magic";
        case ErrorCode::FormatPayloadLength: return "format_payload_length";
        case ErrorCode::FormatDimensionOverflow: return "format_dimension_overflow";
        case ErrorCode::Config: return "config";
    }
    return "unknown";
}

}  // namespace difreg
