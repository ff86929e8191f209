#pragma once

#include "difreg/core/error.hpp"

namespace difreg {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitDegraded = 2,   // fell back to T_init
    kExitInput = 3,      // invalid input, parse or format error, bad config
    kExitIo = 4,         // missing file or I/O failure
    kExitFailure = 5,    // estimation or internal failure
};

inline int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput:
        case ErrorCode::Parse:
        case ErrorCode::FormatMagic:
        case ErrorCode::FormatPayloadLength:
        case ErrorCode::FormatDimensionOverflow:
        case ErrorCode::Config: return kExitInput;
        case ErrorCode::Io:
        case ErrorCode::FileMissing: return kExitIo;
        case ErrorCode::EmptyRender:
        case ErrorCode::Estimation: return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace difreg
