#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace difreg {

/// Failure categories. Each maps to a stable CLI exit code (see pipeline/exit_codes.hpp).
enum class ErrorCode {
    InvalidInput,
    EmptyRender,
    Estimation,
    Io,
    FileMissing,
    Parse,
    FormatMagic,
    FormatPayloadLength,
    FormatDimensionOverflow,
    Config,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace difreg
