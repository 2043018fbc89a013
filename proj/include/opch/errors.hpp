#pragma once

#include <stdexcept>
#include <string>

namespace opch {

// Error categories shared between the C++ core and the C API status codes.
enum class ErrorCode {
    Ok = 0,
    Syntax,
    MixedWeight,
    ZeroExpr,
    InvalidWeight,
    UnknownVariety,
    ArityMismatch,
    VariableClash,
    NotInImage,
    NoDerivation,
    PairMismatch,
    DimensionMismatch,
    ArityTooLarge,
    DerOrderCap,
    InvalidArgument,
    Io,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Parse failure; `position` is a 0-based byte offset into the input text.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, std::size_t position)
        : Error(ErrorCode::Syntax, msg + " at position " + std::to_string(position)),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace opch
