#pragma once

#include <stdexcept>
#include <string>

namespace avowqc {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Register capacity or qubit-count range violations.
struct CapacityError : Error {
    using Error::Error;
};

// Operation on a released qubit, a foreign register, or a non-fresh slot.
struct QubitError : Error {
    using Error::Error;
};

// State fails a normalization or dimension requirement.
struct NormalizationError : Error {
    using Error::Error;
};

struct DimensionError : Error {
    using Error::Error;
};

// Key exhaustion, reuse, or offset violations.
struct KeyError : Error {
    using Error::Error;
};

// A protocol step was invoked out of order or with inconsistent arguments.
struct ProtocolError : Error {
    using Error::Error;
};

// A protocol run terminated early (identity check failure, channel check
// failure, insufficient key material). Carries the abort cause string that
// is also logged to the transcript.
struct ProtocolAbort : Error {
    explicit ProtocolAbort(const std::string& cause) : Error("protocol abort: " + cause), cause(cause) {}
    std::string cause;
};

// Malformed config or transcript input. Line is 0 when not applicable.
struct ParseError : Error {
    explicit ParseError(const std::string& what, std::size_t line = 0) : Error(what), line(line) {}
    std::size_t line;
};

}  // namespace avowqc
