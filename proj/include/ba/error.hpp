#pragma once

#include <stdexcept>
#include <string>

namespace ba {

// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument shapes, counts or option values.
struct ArgumentError : Error {
    using Error::Error;
};

// Input that is structurally valid but numerically unusable
// (e.g. a cloud whose points are all identical).
struct DegenerateInputError : Error {
    using Error::Error;
};

// Sparse or dense factorization failure.
struct SolverError : Error {
    using Error::Error;
};

// NaN/Inf encountered where finite values are required.
struct NumericError : Error {
    using Error::Error;
};

// Malformed input file; carries a 1-based line number when known.
struct ParseError : Error {
    ParseError(const std::string& msg, long line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    explicit ParseError(const std::string& msg) : Error(msg), line_number(0) {}
    long line_number;
};

// Artifact container corruption: bad offsets, truncated blobs, shape mismatch.
struct IntegrityError : Error {
    using Error::Error;
};

// Requested sample/array missing from an artifact container.
struct ArtifactNotFoundError : Error {
    using Error::Error;
};

}  // namespace ba
