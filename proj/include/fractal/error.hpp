#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fractal {

// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad value, bad length, ...).
struct InvalidInputError : Error {
    using Error::Error;
};

// A series has zero variance (or is otherwise too flat to normalize or fit).
struct DegenerateSeriesError : Error {
    using Error::Error;
};

// A lag or block size does not fit inside the series it is applied to.
struct InvalidWindowError : Error {
    using Error::Error;
};

// Not enough usable points to produce an estimate.
struct InsufficientDataError : Error {
    using Error::Error;
};

// An event-counting estimator saw no events at all.
struct InsufficientSignalError : Error {
    using Error::Error;
};

// A regression input is degenerate (constant predictor, zero spread in x).
struct DegenerateFitError : Error {
    using Error::Error;
};

// A recursion produced values outside its mathematically valid range.
struct NumericalDegeneracyError : Error {
    using Error::Error;
};

// Too many bootstrap replicates failed to produce an estimate.
struct BootstrapInstabilityError : Error {
    BootstrapInstabilityError(const std::string& msg, std::size_t failures)
        : Error(msg), failure_count(failures) {}
    std::size_t failure_count = 0;
};

// The circulant embedding produced a significantly negative eigenvalue.
struct EmbeddingFailureError : Error {
    using Error::Error;
};

// Filesystem-level failure (missing file, unreadable stream).
struct IoError : Error {
    using Error::Error;
};

// A corpus file is mostly unparseable.
struct CorpusFormatError : Error {
    using Error::Error;
};

// A remote scoring request failed after all retries.
struct ScoringError : Error {
    ScoringError(const std::string& msg, int http_status, std::string body)
        : Error(msg), status(http_status), body_excerpt(std::move(body)) {}
    int status = 0;
    std::string body_excerpt;
};

// A remote scoring response violated the expected shape.
struct ProtocolError : Error {
    using Error::Error;
};

}  // namespace fractal
