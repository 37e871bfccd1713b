#pragma once

#include <stdexcept>
#include <string>

namespace zeno {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad range, size mismatch, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input outside the mathematical domain of the operation (e.g. log of p <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: non-convergence, tolerance not reached, everything truncated.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An upstream pipeline stage has not produced the file (or data) a stage needs.
class MissingInputError : public Error {
public:
    using Error::Error;
};

}  // namespace zeno
