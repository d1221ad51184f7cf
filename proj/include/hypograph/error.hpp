#pragma once

#include <stdexcept>
#include <string>

namespace hypograph {

// Base of every exception thrown by the library. The CLI maps the concrete
// subclasses onto exit codes (usage 1, data 2, check 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or dimensions of the arguments do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid parameter value (negative lambda, M < 1, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed or missing input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// An oracle scale guard or enumeration budget was exceeded.
class GuardError : public Error {
public:
    using Error::Error;
};

/// A NaN or infinity appeared in an intermediate result.
class NumericError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ArgumentError(what);
}

inline void require_dims(bool cond, const std::string& what) {
    if (!cond) throw DimensionError(what);
}

} // namespace detail

} // namespace hypograph
