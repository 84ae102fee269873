#pragma once

#include <stdexcept>
#include <string>

namespace mtlf {

// Base of every error thrown by the library. The CLI maps the concrete
// subclass to a process exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration, flags or API usage.
class ConfigError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

// Malformed or unusable input data.
class DataError : public Error {
public:
    using Error::Error;
};

// A yearly block with zero dispersion cannot be normalized.
class DegenerateDispersionError : public DataError {
public:
    using DataError::DataError;
};

// Non-finite values, log of non-positive numbers, failed fits.
class NumericError : public Error {
public:
    using Error::Error;
};

class DomainError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace mtlf
