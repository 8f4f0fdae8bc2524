#pragma once

#include <stdexcept>
#include <string>

namespace shadeloss {

/// Base of every error raised by the library. The CLI maps all of these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (bad timestamp, wrong column count). Carries the 1-based line number.
class InputError : public Error {
public:
    InputError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class UnsupportedCadenceError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class InvalidDataError : public Error {
public:
    using Error::Error;
};

class BuildError : public Error {
public:
    using Error::Error;
};

class ReportError : public Error {
public:
    using Error::Error;
};

class MetricError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace shadeloss
