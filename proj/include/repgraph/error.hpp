#pragma once

#include <stdexcept>
#include <string>

namespace repgraph {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent input data (malformed rows, alphabet violations, ...).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Invalid argument values or incompatible shapes/parameters.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// File system problems while reading or writing artifacts.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace repgraph
