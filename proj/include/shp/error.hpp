#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shp {

enum class ErrorKind { Validation, Io, Numeric };

// Base of every error the library throws. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

// Malformed input file; carries the 1-based line number of the offending record.
class ParseError : public IoError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& msg)
        : IoError(path + ":" + std::to_string(line) + ": " + msg), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

}  // namespace shp
