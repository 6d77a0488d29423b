#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace sasaki {

// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UnknownIdentifierError : public ParseError {
public:
    UnknownIdentifierError(const std::string& name, std::size_t offset)
        : ParseError("unknown identifier '" + name + "'", offset), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class ArityError : public ParseError {
public:
    using ParseError::ParseError;
};

// Evaluation left the real domain of a subexpression (log of a non-positive
// value, division by zero, ...). `subexpression()` is the printed offender.
class DomainError : public Error {
public:
    DomainError(const std::string& what, std::string subexpression)
        : Error(what + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}
    const std::string& subexpression() const { return subexpression_; }

private:
    std::string subexpression_;
};

class OutOfDomainError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefiniteError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class BasePointMismatchError : public Error {
public:
    using Error::Error;
};

class NotUnitFieldError : public Error {
public:
    using Error::Error;
};

class DegenerateSpectrumError : public Error {
public:
    using Error::Error;
};

class AlignmentFailureError : public Error {
public:
    using Error::Error;
};

class NotGeodesicError : public Error {
public:
    using Error::Error;
};

class NotIntegrableError : public Error {
public:
    using Error::Error;
};

// Two in-process computations of the same quantity disagreed.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class CatalogError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace sasaki
