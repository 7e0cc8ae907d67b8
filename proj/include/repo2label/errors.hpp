#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace repo2label {

/// Base class for all errors raised by this project. Messages are
/// module-tagged, e.g. "ingest: repository not found: ./nope".
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- repository ingestion ----

class SourceNotFound : public Error {
public:
    using Error::Error;
};

class AuthRequired : public Error {
public:
    using Error::Error;
};

class RateLimited : public Error {
public:
    RateLimited(const std::string& msg, std::optional<int> retry_after)
        : Error(msg), retry_after_seconds(retry_after) {}

    std::optional<int> retry_after_seconds;
};

class NetworkError : public Error {
public:
    using Error::Error;
};

// ---- completion backends ----

/// Raised once bounded retries against a backend are exhausted, or when a
/// replay transcript is missing for a request.
class BackendUnavailable : public Error {
public:
    using Error::Error;
};

/// File content exceeds the prompt window; the caller must chunk.
class PayloadTooLarge : public Error {
public:
    using Error::Error;
};

// ---- label rendering / parsing ----

/// Machine-format label document that does not match the schema.
class LabelParseError : public Error {
public:
    using Error::Error;
};

// ---- configuration / CLI ----

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---- evaluation harness ----

class EvalError : public Error {
public:
    using Error::Error;
};

class FormatError : public EvalError {
public:
    FormatError(const std::string& msg, std::size_t row) : EvalError(msg), row(row) {}
    std::size_t row;
};

class UnknownField : public EvalError {
public:
    using EvalError::EvalError;
};

class DuplicateKey : public EvalError {
public:
    using EvalError::EvalError;
};

class KeyMismatch : public EvalError {
public:
    using EvalError::EvalError;
};

} // namespace repo2label
