#pragma once

#include <stdexcept>
#include <string>

namespace moenas {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidGenome : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Evaluation failures abort the current candidate; the engine retries.
class EvaluationError : public Error {
public:
    using Error::Error;
};

class MissingRow : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};

class ProtocolError : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};

class EvaluationTimeout : public EvaluationError {
public:
    using EvaluationError::EvaluationError;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

} // namespace moenas
