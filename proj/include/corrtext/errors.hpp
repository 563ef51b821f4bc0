#pragma once

#include <stdexcept>
#include <string>

namespace corrtext {

// Bad or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File system failures; reported like data errors.
class IoError : public DataError {
public:
    using DataError::DataError;
};

// Invalid configuration or arguments (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Entailment backend could not be reached or answered badly (CLI exit code 3).
// Retriable.
class ClassifierUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace corrtext
