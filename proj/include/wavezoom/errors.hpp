#pragma once

#include <stdexcept>
#include <string>

namespace wz {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A point or subdomain outside the domain it must lie in.
class DomainError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Array or container shapes that do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Required artifact (dataset, model) is absent or unreadable (CLI exit code 3).
class MissingPrerequisite : public Error {
public:
    using Error::Error;
};

// Non-finite values, failed factorization, divergence (CLI exit code 4).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace wz
