#pragma once

#include <stdexcept>
#include <string>

namespace usrt {

// Argument outside the mathematical domain of a function (q outside (0,1), lo > hi, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Malformed or unusable input data (non-finite values, missing CSV columns, ...).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid run configuration (gamma < 1, alpha outside (0,1), unknown score name, ...).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine failed to reach its tolerance.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace usrt
