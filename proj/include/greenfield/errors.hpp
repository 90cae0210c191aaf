#pragma once

#include <stdexcept>
#include <string>

namespace greenfield {

/// Bad input files, unknown tags, malformed options. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Operator/model invariant violations: ellipticity, positivity, SPD
/// requirements. CLI exit code 3.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failures: factorization breakdown, overflow guards,
/// degenerate constraint systems. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace greenfield
