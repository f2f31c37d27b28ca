#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace carte {

// Base class for all library errors. CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration / input-file problems (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

class InputError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Header or declared-range mismatch in a dataset.
class SchemaError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Non-numeric cell etc.; carries row/column context in the message.
class ParseError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Invalid allocation / randomization specification.
class SpecError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Source/target dimension mismatch (p, K or A differ).
class AlignmentError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// A (stratum, arm) cell is empty or too small for the requested operation.
class DegenerateDesignError : public Error {
public:
    DegenerateDesignError(const std::string& msg, int stratum, int arm)
        : Error(msg), stratum(stratum), arm(arm) {}
    int stratum;
    int arm;
};

// Solver failed to reach the stationarity tolerance; carries the last iterate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, std::vector<double> last_iterate,
                     double kkt_violation, int iterations)
        : Error(msg),
          last_iterate(std::move(last_iterate)),
          kkt_violation(kkt_violation),
          iterations(iterations) {}
    std::vector<double> last_iterate;
    double kkt_violation;
    int iterations;
};

// Monte Carlo study level failure (CLI exit code 3).
class StudyError : public Error {
public:
    using Error::Error;
};

}  // namespace carte
