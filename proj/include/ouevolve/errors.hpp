// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace ouevolve {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: malformed configuration, violated preconditions.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure of a numerical procedure (divergence, missed tolerance, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public NumericalError {
public:
    EvaluationError(const std::string& what, double t)
        : NumericalError(what + " (t = " + std::to_string(t) + ")"), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ToleranceNotMet : public NumericalError {
public:
    ToleranceNotMet(const std::string& what, double achieved)
        : NumericalError(what + " (achieved residual " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

class DegenerateCovariance : public NumericalError {
public:
    DegenerateCovariance(const std::string& what, double smallest_eigenvalue)
        : NumericalError(what + " (smallest eigenvalue " +
                         std::to_string(smallest_eigenvalue) + ")"),
          smallest_(smallest_eigenvalue) {}
    double smallest_eigenvalue() const { return smallest_; }

private:
    double smallest_;
};

class SolverError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace ouevolve
