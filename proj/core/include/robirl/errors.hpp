#pragma once

#include <stdexcept>
#include <string>

namespace robirl {

/// Dimensions of two inputs do not agree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A scalar argument or a probability table is outside its valid range.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Missing or malformed configuration (e.g. an MDP without a reward).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative procedure hit its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, long iterations, double residual)
        : std::runtime_error(what + " (iterations=" + std::to_string(iterations) +
                             ", residual=" + std::to_string(residual) + ")"),
          iterations_(iterations), residual_(residual) {}

    long iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    long iterations_;
    double residual_;
};

} // namespace robirl
