#pragma once

#include <stdexcept>
#include <string>

namespace fracks {

/// Input outside the mathematical domain of an operation (alpha > 1, p < 1,
/// violated exponent relation, ...). The message names the violated bound.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An evaluation branch or convergence-managed range was exceeded.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// Gamma function evaluated at a nonpositive integer.
class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerical quadrature could not reach the requested accuracy, or a
/// tail that should decay does not.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two operands live on different grids, or an array has the wrong shape.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A Picard iterate became non-finite.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& what, int iterate)
        : std::runtime_error(what), iterate_(iterate) {}
    int iterate() const noexcept { return iterate_; }

private:
    int iterate_;
};

/// Malformed configuration file; line is 1-based, 0 when not applicable.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace fracks
