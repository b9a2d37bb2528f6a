#ifndef RGG_ERRORS_HPP
#define RGG_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rgg {

/// Argument outside the mathematical domain of an operation (s <= 0, p <= 0, ...).
class DomainError : public std::domain_error {
public:
   using std::domain_error::domain_error;
};

/// Result not representable in double precision.
class OverflowError : public std::overflow_error {
public:
   using std::overflow_error::overflow_error;
};

/// Input is valid in shape but statistically degenerate (constant samples,
/// zero bandwidth, too few points for an estimator).
class DegenerateInput : public std::invalid_argument {
public:
   using std::invalid_argument::invalid_argument;
};

/// Shapes of two operands do not agree.
class ShapeMismatch : public std::invalid_argument {
public:
   using std::invalid_argument::invalid_argument;
};

/// Bisection could not find a sign change inside the allowed bracket range.
class BracketingFailure : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

/// Numerical integration did not reach the requested error.
class QuadratureFailure : public std::runtime_error {
public:
   QuadratureFailure(const std::string& what, double error_estimate)
      : std::runtime_error(what), error_estimate_(error_estimate) {}
   double error_estimate() const noexcept { return error_estimate_; }

private:
   double error_estimate_;
};

/// Training produced a non-finite loss.
class Divergence : public std::runtime_error {
public:
   Divergence(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
   std::size_t step() const noexcept { return step_; }

private:
   std::size_t step_;
};

/// Malformed input file; line is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
public:
   ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
   std::size_t line() const noexcept { return line_; }

private:
   std::size_t line_;
};

} // namespace rgg

#endif
