#ifndef RGG_SPECIAL_FN_HPP
#define RGG_SPECIAL_FN_HPP

/**
 * @file special_fn.hpp
 * @brief gamma function family in double precision
 *
 * Gamma uses a g=7, n=9 Lanczos approximation; the incomplete functions
 * switch from the power series to a Lentz continued fraction at t = s + 1.
 * All functions throw rgg::DomainError outside their domain.
 */

namespace rgg::special {

/// Gamma(s) for s > 0. Throws OverflowError past s ~ 171.62.
double gamma(double s);

/// ln Gamma(s) for s > 0.
double log_gamma(double s);

/// Lower incomplete gamma, gamma(s, t) = int_0^t u^{s-1} e^{-u} du.
double gamma_lower(double s, double t);

/// Upper incomplete gamma, Gamma(s, t) = int_t^inf u^{s-1} e^{-u} du.
double gamma_upper(double s, double t);

/// Regularized lower incomplete gamma P(s, t) = gamma(s, t) / Gamma(s).
double gamma_lower_regularized(double s, double t);

/// Regularized upper incomplete gamma Q(s, t) = 1 - P(s, t), computed
/// without cancellation in the upper tail.
double gamma_upper_regularized(double s, double t);

} // namespace rgg::special

#endif
