#ifndef RGG_DISTRIBUTIONS_HPP
#define RGG_DISTRIBUTIONS_HPP

/**
 * @file distributions.hpp
 * @brief generalized Gaussian (GN), its truncation to (0, inf) (TGN) and its
 *        rectification max(0, X) (RGN)
 *
 * GN_p(mu, sigma) has density
 *
 *    p^{1-1/p} / (2 sigma Gamma(1/p)) * exp(-|x - mu|^p / (p sigma^p)),
 *
 * which is Laplace for p = 1 and Gaussian for p = 2. RGN_p(mu, sigma) puts
 * mass Phi_GN(-mu/sigma) on zero and follows the GN density on (0, inf).
 */

#include "rgg/rng.hpp"
#include "rgg/sample_matrix.hpp"

#include <cstddef>
#include <cstdint>

namespace rgg {

struct RGGParams {
   double p = 2.0;
   double mu = 0.0;
   double sigma = 1.0;

   /// Throws DomainError unless p > 0, sigma > 0 and all fields are finite.
   void validate() const;
};

struct MomentSummary {
   double mean = 0.0;
   double second_moment = 0.0;
   double variance = 0.0;
};

/// Density of the rectified law at x: the continuous part and, at x == 0
/// only, the point mass.
struct RectifiedDensity {
   double density = 0.0;
   double atom_at_zero = 0.0;
};

/// Result of the unit-variance scale search.
struct ScaleSolution {
   double sigma = 0.0;
   int iterations = 0;
   double variance = 0.0; ///< Var(RGN_p(mu, sigma)) at the returned sigma
};

double gn_pdf(const RGGParams& params, double x);
double gn_log_pdf(const RGGParams& params, double x);

/// Phi(x) = 1/2 + sgn(x - mu) P(1/p, |x - mu|^p / (p sigma^p)) / 2, with the
/// lower tail evaluated as Q/2 to keep relative accuracy.
double gn_cdf(const RGGParams& params, double x);

/// CDF of the standard GN_p(0, 1) at z.
double standard_gn_cdf(double p, double z);

RectifiedDensity rgn_pdf_mass(const RGGParams& params, double x);

/// One GN draw: mu + sigma * S * (p G)^{1/p}, S = +-1, G ~ Gamma(1/p, 1).
double draw_gn(const RGGParams& params, Rng& rng);

SampleMatrix sample_gn(const RGGParams& params, std::size_t n, std::size_t d, Rng& rng);
SampleMatrix sample_gn(const RGGParams& params, std::size_t n, std::uint64_t seed);

/// max(0, GN draw), elementwise.
SampleMatrix sample_rgn(const RGGParams& params, std::size_t n, std::size_t d, Rng& rng);
SampleMatrix sample_rgn(const RGGParams& params, std::size_t n, std::uint64_t seed);

/**
 * Mean, second moment and variance of RGN_p(mu, sigma).
 *
 * Evaluated as E[X] = C (mu I0 + I1), E[X^2] = C (mu^2 I0 + 2 mu I1 + I2) with
 * C = p^{1-1/p} / (2 sigma Gamma(1/p)), a = 1/(p sigma^p), t0 = a |mu|^p and
 *
 *    I0 = a^{-1/p} Gamma(1/p) (1 + sgn(mu) P(1/p, t0)) / p
 *    I1 = a^{-2/p} Gamma(2/p, t0) / p
 *    I2 = a^{-3/p} Gamma(3/p) (1 + sgn(mu) P(3/p, t0)) / p
 *
 * The I2 term carries a Gamma(3/p)/Gamma(1/p) factor once C is folded in.
 */
MomentSummary rgn_moments(const RGGParams& params);

/// Variance of the unrectified GN_p(mu, sigma): sigma^2 p^{2/p} Gamma(3/p) / Gamma(1/p).
double gn_variance(const RGGParams& params);

/// Scale giving Var(GN_p) = 1.
double sigma_gn(double p);

/// Bisection for sigma with Var(RGN_p(mu, sigma)) = 1. The bracket starts at
/// [1e-3, 10] and is widened geometrically to [1e-6, 1e3] before
/// BracketingFailure is thrown. Stops when the bracket is narrower than tol.
ScaleSolution sigma_rgn(double p, double mu, double tol = 1e-10);

/// P(X > 0) = Phi_GN(mu / sigma) for X ~ GN_p(mu, sigma).
double nonzero_probability(const RGGParams& params);

/// Expected number of nonzero coordinates of a d-dimensional RGN vector.
double expected_l0(const RGGParams& params, std::size_t d);

/// Mean of ||row||_p^p across rows. Requires params.mu == 0; the population
/// value is d * sigma^p (see lp_norm_expectation).
double lp_norm_constraint_check(const RGGParams& params, const SampleMatrix& samples);

double lp_norm_expectation(const RGGParams& params, std::size_t d);

} // namespace rgg

#endif
