#include "rgg/distributions.hpp"

#include "rgg/errors.hpp"
#include "rgg/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rgg {

void RGGParams::validate() const
{
   if (!(p > 0.0) || !std::isfinite(p)) {
      throw DomainError("shape p must be positive and finite, got " + std::to_string(p));
   }
   if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw DomainError("scale sigma must be positive and finite, got " + std::to_string(sigma));
   }
   if (!std::isfinite(mu)) {
      throw DomainError("location mu must be finite");
   }
}

double gn_log_pdf(const RGGParams& params, double x)
{
   params.validate();
   const double p = params.p;
   const double z = std::abs(x - params.mu) / params.sigma;
   return (1.0 - 1.0 / p) * std::log(p) - std::log(2.0 * params.sigma)
      - special::log_gamma(1.0 / p) - std::pow(z, p) / p;
}

double gn_pdf(const RGGParams& params, double x)
{
   return std::exp(gn_log_pdf(params, x));
}

double standard_gn_cdf(double p, double z)
{
   if (!(p > 0.0) || !std::isfinite(p)) {
      throw DomainError("shape p must be positive and finite");
   }
   if (std::isnan(z)) {
      throw DomainError("standard_gn_cdf: argument is NaN");
   }
   if (z == 0.0) {
      return 0.5;
   }
   const double t = std::pow(std::abs(z), p) / p;
   const double upper_tail = 0.5 * special::gamma_upper_regularized(1.0 / p, t);
   return z > 0.0 ? 1.0 - upper_tail : upper_tail;
}

double gn_cdf(const RGGParams& params, double x)
{
   params.validate();
   return standard_gn_cdf(params.p, (x - params.mu) / params.sigma);
}

RectifiedDensity rgn_pdf_mass(const RGGParams& params, double x)
{
   params.validate();
   RectifiedDensity out;
   if (x > 0.0) {
      out.density = gn_pdf(params, x);
   } else if (x == 0.0) {
      out.atom_at_zero = standard_gn_cdf(params.p, -params.mu / params.sigma);
   }
   return out;
}

double draw_gn(const RGGParams& params, Rng& rng)
{
   const double s = rng.sign();
   const double g = rng.gamma(1.0 / params.p);
   return params.mu + params.sigma * s * std::pow(params.p * g, 1.0 / params.p);
}

SampleMatrix sample_gn(const RGGParams& params, std::size_t n, std::size_t d, Rng& rng)
{
   params.validate();
   if (n < 1 || d < 1) {
      throw DomainError("sample_gn: n and d must be at least 1");
   }
   SampleMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
   for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
         out(i, j) = draw_gn(params, rng);
      }
   }
   return out;
}

SampleMatrix sample_gn(const RGGParams& params, std::size_t n, std::uint64_t seed)
{
   Rng rng(seed);
   return sample_gn(params, n, 1, rng);
}

SampleMatrix sample_rgn(const RGGParams& params, std::size_t n, std::size_t d, Rng& rng)
{
   return sample_gn(params, n, d, rng).cwiseMax(0.0);
}

SampleMatrix sample_rgn(const RGGParams& params, std::size_t n, std::uint64_t seed)
{
   Rng rng(seed);
   return sample_rgn(params, n, 1, rng);
}

MomentSummary rgn_moments(const RGGParams& params)
{
   params.validate();
   const double p = params.p;
   const double mu = params.mu;
   const double sigma = params.sigma;

   const double t0 = std::pow(std::abs(mu) / sigma, p) / p;

   // 1 + sgn(mu) P(s, t0); for mu < 0 this is Q(s, t0), taken directly.
   auto signed_mass = [&](double s) {
      if (mu > 0.0) {
         return 1.0 + special::gamma_lower_regularized(s, t0);
      }
      if (mu < 0.0) {
         return special::gamma_upper_regularized(s, t0);
      }
      return 1.0;
   };

   // With C = p^{1-1/p} / (2 sigma Gamma(1/p)) and a^{-1/p} = p^{1/p} sigma:
   //   C I0 = (1 + sgn P(1/p)) / 2
   //   C I1 = p^{1/p} sigma Gamma(2/p, t0) / (2 Gamma(1/p))
   //   C I2 = p^{2/p} sigma^2 Gamma(3/p) (1 + sgn P(3/p)) / (2 Gamma(1/p))
   const double lg1 = special::log_gamma(1.0 / p);
   const double scale = std::pow(p, 1.0 / p) * sigma;
   const double c_i0 = 0.5 * signed_mass(1.0 / p);
   const double c_i1 = 0.5 * scale * special::gamma_upper_regularized(2.0 / p, t0)
      * std::exp(special::log_gamma(2.0 / p) - lg1);
   const double c_i2 = 0.5 * scale * scale * signed_mass(3.0 / p)
      * std::exp(special::log_gamma(3.0 / p) - lg1);

   MomentSummary m;
   m.mean = mu * c_i0 + c_i1;
   m.second_moment = mu * mu * c_i0 + 2.0 * mu * c_i1 + c_i2;
   m.variance = std::max(0.0, m.second_moment - m.mean * m.mean);
   return m;
}

double gn_variance(const RGGParams& params)
{
   params.validate();
   const double p = params.p;
   return params.sigma * params.sigma * std::pow(p, 2.0 / p)
      * std::exp(special::log_gamma(3.0 / p) - special::log_gamma(1.0 / p));
}

double sigma_gn(double p)
{
   if (!(p > 0.0) || !std::isfinite(p)) {
      throw DomainError("sigma_gn: p must be positive and finite");
   }
   // Gamma(1/p)^{1/2} / (p^{1/p} Gamma(3/p)^{1/2})
   return std::exp(0.5 * (special::log_gamma(1.0 / p) - special::log_gamma(3.0 / p)))
      / std::pow(p, 1.0 / p);
}

ScaleSolution sigma_rgn(double p, double mu, double tol)
{
   if (!(tol > 0.0)) {
      throw DomainError("sigma_rgn: tolerance must be positive");
   }
   RGGParams params{p, mu, 1.0};
   params.validate();

   auto excess = [&](double sigma) {
      params.sigma = sigma;
      return rgn_moments(params).variance - 1.0;
   };

   constexpr double lower_floor = 1e-6;
   constexpr double upper_ceiling = 1e3;
   double lo = 1e-3;
   double hi = 10.0;
   while (excess(hi) <= 0.0 && hi < upper_ceiling) {
      hi = std::min(2.0 * hi, upper_ceiling);
   }
   while (excess(lo) >= 0.0 && lo > lower_floor) {
      lo = std::max(0.5 * lo, lower_floor);
   }
   if (!(excess(lo) < 0.0 && excess(hi) > 0.0)) {
      throw BracketingFailure("sigma_rgn: no sign change of Var - 1 on [" + std::to_string(lo)
                              + ", " + std::to_string(hi) + "] for p = " + std::to_string(p)
                              + ", mu = " + std::to_string(mu));
   }

   ScaleSolution out;
   while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (excess(mid) > 0.0) {
         hi = mid;
      } else {
         lo = mid;
      }
      ++out.iterations;
   }
   out.sigma = 0.5 * (lo + hi);
   params.sigma = out.sigma;
   out.variance = rgn_moments(params).variance;
   return out;
}

double nonzero_probability(const RGGParams& params)
{
   params.validate();
   return standard_gn_cdf(params.p, params.mu / params.sigma);
}

double expected_l0(const RGGParams& params, std::size_t d)
{
   if (d < 1) {
      throw DomainError("expected_l0: dimension must be at least 1");
   }
   return static_cast<double>(d) * nonzero_probability(params);
}

double lp_norm_constraint_check(const RGGParams& params, const SampleMatrix& samples)
{
   params.validate();
   if (params.mu != 0.0) {
      throw DomainError("lp_norm_constraint_check: the constraint holds for mu = 0 only");
   }
   require_valid(samples, "lp_norm_constraint_check");
   return samples.array().abs().pow(params.p).rowwise().sum().mean();
}

double lp_norm_expectation(const RGGParams& params, std::size_t d)
{
   params.validate();
   return static_cast<double>(d) * std::pow(params.sigma, params.p);
}

} // namespace rgg
