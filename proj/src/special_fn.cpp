#include "rgg/special_fn.hpp"

#include "rgg/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rgg::special {

namespace {

// Lanczos g = 7, n = 9 (Godfrey).
constexpr double lanczos_g = 7.0;
constexpr std::array<double, 9> lanczos_coef = {
   0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
   771.32342877765313,   -176.61502916214059,   12.507343278686905,
   -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Largest s with finite Gamma(s) in double precision.
constexpr double gamma_overflow_arg = 171.6243769563027;

constexpr double tiny = 1e-300;
constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr int max_iterations = 100000;

double lanczos_sum(double x)
{
   double a = lanczos_coef[0];
   for (std::size_t i = 1; i < lanczos_coef.size(); ++i) {
      a += lanczos_coef[i] / (x + static_cast<double>(i));
   }
   return a;
}

void check_shape(double s, const char* fn)
{
   if (!(s > 0.0) || !std::isfinite(s)) {
      throw DomainError(std::string(fn) + ": shape must be positive and finite, got "
                        + std::to_string(s));
   }
}

void check_incomplete_args(double s, double t, const char* fn)
{
   check_shape(s, fn);
   if (!(t >= 0.0) || std::isnan(t)) {
      throw DomainError(std::string(fn) + ": argument must be non-negative, got "
                        + std::to_string(t));
   }
}

/// sum_{n>=0} t^n / ((s)(s+1)...(s+n)), so gamma(s,t) = t^s e^{-t} * series.
double lower_series(double s, double t)
{
   double ap = s;
   double del = 1.0 / s;
   double sum = del;
   for (int n = 0; n < max_iterations; ++n) {
      ap += 1.0;
      del *= t / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps) {
         return sum;
      }
   }
   throw std::runtime_error("incomplete gamma series failed to converge");
}

/// Continued fraction with Gamma(s,t) = t^s e^{-t} * cf, valid for t >= s + 1.
double upper_continued_fraction(double s, double t)
{
   double b = t + 1.0 - s;
   double c = 1.0 / tiny;
   double d = 1.0 / b;
   double h = d;
   for (int i = 1; i < max_iterations; ++i) {
      const double an = -i * (i - s);
      b += 2.0;
      d = an * d + b;
      if (std::abs(d) < tiny) {
         d = tiny;
      }
      c = b + an / c;
      if (std::abs(c) < tiny) {
         c = tiny;
      }
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < eps) {
         return h;
      }
   }
   throw std::runtime_error("incomplete gamma continued fraction failed to converge");
}

double log_prefactor(double s, double t)
{
   return s * std::log(t) - t;
}

} // namespace

double gamma(double s)
{
   check_shape(s, "gamma");
   if (s > gamma_overflow_arg) {
      throw OverflowError("gamma: result overflows for s = " + std::to_string(s));
   }
   if (s < 0.5) {
      return gamma(s + 1.0) / s;
   }
   const double x = s - 1.0;
   const double t = x + lanczos_g + 0.5;
   // split the power so t^(x+1/2) does not overflow before e^{-t} is applied
   const double half_power = std::pow(t, 0.5 * (x + 0.5));
   return std::sqrt(2.0 * std::numbers::pi) * half_power * (half_power * std::exp(-t))
      * lanczos_sum(x);
}

double log_gamma(double s)
{
   check_shape(s, "log_gamma");
   if (s < 0.5) {
      return log_gamma(s + 1.0) - std::log(s);
   }
   const double x = s - 1.0;
   const double t = x + lanczos_g + 0.5;
   return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t
      + std::log(lanczos_sum(x));
}

double gamma_lower(double s, double t)
{
   check_incomplete_args(s, t, "gamma_lower");
   if (t == 0.0) {
      return 0.0;
   }
   if (std::isinf(t)) {
      return gamma(s);
   }
   if (t < s + 1.0) {
      return std::exp(log_prefactor(s, t)) * lower_series(s, t);
   }
   return gamma(s) - std::exp(log_prefactor(s, t)) * upper_continued_fraction(s, t);
}

double gamma_upper(double s, double t)
{
   check_incomplete_args(s, t, "gamma_upper");
   if (t == 0.0) {
      return gamma(s);
   }
   if (std::isinf(t)) {
      return 0.0;
   }
   if (t < s + 1.0) {
      return gamma(s) - std::exp(log_prefactor(s, t)) * lower_series(s, t);
   }
   return std::exp(log_prefactor(s, t)) * upper_continued_fraction(s, t);
}

double gamma_lower_regularized(double s, double t)
{
   check_incomplete_args(s, t, "gamma_lower_regularized");
   if (t == 0.0) {
      return 0.0;
   }
   if (std::isinf(t)) {
      return 1.0;
   }
   if (t < s + 1.0) {
      return std::exp(log_prefactor(s, t) - log_gamma(s)) * lower_series(s, t);
   }
   return 1.0 - std::exp(log_prefactor(s, t) - log_gamma(s)) * upper_continued_fraction(s, t);
}

double gamma_upper_regularized(double s, double t)
{
   check_incomplete_args(s, t, "gamma_upper_regularized");
   if (t == 0.0) {
      return 1.0;
   }
   if (std::isinf(t)) {
      return 0.0;
   }
   if (t < s + 1.0) {
      return 1.0 - std::exp(log_prefactor(s, t) - log_gamma(s)) * lower_series(s, t);
   }
   return std::exp(log_prefactor(s, t) - log_gamma(s)) * upper_continued_fraction(s, t);
}

} // namespace rgg::special
