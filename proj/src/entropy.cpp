#include "rgg/entropy.hpp"

#include "rgg/errors.hpp"
#include "rgg/parallel.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace rgg {

double binary_entropy(double q)
{
   if (!(q >= 0.0 && q <= 1.0)) {
      throw DomainError("binary_entropy: probability outside [0, 1]");
   }
   double h = 0.0;
   if (q > 0.0) {
      h -= q * std::log(q);
   }
   if (q < 1.0) {
      h -= (1.0 - q) * std::log1p(-q);
   }
   return h;
}

namespace {

std::string fmt_sci(double v)
{
   char buf[32];
   std::snprintf(buf, sizeof buf, "%.3g", v);
   return buf;
}

constexpr double quadrature_tolerance = 1e-8;

// int_a^b f with b finite, or int_a^inf f when b is infinite
template <class F>
double integrate(F f, double a, double b, double& error_sum)
{
   double error = 0.0;
   double l1 = 0.0;
   double value = 0.0;
   if (std::isinf(b)) {
      boost::math::quadrature::exp_sinh<double> rule;
      value = rule.integrate([&](double u) { return f(a + u); }, 0.0, b, 1e-12, &error, &l1);
   } else {
      boost::math::quadrature::tanh_sinh<double> rule;
      value = rule.integrate(f, a, b, 1e-12, &error, &l1);
   }
   error_sum += error;
   return value;
}

} // namespace

double tgn_entropy(const RGGParams& params)
{
   params.validate();
   const double p = params.p;
   // Standardize z = (x - mu) / sigma; the truncation point is z0 = -mu/sigma.
   // With t0 = max(z0, 0)^p / p and b(z) = |z|^p / p - t0 >= 0 on z > z0,
   //    H = ln sigma + ln(int e^{-b}) + E[b | z > z0],
   // the normalizer and t0 cancelling out. Working with b rather than |z|^p/p
   // keeps a far-out truncation point from underflowing or cancelling.
   const double z0 = -params.mu / params.sigma;
   const double t0 = z0 > 0.0 ? std::pow(z0, p) / p : 0.0;
   auto excess = [=](double z) { return std::pow(std::abs(z), p) / p - t0; };
   auto weight = [=](double z) { return std::exp(-excess(z)); };
   auto moment = [=](double z) {
      const double e = excess(z);
      const double w = std::exp(-e);
      return w == 0.0 ? 0.0 : e * w;
   };

   double error = 0.0;
   const double inf = std::numeric_limits<double>::infinity();
   double mass = 0.0;
   double first = 0.0;
   if (z0 < 0.0) {
      // split at the cusp of |z|^p
      mass = integrate(weight, z0, 0.0, error) + integrate(weight, 0.0, inf, error);
      first = integrate(moment, z0, 0.0, error) + integrate(moment, 0.0, inf, error);
   } else {
      mass = integrate(weight, z0, inf, error);
      first = integrate(moment, z0, inf, error);
   }
   if (!(mass > 0.0) || !std::isfinite(first)) {
      throw QuadratureFailure("tgn_entropy: truncated mass vanished", error);
   }
   const double h = std::log(params.sigma) + std::log(mass) + first / mass;
   const double h_error = error / mass * (1.0 + std::abs(first / mass));
   if (!(h_error <= quadrature_tolerance) || !std::isfinite(h)) {
      throw QuadratureFailure("tgn_entropy: quadrature error estimate " + fmt_sci(h_error) + " (p = "
                                 + std::to_string(p) + ", mu = " + std::to_string(params.mu)
                                 + ") above tolerance",
                              h_error);
   }
   return h;
}

DDimEntropy rgn_ddim_entropy_theoretical(const RGGParams& params)
{
   params.validate();
   DDimEntropy out;
   out.info_dim = nonzero_probability(params);
   out.continuous_part = tgn_entropy(params);
   out.bernoulli_part = binary_entropy(out.info_dim);
   out.entropy = out.info_dim * out.continuous_part + out.bernoulli_part;
   return out;
}

double info_dim_hat(const Eigen::Ref<const Eigen::VectorXd>& samples, double eps)
{
   if (samples.size() < 1) {
      throw DegenerateInput("info_dim_hat: empty sample");
   }
   return (samples.array() > eps).cast<double>().mean();
}

std::size_t default_spacing(std::size_t n)
{
   auto m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
   // guard against sqrt rounding for perfect squares
   while (m > 1 && (m - 1) * (m - 1) >= n) {
      --m;
   }
   return std::max<std::size_t>(m, 1);
}

namespace {

double mspacing_sorted(const std::vector<double>& x, std::size_t m)
{
   const std::size_t n = x.size();
   if (m < 1 || n < m + 2) {
      throw DegenerateInput("mspacing_entropy: need at least m + 2 samples (B = " + std::to_string(n)
                            + ", m = " + std::to_string(m) + ")");
   }
   const double scale = static_cast<double>(n + 1) / static_cast<double>(m);
   double sum = 0.0;
   for (std::size_t i = 0; i + m < n; ++i) {
      const double gap = x[i + m] - x[i];
      if (!(gap > 0.0)) {
         throw DegenerateInput("mspacing_entropy: zero-width spacing (tied samples)");
      }
      sum += std::log(scale * gap);
   }
   return sum / static_cast<double>(n - m);
}

} // namespace

double mspacing_entropy(const Eigen::Ref<const Eigen::VectorXd>& samples, std::optional<std::size_t> m)
{
   std::vector<double> x(samples.data(), samples.data() + samples.size());
   for (double v : x) {
      if (!std::isfinite(v)) {
         throw DegenerateInput("mspacing_entropy: non-finite sample");
      }
   }
   std::sort(x.begin(), x.end());
   return mspacing_sorted(x, m.value_or(default_spacing(x.size())));
}

DDimEntropy ddim_entropy_empirical(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                   std::optional<std::size_t> m, double eps)
{
   if (samples.size() < 4) {
      throw DegenerateInput("ddim_entropy_empirical: need at least 4 samples");
   }
   std::vector<double> positive;
   for (Eigen::Index i = 0; i < samples.size(); ++i) {
      const double v = samples(i);
      if (!(v >= 0.0) || !std::isfinite(v)) {
         throw DomainError("ddim_entropy_empirical: samples must be finite and nonnegative");
      }
      if (v > eps) {
         positive.push_back(v);
      }
   }
   DDimEntropy out;
   out.info_dim = static_cast<double>(positive.size()) / static_cast<double>(samples.size());
   out.bernoulli_part = binary_entropy(out.info_dim);

   const std::size_t spacing = m.value_or(default_spacing(positive.size()));
   if (positive.size() < spacing + 2) {
      out.continuous_available = false;
      out.entropy = out.bernoulli_part;
      return out;
   }
   std::sort(positive.begin(), positive.end());
   out.continuous_part = mspacing_sorted(positive, spacing);
   out.entropy = out.info_dim * out.continuous_part + out.bernoulli_part;
   return out;
}

double marginal_entropy_sum(const SampleMatrix& z, std::optional<std::size_t> m, double eps)
{
   std::vector<double> per_column(static_cast<std::size_t>(z.cols()));
   parallel_for(per_column.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j) {
         per_column[j] = ddim_entropy_empirical(z.col(static_cast<Eigen::Index>(j)), m, eps).entropy;
      }
   });
   double total = 0.0;
   for (double h : per_column) {
      total += h;
   }
   return total;
}

} // namespace rgg
