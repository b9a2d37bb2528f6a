#include "rgg/distributions.hpp"
#include "rgg/errors.hpp"
#include "rgg/sample_matrix.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

using namespace rgg;

namespace {

// int_0^inf g(x) dx for an integrand that may be kinked at x = mu
template <class F>
double half_line_integral(F g, double kink)
{
   boost::math::quadrature::exp_sinh<double> tail;
   if (kink <= 0.0) {
      return tail.integrate(g);
   }
   boost::math::quadrature::tanh_sinh<double> finite;
   return finite.integrate(g, 0.0, kink) + tail.integrate([&](double u) { return g(kink + u); });
}

double normal_cdf(double x)
{
   return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double laplace_cdf(double x)
{
   return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
}

double column_mean(const SampleMatrix& m) { return m.col(0).mean(); }

double column_variance(const SampleMatrix& m)
{
   const double mean = m.col(0).mean();
   return (m.col(0).array() - mean).square().sum() / static_cast<double>(m.rows() - 1);
}

} // namespace

TEST(GnPdf, Examples)
{
   EXPECT_NEAR(gn_pdf({2.0, 0.0, 1.0}, 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
   EXPECT_NEAR(gn_pdf({2.0, 0.0, 1.0}, 0.0), 0.3989422804, 1e-10);
   EXPECT_NEAR(gn_pdf({1.0, 0.0, 1.0}, 0.0), 0.5, 1e-15);
   EXPECT_GT(gn_pdf({0.5, 0.0, 1.0}, 1.0), 0.0);
}

TEST(GnPdf, IntegratesToOne)
{
   for (const RGGParams params : {RGGParams{0.5, 0.0, 1.0}, RGGParams{1.0, 2.0, 0.5},
                                  RGGParams{2.0, -1.0, 3.0}, RGGParams{4.0, 0.3, 0.7}}) {
      auto f = [&](double x) { return gn_pdf(params, x); };
      boost::math::quadrature::exp_sinh<double> tail;
      const double right = tail.integrate([&](double u) { return f(params.mu + u); });
      const double left = tail.integrate([&](double u) { return f(params.mu - u); });
      EXPECT_NEAR(left + right, 1.0, 1e-6) << "p = " << params.p;
   }
}

TEST(GnPdf, InvalidParams)
{
   EXPECT_THROW(gn_pdf({0.0, 0.0, 1.0}, 0.0), DomainError);
   EXPECT_THROW(gn_pdf({2.0, 0.0, -1.0}, 0.0), DomainError);
   EXPECT_THROW(gn_cdf({2.0, std::nan(""), 1.0}, 0.0), DomainError);
}

TEST(GnCdf, Examples)
{
   EXPECT_NEAR(gn_cdf({2.0, 0.0, 1.0}, 1.0), normal_cdf(1.0), 1e-14);
   EXPECT_NEAR(gn_cdf({2.0, 0.0, 1.0}, 1.0), 0.8413447461, 1e-10);
   EXPECT_NEAR(gn_cdf({1.0, 0.0, 1.0}, 1.0), 1.0 - 0.5 * std::exp(-1.0), 1e-15);
   EXPECT_NEAR(gn_cdf({1.0, 0.0, 1.0}, 1.0), 0.8160602794, 1e-10);
   for (double p : {0.3, 0.5, 1.0, 2.0, 7.0}) {
      EXPECT_EQ(gn_cdf({p, 1.25, 0.4}, 1.25), 0.5);
   }
}

TEST(GnCdf, MatchesNormalAndLaplaceClosedForms)
{
   for (int i = -4000; i <= 4000; ++i) {
      const double x = i * 0.002;
      EXPECT_NEAR(gn_cdf({2.0, 0.0, 1.0}, x), normal_cdf(x), 1e-10) << x;
      EXPECT_NEAR(gn_cdf({1.0, 0.0, 1.0}, x), laplace_cdf(x), 1e-12) << x;
   }
   // scaled and shifted
   EXPECT_NEAR(gn_cdf({2.0, 3.0, 2.0}, 1.0), normal_cdf(-1.0), 1e-12);
   EXPECT_NEAR(gn_cdf({1.0, -1.0, 0.5}, 0.0), laplace_cdf(2.0), 1e-12);
}

TEST(GnCdf, MonotoneAndMatchesIntegratedDensity)
{
   const RGGParams params{0.7, 0.5, 1.3};
   double prev = 0.0;
   for (int i = -300; i <= 300; ++i) {
      const double x = 0.05 * i;
      const double c = gn_cdf(params, x);
      EXPECT_GE(c, prev);
      prev = c;
   }
   boost::math::quadrature::exp_sinh<double> tail;
   boost::math::quadrature::tanh_sinh<double> finite;
   for (double x : {-3.0, -0.2, 0.5, 2.0, 6.0}) {
      // split at the cusp so each piece is smooth
      const double start = std::max(x, params.mu);
      double upper = tail.integrate([&](double u) { return gn_pdf(params, start + u); });
      if (x < params.mu) {
         upper += finite.integrate([&](double t) { return gn_pdf(params, t); }, x, params.mu);
      }
      EXPECT_NEAR(gn_cdf(params, x), 1.0 - upper, 1e-9) << x;
   }
}

TEST(GnCdf, ExtremeArgumentsSaturate)
{
   EXPECT_EQ(gn_cdf({2.0, 0.0, 1.0}, -1e6), 0.0);
   EXPECT_EQ(gn_cdf({2.0, 0.0, 1.0}, 1e6), 1.0);
   // small p keeps real tail mass far out; no premature short-circuit
   EXPECT_GT(gn_cdf({0.5, 0.0, 1.0}, -50.0), 1e-6);
}

TEST(RgnPdfMass, Examples)
{
   EXPECT_NEAR(rgn_pdf_mass({2.0, 0.0, 1.0}, 0.0).atom_at_zero, 0.5, 1e-15);
   EXPECT_EQ(rgn_pdf_mass({2.0, 0.0, 1.0}, 0.0).density, 0.0);
   EXPECT_NEAR(rgn_pdf_mass({2.0, 0.0, 1.0}, 1.0).density, 0.2419707245, 1e-9);
   EXPECT_EQ(rgn_pdf_mass({2.0, 0.0, 1.0}, 1.0).atom_at_zero, 0.0);
   EXPECT_NEAR(rgn_pdf_mass({1.0, -1.0, 1.0}, 0.0).atom_at_zero, laplace_cdf(1.0), 1e-15);
   EXPECT_NEAR(rgn_pdf_mass({1.0, -1.0, 1.0}, 0.0).atom_at_zero, 0.8160603, 1e-7);
   EXPECT_EQ(rgn_pdf_mass({1.0, -1.0, 1.0}, -2.0).density, 0.0);
}

TEST(RgnPdfMass, AtomPlusContinuousMassIsOne)
{
   for (const RGGParams params : {RGGParams{0.5, -1.0, 1.0}, RGGParams{1.0, 0.7, 2.0},
                                  RGGParams{2.0, 1.0, 0.3}}) {
      const double atom = rgn_pdf_mass(params, 0.0).atom_at_zero;
      const double continuous = half_line_integral(
         [&](double x) { return rgn_pdf_mass(params, x).density; }, params.mu);
      EXPECT_NEAR(atom + continuous, 1.0, 1e-8);
   }
}

TEST(SampleGn, NormalMoments)
{
   const auto x = sample_gn({2.0, 0.0, 1.0}, 1'000'000, 101);
   EXPECT_NEAR(column_mean(x), 0.0, 0.005);
   EXPECT_NEAR(column_variance(x), 1.0, 0.01);
}

TEST(SampleGn, LaplaceVariance)
{
   const auto x = sample_gn({1.0, 0.0, 1.0}, 1'000'000, 102);
   EXPECT_NEAR(column_mean(x), 0.0, 0.005);
   EXPECT_NEAR(column_variance(x), 2.0, 0.02);
}

TEST(SampleGn, LocationShift)
{
   const auto x = sample_gn({1.5, 5.0, 2.0}, 200'000, 103);
   // 4 standard errors of the mean
   const double se = std::sqrt(gn_variance({1.5, 5.0, 2.0}) / 200'000.0);
   EXPECT_NEAR(column_mean(x), 5.0, 4.0 * se);
}

TEST(SampleGn, DeterministicGivenSeed)
{
   EXPECT_EQ(sample_gn({0.8, 0.1, 1.0}, 1000, 5), sample_gn({0.8, 0.1, 1.0}, 1000, 5));
   EXPECT_NE(sample_gn({0.8, 0.1, 1.0}, 1000, 5), sample_gn({0.8, 0.1, 1.0}, 1000, 6));
   EXPECT_THROW(sample_gn({0.8, 0.1, 1.0}, 0, 5), DomainError);
}

TEST(SampleGn, EmpiricalCdfWithinDkwBand)
{
   // 20 random (p, mu, sigma), 1e5 draws each, 10 quantile points; DKW at 0.999
   constexpr std::size_t n = 100'000;
   const double band = std::sqrt(std::log(2.0 / 0.001) / (2.0 * n));
   std::mt19937_64 gen(2024);
   std::uniform_real_distribution<double> p_dist(0.3, 4.0);
   std::uniform_real_distribution<double> mu_dist(-2.0, 2.0);
   std::uniform_real_distribution<double> sigma_dist(0.2, 3.0);
   for (int trial = 0; trial < 20; ++trial) {
      const RGGParams params{p_dist(gen), mu_dist(gen), sigma_dist(gen)};
      const auto x = sample_gn(params, n, 500 + trial);
      std::vector<double> sorted(x.data(), x.data() + x.size());
      std::sort(sorted.begin(), sorted.end());
      for (int q = 1; q <= 10; ++q) {
         const double at = sorted[(q * n) / 11];
         const double empirical = static_cast<double>(
            std::upper_bound(sorted.begin(), sorted.end(), at) - sorted.begin()) / n;
         EXPECT_LE(std::abs(empirical - gn_cdf(params, at)), band)
            << "p=" << params.p << " mu=" << params.mu << " sigma=" << params.sigma;
      }
   }
}

TEST(SampleRgn, ZeroFractionAndMean)
{
   const auto y = sample_rgn({2.0, 0.0, 1.0}, 1'000'000, 104);
   EXPECT_GE(y.minCoeff(), 0.0);
   const double zeros = (y.array() == 0.0).cast<double>().mean();
   EXPECT_NEAR(zeros, 0.5, 0.002);
   EXPECT_NEAR(column_mean(y), 0.3989, 0.002);

   const auto far = sample_rgn({1.0, -10.0, 1.0}, 100'000, 105);
   EXPECT_GE((far.array() == 0.0).cast<double>().mean(), 0.9999);
}

TEST(SampleRgn, MatchesMomentsAndAtomOnGrid)
{
   constexpr std::size_t n = 400'000;
   std::uint64_t seed = 900;
   for (double p : {0.5, 1.0, 2.0}) {
      for (double mu : {-2.0, -1.0, 0.0, 1.0}) {
         for (double sigma : {sigma_gn(p), 1.0}) {
            const RGGParams params{p, mu, sigma};
            const auto y = sample_rgn(params, n, seed++);
            const auto m = rgn_moments(params);
            const double fourth = y.col(0).array().pow(4).mean();
            const double se_mean = std::sqrt(m.variance / n);
            const double se_var = std::sqrt(std::max(fourth - m.second_moment * m.second_moment, 0.0) / n);
            EXPECT_NEAR(column_mean(y), m.mean, 4.0 * se_mean) << p << " " << mu << " " << sigma;
            EXPECT_NEAR(column_variance(y), m.variance, 4.0 * se_var + 4.0 * se_mean * se_mean)
               << p << " " << mu << " " << sigma;

            const double atom = standard_gn_cdf(p, -mu / sigma);
            const double zeros = (y.array() == 0.0).cast<double>().mean();
            EXPECT_NEAR(zeros, atom, 4.0 * std::sqrt(atom * (1.0 - atom) / n));
         }
      }
   }
}

TEST(RgnMoments, Examples)
{
   const auto half_normal = rgn_moments({2.0, 0.0, 1.0});
   EXPECT_NEAR(half_normal.mean, 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-14);
   EXPECT_NEAR(half_normal.mean, 0.3989423, 1e-7);
   EXPECT_NEAR(half_normal.second_moment, 0.5, 1e-14);
   EXPECT_NEAR(half_normal.variance, 0.3408451, 1e-7);

   const auto laplace = rgn_moments({1.0, 0.0, 1.0});
   EXPECT_NEAR(laplace.mean, 0.5, 1e-14);
   EXPECT_NEAR(laplace.second_moment, 1.0, 1e-14);

   const auto far = rgn_moments({2.0, 10.0, 1.0});
   EXPECT_NEAR(far.mean, 10.0, 1e-6);
   EXPECT_NEAR(far.variance, 1.0, 1e-6);
}

TEST(RgnMoments, MatchQuadratureOfTheDensity)
{
   for (double p : {0.5, 1.0, 1.5, 2.0, 3.0}) {
      for (double mu : {-2.0, -0.5, 0.0, 0.8, 2.5}) {
         const RGGParams params{p, mu, 0.9};
         const auto m = rgn_moments(params);
         const double mean = half_line_integral([&](double x) { return x * gn_pdf(params, x); }, mu);
         const double second = half_line_integral([&](double x) { return x * x * gn_pdf(params, x); }, mu);
         EXPECT_NEAR(m.mean, mean, 1e-9) << p << " " << mu;
         EXPECT_NEAR(m.second_moment, second, 1e-9) << p << " " << mu;
         EXPECT_NEAR(m.variance, m.second_moment - m.mean * m.mean, 1e-12);
         EXPECT_GE(m.variance, 0.0);
      }
   }
}

TEST(RgnMoments, SecondMomentNeedsGammaRatioFactor)
{
   // The simplified display without Gamma(3/p)/Gamma(1/p) in the last term
   // gives E[X^2] = p^{2/p} sigma^2 / 2 at mu = 0, i.e. 0.5 for Laplace; the
   // true value (and the integral form used here) is 1.
   const double p = 1.0;
   const double display_without_factor = 0.5 * std::pow(p, 2.0 / p);
   const auto m = rgn_moments({p, 0.0, 1.0});
   EXPECT_NEAR(display_without_factor, 0.5, 1e-15);
   EXPECT_NEAR(m.second_moment, 1.0, 1e-14);
}

TEST(SigmaGn, ClosedForm)
{
   EXPECT_NEAR(sigma_gn(2.0), 1.0, 1e-12);
   EXPECT_NEAR(sigma_gn(1.0), 1.0 / std::numbers::sqrt2, 1e-12);
   EXPECT_NEAR(sigma_gn(1.0), 0.7071068, 1e-7);
   for (double p : {0.25, 0.5, 0.9, 1.3, 2.0, 3.7, 8.0}) {
      EXPECT_NEAR(gn_variance({p, 0.0, sigma_gn(p)}), 1.0, 1e-10) << p;
   }
   EXPECT_THROW(sigma_gn(0.0), DomainError);
}

TEST(SigmaRgn, HalfNormalCase)
{
   const double expected = 1.0 / std::sqrt(0.5 - 0.5 / std::numbers::pi);
   const auto sol = sigma_rgn(2.0, 0.0, 1e-10);
   EXPECT_NEAR(sol.sigma, 1.71295, 1e-4);
   EXPECT_NEAR(sol.sigma, expected, 1e-9);
   EXPECT_LE(sol.iterations, 40);
   EXPECT_GE(sol.iterations, 25);
   EXPECT_LT(std::abs(sol.variance - 1.0), 10 * 1e-10);
}

TEST(SigmaRgn, SolvesAcrossGrid)
{
   for (double p : {0.5, 1.0, 2.0, 3.0}) {
      for (double mu : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
         const auto sol = sigma_rgn(p, mu, 1e-10);
         EXPECT_LT(std::abs(rgn_moments({p, mu, sol.sigma}).variance - 1.0), 1e-9) << p << " " << mu;
      }
   }
}

TEST(SigmaRgn, Errors)
{
   EXPECT_THROW(sigma_rgn(2.0, 0.0, 0.0), DomainError);
   EXPECT_THROW(sigma_rgn(-1.0, 0.0, 1e-8), DomainError);
   // unit variance would need sigma far beyond the allowed bracket
   EXPECT_THROW(sigma_rgn(2.0, -1e5, 1e-8), BracketingFailure);
}

TEST(ExpectedL0, Examples)
{
   for (double p : {0.5, 1.0, 2.0}) {
      EXPECT_EQ(expected_l0({p, 0.0, 1.0}, 100), 50.0);
   }
   EXPECT_NEAR(expected_l0({2.0, 1.0, 1.0}, 100), 100 * normal_cdf(1.0), 1e-10);
   EXPECT_NEAR(expected_l0({2.0, 1.0, 1.0}, 100), 84.134, 1e-3);

   const double s = sigma_gn(1.0);
   const double laplace_tail = 0.5 * std::exp(-3.0 / s);
   EXPECT_NEAR(expected_l0({1.0, -3.0, s}, 1), laplace_tail, 1e-14);
   EXPECT_NEAR(expected_l0({1.0, -3.0, s}, 1), 0.00718, 1e-5);
   EXPECT_THROW(expected_l0({1.0, 0.0, 1.0}, 0), DomainError);
}

TEST(ExpectedL0, ComplementsTheAtom)
{
   std::mt19937_64 gen(3);
   std::uniform_real_distribution<double> p_dist(0.2, 5.0);
   std::uniform_real_distribution<double> mu_dist(-6.0, 6.0);
   std::uniform_real_distribution<double> sigma_dist(0.1, 4.0);
   for (int i = 0; i < 500; ++i) {
      const RGGParams params{p_dist(gen), mu_dist(gen), sigma_dist(gen)};
      const double per_dim = expected_l0(params, 37) / 37.0;
      EXPECT_NEAR(per_dim + rgn_pdf_mass(params, 0.0).atom_at_zero, 1.0, 1e-12);
   }
}

TEST(LpNormConstraint, MatchesDSigmaToThePowerP)
{
   Rng rng(77);
   const RGGParams gauss{2.0, 0.0, 1.0};
   EXPECT_NEAR(lp_norm_constraint_check(gauss, sample_gn(gauss, 100'000, 32, rng)), 32.0, 0.3);
   const RGGParams laplace{1.0, 0.0, 1.0};
   EXPECT_NEAR(lp_norm_constraint_check(laplace, sample_gn(laplace, 100'000, 10, rng)), 10.0, 0.15);
   const RGGParams sparse{0.5, 0.0, 1.7};
   const double se = std::sqrt(8.0 * 2.0 / 100'000.0) * std::pow(1.7, 0.5) * 2.0;
   EXPECT_NEAR(lp_norm_constraint_check(sparse, sample_gn(sparse, 100'000, 8, rng)),
               lp_norm_expectation(sparse, 8), 4.0 * se);
   EXPECT_THROW(lp_norm_constraint_check({2.0, 1.0, 1.0}, SampleMatrix::Ones(3, 3)), DomainError);
}

TEST(SampleMatrixCsv, RoundTripIsExact)
{
   Rng rng(8);
   const auto m = sample_gn({0.7, -0.3, 2.5}, 50, 6, rng);
   std::stringstream buf;
   write_csv(buf, m);
   std::string header;
   std::getline(std::stringstream(buf.str()), header);
   EXPECT_EQ(header, "dim_0,dim_1,dim_2,dim_3,dim_4,dim_5");
   EXPECT_EQ(read_csv(buf), m);
}

TEST(SampleMatrixCsv, MalformedReportsLine)
{
   std::stringstream bad("dim_0,dim_1\n1,2\n3,x\n");
   try {
      read_csv(bad);
      FAIL() << "expected ParseError";
   } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 3u);
   }
   std::stringstream ragged("dim_0,dim_1\n1,2\n3\n");
   EXPECT_THROW(read_csv(ragged), ParseError);
   std::stringstream empty("");
   EXPECT_THROW(read_csv(empty), ParseError);
}
