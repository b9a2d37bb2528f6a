#include "rgg/dependence.hpp"

#include "rgg/errors.hpp"
#include "rgg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rgg {

namespace {

void require_samples(const VectorRef& x, const char* what)
{
   if (x.size() < 3) {
      throw DegenerateInput(std::string(what) + ": need at least 3 samples");
   }
   if (!x.allFinite()) {
      throw DegenerateInput(std::string(what) + ": non-finite sample");
   }
}

bool has_exact_zero(const VectorRef& x)
{
   return (x.array() == 0.0).any();
}

double checked(double bandwidth, const char* rule)
{
   if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
      throw DegenerateInput(std::string("kernel bandwidth from ") + rule + " is zero or undefined");
   }
   return bandwidth;
}

// Row sums K 1 of the Gaussian kernel matrix on x.
Eigen::VectorXd kernel_row_sums(const VectorRef& x, double scale)
{
   const Eigen::Index n = x.size();
   Eigen::VectorXd sums = Eigen::VectorXd::Ones(n);
   for (Eigen::Index j = 1; j < n; ++j) {
      const Eigen::ArrayXd k = ((x.head(j).array() - x(j)).square() * scale).exp();
      sums.head(j).array() += k;
      sums(j) += k.sum();
   }
   return sums;
}

// sum_ij K_ij L_ij; the product of two Gaussian kernels is one exponential
double kernel_product_sum(const VectorRef& x, double scale_x, const VectorRef& y, double scale_y)
{
   const Eigen::Index n = x.size();
   double off = 0.0;
   for (Eigen::Index j = 1; j < n; ++j) {
      off += ((x.head(j).array() - x(j)).square() * scale_x + (y.head(j).array() - y(j)).square() * scale_y)
                .exp()
                .sum();
   }
   return static_cast<double>(n) + 2.0 * off;
}

// Kernel on one variable: its exponent scale and row sums.
struct KernelStats {
   double scale = 0.0;
   Eigen::VectorXd row_sums;
   double total = 0.0;
};

KernelStats kernel_stats(const VectorRef& x, double bandwidth)
{
   KernelStats out;
   out.scale = -0.5 / (bandwidth * bandwidth);
   out.row_sums = kernel_row_sums(x, out.scale);
   out.total = out.row_sums.sum();
   return out;
}

// Tr(K H L H) / (B - 1)^2
//    = [sum K o L - (2/B) (K1).(L1) + (1/B^2) (1'K1)(1'L1)] / (B - 1)^2
double hsic_from_stats(const VectorRef& x, const KernelStats& kx, const VectorRef& y, const KernelStats& ky)
{
   const auto b = static_cast<double>(x.size());
   const double trace = kernel_product_sum(x, kx.scale, y, ky.scale) - 2.0 / b * kx.row_sums.dot(ky.row_sums)
      + kx.total * ky.total / (b * b);
   return trace / ((b - 1.0) * (b - 1.0));
}

} // namespace

double median_pairwise_distance(const VectorRef& x)
{
   require_samples(x, "median_pairwise_distance");
   std::vector<double> d;
   d.reserve(static_cast<std::size_t>(x.size() * (x.size() - 1) / 2));
   for (Eigen::Index i = 0; i < x.size(); ++i) {
      for (Eigen::Index j = i + 1; j < x.size(); ++j) {
         d.push_back(std::abs(x(i) - x(j)));
      }
   }
   const std::size_t mid = d.size() / 2;
   std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
   if (d.size() % 2 == 1) {
      return d[mid];
   }
   const double upper = d[mid];
   const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
   return 0.5 * (lower + upper);
}

double positive_std(const VectorRef& x)
{
   double sum = 0.0;
   double count = 0.0;
   for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x(i) > 0.0) {
         sum += x(i);
         count += 1.0;
      }
   }
   if (count < 2.0) {
      throw DegenerateInput("positive_std: fewer than 2 positive entries");
   }
   const double mean = sum / count;
   double ss = 0.0;
   for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x(i) > 0.0) {
         ss += (x(i) - mean) * (x(i) - mean);
      }
   }
   return std::sqrt(ss / (count - 1.0));
}

std::pair<double, double> resolve_bandwidths(const VectorRef& x, const VectorRef& y, const KernelSpec& kernel)
{
   if (kernel.bandwidth_override) {
      const double bw = checked(*kernel.bandwidth_override, "override");
      return {bw, bw};
   }
   BandwidthRule rule = kernel.rule;
   if (rule == BandwidthRule::automatic) {
      rule = has_exact_zero(x) || has_exact_zero(y) ? BandwidthRule::positive_std : BandwidthRule::median_pairwise;
   }
   if (rule == BandwidthRule::positive_std) {
      Eigen::VectorXd both(x.size() + y.size());
      both << x, y;
      const double bw = checked(positive_std(both), "positive_std");
      return {bw, bw};
   }
   return {checked(median_pairwise_distance(x), "median_pairwise"),
           checked(median_pairwise_distance(y), "median_pairwise")};
}

double hsic(const VectorRef& x, const VectorRef& y, double bandwidth_x, double bandwidth_y)
{
   require_samples(x, "hsic");
   require_samples(y, "hsic");
   if (x.size() != y.size()) {
      throw ShapeMismatch("hsic: x and y lengths differ");
   }
   checked(bandwidth_x, "argument");
   checked(bandwidth_y, "argument");
   return hsic_from_stats(x, kernel_stats(x, bandwidth_x), y, kernel_stats(y, bandwidth_y));
}

double hsic(const VectorRef& x, const VectorRef& y, const KernelSpec& kernel)
{
   require_samples(x, "hsic");
   require_samples(y, "hsic");
   const auto [bx, by] = resolve_bandwidths(x, y, kernel);
   return hsic(x, y, bx, by);
}

double nhsic(const VectorRef& x, const VectorRef& y, const KernelSpec& kernel)
{
   require_samples(x, "nhsic");
   require_samples(y, "nhsic");
   if (x.size() != y.size()) {
      throw ShapeMismatch("nhsic: x and y lengths differ");
   }
   if (x.maxCoeff() == x.minCoeff() || y.maxCoeff() == y.minCoeff()) {
      throw DegenerateInput("nhsic: zero self-HSIC (constant input)");
   }
   const auto [bx, by] = resolve_bandwidths(x, y, kernel);
   const KernelStats kx = kernel_stats(x, bx);
   const KernelStats ky = kernel_stats(y, by);
   const double xx = hsic_from_stats(x, kx, x, kx);
   const double yy = hsic_from_stats(y, ky, y, ky);
   if (!(xx > 0.0) || !(yy > 0.0)) {
      throw DegenerateInput("nhsic: zero self-HSIC (constant input)");
   }
   return hsic_from_stats(x, kx, y, ky) / std::sqrt(xx * yy);
}

NhsicSummary nhsic_offdiag_mean(const SampleMatrix& z, const KernelSpec& kernel)
{
   if (z.cols() < 2) {
      throw DomainError("nhsic_offdiag_mean: need at least 2 columns");
   }
   if (z.rows() < 3) {
      throw DegenerateInput("nhsic_offdiag_mean: need at least 3 rows");
   }
   require_valid(z, "nhsic_offdiag_mean");

   BandwidthRule rule = kernel.rule;
   if (rule == BandwidthRule::automatic) {
      rule = (z.array() == 0.0).any() ? BandwidthRule::positive_std : BandwidthRule::median_pairwise;
   }
   std::optional<double> shared = kernel.bandwidth_override;
   if (!shared && rule == BandwidthRule::positive_std) {
      const Eigen::Map<const Eigen::VectorXd> all(z.data(), z.size());
      shared = checked(positive_std(all), "positive_std");
   }

   NhsicSummary out;
   std::vector<Eigen::Index> used;
   std::vector<double> bandwidths;
   for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const auto col = z.col(j);
      if (col.maxCoeff() == col.minCoeff()) {
         out.excluded_columns.push_back(j);
         continue;
      }
      const double bw = shared ? *shared : median_pairwise_distance(col);
      if (!(bw > 0.0)) {
         out.excluded_columns.push_back(j);
         continue;
      }
      used.push_back(j);
      bandwidths.push_back(bw);
   }
   if (used.size() < 2) {
      throw DegenerateInput("nhsic_offdiag_mean: fewer than 2 non-degenerate columns");
   }

   const std::size_t k = used.size();
   std::vector<KernelStats> stats(k);
   std::vector<double> self(k);
   parallel_for(k, [&](std::size_t begin, std::size_t end) {
      for (std::size_t a = begin; a < end; ++a) {
         const auto col = z.col(used[a]);
         stats[a] = kernel_stats(col, bandwidths[a]);
         self[a] = hsic_from_stats(col, stats[a], col, stats[a]);
      }
   });
   for (std::size_t a = 0; a < k; ++a) {
      if (!(self[a] > 0.0)) {
         throw DegenerateInput("nhsic_offdiag_mean: zero self-HSIC in a non-constant column");
      }
   }

   std::vector<std::pair<std::size_t, std::size_t>> pairs;
   for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
         pairs.emplace_back(a, b);
      }
   }
   std::vector<double> values(pairs.size());
   parallel_for(pairs.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
         const auto [a, b] = pairs[i];
         const double cross = hsic_from_stats(z.col(used[a]), stats[a], z.col(used[b]), stats[b]);
         values[i] = cross / std::sqrt(self[a] * self[b]);
      }
   });

   double total = 0.0;
   for (double v : values) {
      total += v;
   }
   out.pairs_used = values.size();
   out.mean = total / static_cast<double>(values.size());
   return out;
}

} // namespace rgg
