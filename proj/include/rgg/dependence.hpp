#ifndef RGG_DEPENDENCE_HPP
#define RGG_DEPENDENCE_HPP

#include "rgg/sample_matrix.hpp"

#include <Eigen/Core>

#include <optional>
#include <utility>
#include <vector>

namespace rgg {

enum class BandwidthRule {
   /// positive_std when the input has exact zeros, median_pairwise otherwise
   automatic,
   median_pairwise,
   positive_std,
};

/// Gaussian kernel exp(-(a - b)^2 / (2 bw^2)).
struct KernelSpec {
   BandwidthRule rule = BandwidthRule::automatic;
   std::optional<double> bandwidth_override;
};

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Median of |x_i - x_j| over i < j.
double median_pairwise_distance(const VectorRef& x);

/// Sample standard deviation of the strictly positive entries.
double positive_std(const VectorRef& x);

/// Bandwidths for the kernels on x and y. positive_std uses one value from
/// the positive entries of x and y together; median_pairwise resolves each
/// variable on its own. Throws DegenerateInput when a bandwidth is zero or
/// cannot be formed.
std::pair<double, double> resolve_bandwidths(const VectorRef& x, const VectorRef& y, const KernelSpec& kernel);

/// Biased HSIC Tr(K H L H) / (B - 1)^2 with fixed bandwidths.
double hsic(const VectorRef& x, const VectorRef& y, double bandwidth_x, double bandwidth_y);
double hsic(const VectorRef& x, const VectorRef& y, const KernelSpec& kernel = {});

/// HSIC(x, y) / sqrt(HSIC(x, x) HSIC(y, y)), each variable keeping its own
/// kernel in all three terms, so the value lies in [0, 1].
double nhsic(const VectorRef& x, const VectorRef& y, const KernelSpec& kernel = {});

struct NhsicSummary {
   double mean = 0.0;
   std::size_t pairs_used = 0;
   /// constant columns, or columns whose bandwidth degenerates
   std::vector<Eigen::Index> excluded_columns;
};

/// Mean of nhsic over column pairs i < j, skipping degenerate columns. Under
/// positive_std one bandwidth is taken from all positive entries of z.
NhsicSummary nhsic_offdiag_mean(const SampleMatrix& z, const KernelSpec& kernel = {});

} // namespace rgg

#endif
