#ifndef RGG_ENTROPY_HPP
#define RGG_ENTROPY_HPP

#include "rgg/distributions.hpp"
#include "rgg/sample_matrix.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>

namespace rgg {

/// Entropy of a law mixing an atom at zero with a density on (0, inf), in nats:
/// entropy = info_dim * continuous_part + bernoulli_part.
struct DDimEntropy {
   double info_dim = 0.0;
   double entropy = 0.0;
   double continuous_part = 0.0;
   double bernoulli_part = 0.0;
   /// false when too few positive samples were available for the spacing
   /// estimator; entropy then holds bernoulli_part alone
   bool continuous_available = true;
};

/// -q ln q - (1 - q) ln(1 - q), with 0 ln 0 = 0.
double binary_entropy(double q);

/// Differential entropy of GN_p(mu, sigma) truncated to (0, inf), by
/// double-exponential quadrature (tanh-sinh on finite pieces, exp-sinh on the
/// tail). Throws QuadratureFailure when the error estimate
/// exceeds 1e-8.
double tgn_entropy(const RGGParams& params);

DDimEntropy rgn_ddim_entropy_theoretical(const RGGParams& params);

/// Fraction of entries strictly greater than eps.
double info_dim_hat(const Eigen::Ref<const Eigen::VectorXd>& samples, double eps = 0.0);

/// ceil(sqrt(n)).
std::size_t default_spacing(std::size_t n);

/// Vasicek m-spacing estimate (1/(B-m)) sum ln((B+1)/m (x_(i+m) - x_(i))).
/// m defaults to default_spacing(B). Throws DegenerateInput when B < m + 2 or
/// a spacing has zero width (all-equal or heavily tied samples).
double mspacing_entropy(const Eigen::Ref<const Eigen::VectorXd>& samples,
                        std::optional<std::size_t> m = std::nullopt);

/// info_dim_hat * H1(positive entries) + binary entropy of info_dim_hat. The
/// spacing defaults to default_spacing(B') for the B' positive entries.
/// Entries must be >= 0; those <= eps count as zeros.
DDimEntropy ddim_entropy_empirical(const Eigen::Ref<const Eigen::VectorXd>& samples,
                                   std::optional<std::size_t> m = std::nullopt, double eps = 0.0);

/// Sum over columns of ddim_entropy_empirical; an upper bound on the joint
/// entropy, tight when the columns are independent.
double marginal_entropy_sum(const SampleMatrix& z, std::optional<std::size_t> m = std::nullopt,
                            double eps = 0.0);

} // namespace rgg

#endif
