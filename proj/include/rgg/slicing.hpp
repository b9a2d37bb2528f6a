#ifndef RGG_SLICING_HPP
#define RGG_SLICING_HPP

#include "rgg/distributions.hpp"
#include "rgg/rng.hpp"
#include "rgg/sample_matrix.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace rgg {

enum class ProjectionPolicy { random_sphere, random_plus_top_eig, random_plus_bottom_eig };

std::string to_string(ProjectionPolicy policy);
/// Accepts the names printed by to_string; throws DomainError otherwise.
ProjectionPolicy parse_projection_policy(const std::string& name);

/// N unit directions in R^D, one per row.
struct ProjectionSet {
   Eigen::MatrixXd directions;
   ProjectionPolicy policy = ProjectionPolicy::random_sphere;

   Eigen::Index count() const { return directions.rows(); }
   Eigen::Index dim() const { return directions.cols(); }
};

struct LossBreakdown {
   double invariance = 0.0;
   double rdmreg_view1 = 0.0;
   double rdmreg_view2 = 0.0;
   double total = 0.0;
};

/// Loss together with its gradient with respect to both views.
struct LossWithGradient {
   LossBreakdown loss;
   SampleMatrix d_z;
   SampleMatrix d_zprime;
};

inline constexpr double default_lambda_sim = 25.0;
inline constexpr double default_lambda_dist = 125.0;

/// Rows are normalized isotropic Gaussian vectors.
ProjectionSet sample_sphere_projections(std::size_t n, std::size_t d, Rng& rng);
ProjectionSet sample_sphere_projections(std::size_t n, std::size_t d, std::uint64_t seed);

enum class EigenSide { top, bottom };

/// k unit eigenvectors of empirical_covariance(z), by descending (top) or
/// ascending (bottom) eigenvalue. Each vector's sign is fixed so its
/// largest-magnitude entry is positive.
ProjectionSet eig_projections(const SampleMatrix& z, std::size_t k, EigenSide which);

/// Default number of eigenvector rows for the mixed policies: min(B, D) for
/// top, half of that (at least 1) for bottom.
std::size_t default_eig_count(std::size_t batch, std::size_t dim, ProjectionPolicy policy);

/// n directions for the given policy. The eigen policies take
/// min(k, n) eigenvectors of z and fill the remaining rows from the sphere.
ProjectionSet make_projections(ProjectionPolicy policy, std::size_t n, const SampleMatrix& z, Rng& rng,
                               std::optional<std::size_t> k = std::nullopt);

/// (1/B) sum_i (sort(z)_i - sort(y)_i)^2.
double sliced_w2_1d(const Eigen::Ref<const Eigen::VectorXd>& zproj,
                    const Eigen::Ref<const Eigen::VectorXd>& yproj);

/// Mean of sliced_w2_1d over all directions. When grad is given it receives
/// the derivative with respect to z (same shape as z).
double sliced_w2(const SampleMatrix& z, const SampleMatrix& y, const ProjectionSet& proj,
                 SampleMatrix* grad = nullptr);

/// Invariance plus sliced matching of both views against one target sample Y
/// drawn from RGN(target) with the given seed.
LossBreakdown rdmreg_loss(const SampleMatrix& z, const SampleMatrix& zprime, const RGGParams& target,
                          const ProjectionSet& proj, double lambda_sim, double lambda_dist,
                          std::uint64_t seed);

/// Same with a caller-supplied target sample.
LossBreakdown rdmreg_loss(const SampleMatrix& z, const SampleMatrix& zprime, const SampleMatrix& y,
                          const ProjectionSet& proj, double lambda_sim, double lambda_dist);

LossWithGradient rdmreg_loss_with_gradient(const SampleMatrix& z, const SampleMatrix& zprime,
                                           const SampleMatrix& y, const ProjectionSet& proj,
                                           double lambda_sim, double lambda_dist);

/// Mean sliced W2 between z and a fresh RGN(target) sample of the same shape
/// over n_proj random directions.
double sliced_stat_profile(const SampleMatrix& z, const RGGParams& target, std::size_t n_proj,
                           std::uint64_t seed);

} // namespace rgg

#endif
