#include "rgg/slicing.hpp"

#include "rgg/errors.hpp"
#include "rgg/parallel.hpp"

#include "radix_order.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <vector>

namespace rgg {

std::string to_string(ProjectionPolicy policy)
{
   switch (policy) {
   case ProjectionPolicy::random_sphere:
      return "random_sphere";
   case ProjectionPolicy::random_plus_top_eig:
      return "random_plus_top_eig";
   case ProjectionPolicy::random_plus_bottom_eig:
      return "random_plus_bottom_eig";
   }
   return "unknown";
}

ProjectionPolicy parse_projection_policy(const std::string& name)
{
   for (auto policy : {ProjectionPolicy::random_sphere, ProjectionPolicy::random_plus_top_eig,
                       ProjectionPolicy::random_plus_bottom_eig}) {
      if (name == to_string(policy)) {
         return policy;
      }
   }
   throw DomainError("unknown projection policy '" + name + "'");
}

ProjectionSet sample_sphere_projections(std::size_t n, std::size_t d, Rng& rng)
{
   if (n < 1 || d < 1) {
      throw DomainError("sample_sphere_projections: n and d must be at least 1");
   }
   ProjectionSet out;
   out.directions.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
   for (Eigen::Index i = 0; i < out.directions.rows(); ++i) {
      double norm = 0.0;
      do {
         for (Eigen::Index j = 0; j < out.directions.cols(); ++j) {
            out.directions(i, j) = rng.normal();
         }
         norm = out.directions.row(i).norm();
      } while (norm == 0.0);
      out.directions.row(i) /= norm;
   }
   return out;
}

ProjectionSet sample_sphere_projections(std::size_t n, std::size_t d, std::uint64_t seed)
{
   Rng rng(seed);
   return sample_sphere_projections(n, d, rng);
}

ProjectionSet eig_projections(const SampleMatrix& z, std::size_t k, EigenSide which)
{
   if (z.rows() < 2) {
      throw DegenerateInput("eig_projections: need at least 2 rows");
   }
   const auto limit = static_cast<std::size_t>(std::min(z.rows(), z.cols()));
   if (k < 1 || k > limit) {
      throw DomainError("eig_projections: k must be in [1, min(B, D)]");
   }
   Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(empirical_covariance(z));
   if (solver.info() != Eigen::Success) {
      throw DegenerateInput("eig_projections: eigendecomposition failed");
   }
   // eigenvalues come back ascending
   const Eigen::MatrixXd& vectors = solver.eigenvectors();
   const Eigen::Index d = z.cols();

   ProjectionSet out;
   out.policy = which == EigenSide::top ? ProjectionPolicy::random_plus_top_eig
                                        : ProjectionPolicy::random_plus_bottom_eig;
   out.directions.resize(static_cast<Eigen::Index>(k), d);
   for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
      const Eigen::Index col = which == EigenSide::top ? d - 1 - i : i;
      Eigen::VectorXd v = vectors.col(col).normalized();
      Eigen::Index largest = 0;
      v.cwiseAbs().maxCoeff(&largest);
      if (v(largest) < 0.0) {
         v = -v;
      }
      out.directions.row(i) = v.transpose();
   }
   return out;
}

std::size_t default_eig_count(std::size_t batch, std::size_t dim, ProjectionPolicy policy)
{
   const std::size_t full = std::min(batch, dim);
   switch (policy) {
   case ProjectionPolicy::random_sphere:
      return 0;
   case ProjectionPolicy::random_plus_top_eig:
      return full;
   case ProjectionPolicy::random_plus_bottom_eig:
      return std::max<std::size_t>(1, full / 2);
   }
   return 0;
}

ProjectionSet make_projections(ProjectionPolicy policy, std::size_t n, const SampleMatrix& z, Rng& rng,
                               std::optional<std::size_t> k)
{
   const auto d = static_cast<std::size_t>(z.cols());
   if (policy == ProjectionPolicy::random_sphere) {
      return sample_sphere_projections(n, d, rng);
   }
   const std::size_t wanted =
      std::min(n, k.value_or(default_eig_count(static_cast<std::size_t>(z.rows()), d, policy)));
   const auto side =
      policy == ProjectionPolicy::random_plus_top_eig ? EigenSide::top : EigenSide::bottom;
   ProjectionSet eig = eig_projections(z, wanted, side);
   if (wanted == n) {
      return eig;
   }
   ProjectionSet rest = sample_sphere_projections(n - wanted, d, rng);
   ProjectionSet out;
   out.policy = policy;
   out.directions.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
   out.directions << eig.directions, rest.directions;
   return out;
}

double sliced_w2_1d(const Eigen::Ref<const Eigen::VectorXd>& zproj,
                    const Eigen::Ref<const Eigen::VectorXd>& yproj)
{
   if (zproj.size() != yproj.size()) {
      throw ShapeMismatch("sliced_w2_1d: lengths differ");
   }
   if (zproj.size() < 1) {
      throw DegenerateInput("sliced_w2_1d: empty input");
   }
   std::vector<double> a(zproj.data(), zproj.data() + zproj.size());
   std::vector<double> b(yproj.data(), yproj.data() + yproj.size());
   std::sort(a.begin(), a.end());
   std::sort(b.begin(), b.end());
   double sum = 0.0;
   for (std::size_t i = 0; i < a.size(); ++i) {
      const double diff = a[i] - b[i];
      sum += diff * diff;
   }
   return sum / static_cast<double>(a.size());
}

namespace {

void check_projection_shapes(const SampleMatrix& z, const SampleMatrix& y, const ProjectionSet& proj)
{
   if (z.rows() != y.rows() || z.cols() != y.cols()) {
      throw ShapeMismatch("sliced_w2: z and target sample shapes differ");
   }
   if (proj.dim() != z.cols()) {
      throw ShapeMismatch("sliced_w2: projection dimension differs from feature dimension");
   }
   if (proj.count() < 1) {
      throw DomainError("sliced_w2: empty projection set");
   }
}

} // namespace

namespace {

// Projects m onto every direction and sorts each projected column ascending.
Eigen::MatrixXd sorted_projections(const SampleMatrix& m, const ProjectionSet& proj)
{
   Eigen::MatrixXd out = m * proj.directions.transpose();
   const Eigen::Index rows = out.rows();
   parallel_for(static_cast<std::size_t>(out.cols()), [&](std::size_t begin, std::size_t end) {
      detail::RadixOrder sorter;
      std::vector<double> tmp(static_cast<std::size_t>(rows));
      for (std::size_t c = begin; c < end; ++c) {
         double* col = out.col(static_cast<Eigen::Index>(c)).data();
         sorter.sort(col, static_cast<std::size_t>(rows));
         const auto& order = sorter.order();
         for (std::size_t r = 0; r < tmp.size(); ++r) {
            tmp[r] = col[order[r]];
         }
         std::copy(tmp.begin(), tmp.end(), col);
      }
   });
   return out;
}

// Mean over directions of the sorted-coupling cost between z and a target
// whose sorted projections are already known.
double sliced_w2_against_sorted(const SampleMatrix& z, const Eigen::MatrixXd& y_sorted,
                                const ProjectionSet& proj, SampleMatrix* grad)
{
   const Eigen::Index batch = z.rows();
   const Eigen::Index n_proj = proj.count();
   const double scale = 1.0 / static_cast<double>(batch * n_proj);

   if (grad == nullptr) {
      const Eigen::MatrixXd z_sorted = sorted_projections(z, proj);
      std::vector<double> per_projection(static_cast<std::size_t>(n_proj));
      for (Eigen::Index c = 0; c < n_proj; ++c) {
         per_projection[static_cast<std::size_t>(c)] = (z_sorted.col(c) - y_sorted.col(c)).squaredNorm();
      }
      return scale * std::accumulate(per_projection.begin(), per_projection.end(), 0.0);
   }

   const Eigen::MatrixXd zp = z * proj.directions.transpose();
   // residual(i, c) = zp(i, c) minus the target order statistic at i's rank
   Eigen::MatrixXd residual(batch, n_proj);
   std::vector<double> per_projection(static_cast<std::size_t>(n_proj));
   parallel_for(static_cast<std::size_t>(n_proj), [&](std::size_t begin, std::size_t end) {
      detail::RadixOrder sorter;
      for (std::size_t c = begin; c < end; ++c) {
         const auto col = static_cast<Eigen::Index>(c);
         // stable order, so tied rows keep their index order
         sorter.sort(zp.col(col).data(), static_cast<std::size_t>(batch));
         const auto& order = sorter.order();
         double sum = 0.0;
         for (Eigen::Index r = 0; r < batch; ++r) {
            const Eigen::Index i = order[static_cast<std::size_t>(r)];
            const double diff = zp(i, col) - y_sorted(r, col);
            sum += diff * diff;
            residual(i, col) = diff;
         }
         per_projection[c] = sum;
      }
   });
   *grad = (2.0 * scale) * residual * proj.directions;
   return scale * std::accumulate(per_projection.begin(), per_projection.end(), 0.0);
}

} // namespace

double sliced_w2(const SampleMatrix& z, const SampleMatrix& y, const ProjectionSet& proj, SampleMatrix* grad)
{
   check_projection_shapes(z, y, proj);
   return sliced_w2_against_sorted(z, sorted_projections(y, proj), proj, grad);
}

namespace {

void check_views(const SampleMatrix& z, const SampleMatrix& zprime)
{
   if (z.rows() != zprime.rows() || z.cols() != zprime.cols()) {
      throw ShapeMismatch("rdmreg_loss: the two views have different shapes");
   }
   require_valid(z, "rdmreg_loss (view 1)");
   require_valid(zprime, "rdmreg_loss (view 2)");
}

double invariance_term(const SampleMatrix& z, const SampleMatrix& zprime)
{
   return (z - zprime).squaredNorm() / static_cast<double>(z.rows());
}

} // namespace

LossBreakdown rdmreg_loss(const SampleMatrix& z, const SampleMatrix& zprime, const SampleMatrix& y,
                          const ProjectionSet& proj, double lambda_sim, double lambda_dist)
{
   check_views(z, zprime);
   LossBreakdown out;
   out.invariance = invariance_term(z, zprime);
   check_projection_shapes(z, y, proj);
   const Eigen::MatrixXd y_sorted = sorted_projections(y, proj);
   out.rdmreg_view1 = sliced_w2_against_sorted(z, y_sorted, proj, nullptr);
   out.rdmreg_view2 = sliced_w2_against_sorted(zprime, y_sorted, proj, nullptr);
   out.total = lambda_sim * out.invariance + lambda_dist * (out.rdmreg_view1 + out.rdmreg_view2);
   return out;
}

LossBreakdown rdmreg_loss(const SampleMatrix& z, const SampleMatrix& zprime, const RGGParams& target,
                          const ProjectionSet& proj, double lambda_sim, double lambda_dist,
                          std::uint64_t seed)
{
   check_views(z, zprime);
   Rng rng(seed);
   const SampleMatrix y = sample_rgn(target, static_cast<std::size_t>(z.rows()),
                                     static_cast<std::size_t>(z.cols()), rng);
   return rdmreg_loss(z, zprime, y, proj, lambda_sim, lambda_dist);
}

LossWithGradient rdmreg_loss_with_gradient(const SampleMatrix& z, const SampleMatrix& zprime,
                                           const SampleMatrix& y, const ProjectionSet& proj,
                                           double lambda_sim, double lambda_dist)
{
   check_views(z, zprime);
   LossWithGradient out;
   SampleMatrix g1;
   SampleMatrix g2;
   out.loss.invariance = invariance_term(z, zprime);
   check_projection_shapes(z, y, proj);
   const Eigen::MatrixXd y_sorted = sorted_projections(y, proj);
   out.loss.rdmreg_view1 = sliced_w2_against_sorted(z, y_sorted, proj, &g1);
   out.loss.rdmreg_view2 = sliced_w2_against_sorted(zprime, y_sorted, proj, &g2);
   out.loss.total = lambda_sim * out.loss.invariance
      + lambda_dist * (out.loss.rdmreg_view1 + out.loss.rdmreg_view2);

   const SampleMatrix d_inv = (2.0 / static_cast<double>(z.rows())) * (z - zprime);
   out.d_z = lambda_sim * d_inv + lambda_dist * g1;
   out.d_zprime = -lambda_sim * d_inv + lambda_dist * g2;
   return out;
}

double sliced_stat_profile(const SampleMatrix& z, const RGGParams& target, std::size_t n_proj,
                           std::uint64_t seed)
{
   require_valid(z, "sliced_stat_profile");
   Rng rng(seed);
   // target first, so a seed fixes Y whatever the projection count
   const SampleMatrix y = sample_rgn(target, static_cast<std::size_t>(z.rows()),
                                     static_cast<std::size_t>(z.cols()), rng);
   const ProjectionSet proj = sample_sphere_projections(n_proj, static_cast<std::size_t>(z.cols()), rng);
   return sliced_w2(z, y, proj);
}

} // namespace rgg
