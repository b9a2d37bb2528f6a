#include "rgg/diagnostics.hpp"

#include "rgg/errors.hpp"

#include <cmath>

namespace rgg {

SparsityReport sparsity_metrics(const SampleMatrix& z, double zero_threshold)
{
   require_valid(z, "sparsity_metrics");
   const auto d = static_cast<double>(z.cols());
   SparsityReport out;
   std::size_t nonzero = 0;
   double ratio_sum = 0.0;
   for (Eigen::Index i = 0; i < z.rows(); ++i) {
      double l1 = 0.0;
      double l2sq = 0.0;
      std::size_t count = 0;
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
         const double a = std::abs(z(i, j));
         if (a > zero_threshold) {
            ++count;
            l1 += a;
            l2sq += a * a;
         }
      }
      nonzero += count;
      if (count == 0) {
         ++out.all_zero_rows;
      } else {
         ratio_sum += l1 * l1 / l2sq;
      }
   }
   const auto rows = static_cast<double>(z.rows());
   out.m_l0 = static_cast<double>(nonzero) / (rows * d);
   out.zero_fraction = 1.0 - out.m_l0;
   if (out.all_zero_rows == 0) {
      out.m_l1 = ratio_sum / rows / d;
   }
   return out;
}

Eigen::VectorXd column_variances(const SampleMatrix& z)
{
   if (z.rows() < 2) {
      throw DegenerateInput("column_variances: need at least 2 rows");
   }
   const Eigen::RowVectorXd mean = z.colwise().mean();
   return (z.rowwise() - mean).array().square().colwise().sum().transpose() / static_cast<double>(z.rows() - 1);
}

VcregDiagnostics vcreg_diagnostics(const SampleMatrix& z, double target_var)
{
   require_valid(z, "vcreg_diagnostics");
   if (z.rows() < 2) {
      throw DegenerateInput("vcreg_diagnostics: need at least 2 rows");
   }
   const Eigen::MatrixXd cov = empirical_covariance(z);
   VcregDiagnostics out;
   out.variance_loss = (cov.diagonal().array() - target_var).matrix().norm();
   out.covariance_loss = (cov.sum() - cov.trace()) / static_cast<double>(z.cols());
   return out;
}

} // namespace rgg
