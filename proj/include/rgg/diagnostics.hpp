#ifndef RGG_DIAGNOSTICS_HPP
#define RGG_DIAGNOSTICS_HPP

#include "rgg/sample_matrix.hpp"

#include <cstddef>
#include <optional>

namespace rgg {

struct SparsityReport {
   /// mean over rows of ||x||_1^2 / ||x||_2^2, divided by D; empty when some
   /// row is entirely zero
   std::optional<double> m_l1;
   /// mean nonzero count per row, divided by D
   double m_l0 = 0.0;
   /// fraction of zero entries, 1 - m_l0
   double zero_fraction = 0.0;
   std::size_t all_zero_rows = 0;
};

/// Entries with |x| <= zero_threshold count as zeros.
SparsityReport sparsity_metrics(const SampleMatrix& z, double zero_threshold = 0.0);

struct VcregDiagnostics {
   /// || diag(Cov) - target_var ||_2
   double variance_loss = 0.0;
   /// sum of off-diagonal covariance entries (signed) divided by D
   double covariance_loss = 0.0;
};

/// Covariance is column-centered with divisor B - 1; requires B >= 2.
VcregDiagnostics vcreg_diagnostics(const SampleMatrix& z, double target_var);

/// Per-column sample variances (divisor B - 1).
Eigen::VectorXd column_variances(const SampleMatrix& z);

} // namespace rgg

#endif
