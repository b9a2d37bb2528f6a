#ifndef RGG_SAMPLE_MATRIX_HPP
#define RGG_SAMPLE_MATRIX_HPP

#include <Eigen/Core>

#include <iosfwd>
#include <string>

namespace rgg {

/// B x D table of samples, one row per sample.
using SampleMatrix = Eigen::MatrixXd;

/// Throws DegenerateInput on an empty matrix or a non-finite entry.
void require_valid(const SampleMatrix& m, const char* what);

/// Column-centered covariance with divisor B - 1. Requires B >= 2.
Eigen::MatrixXd empirical_covariance(const SampleMatrix& m);

/// CSV with header dim_0,...,dim_{D-1} and 17 significant digits per value.
void write_csv(std::ostream& out, const SampleMatrix& m);
void write_csv(const std::string& path, const SampleMatrix& m);

/// Parses the CSV written by write_csv. A header row is required; values must
/// be finite numbers with the same count on every row. Errors carry the
/// 1-based line number.
SampleMatrix read_csv(std::istream& in);
SampleMatrix read_csv(const std::string& path);

} // namespace rgg

#endif
