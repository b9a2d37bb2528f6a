#include "rgg/sample_matrix.hpp"

#include "rgg/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace rgg {

void require_valid(const SampleMatrix& m, const char* what)
{
   if (m.rows() < 1 || m.cols() < 1) {
      throw DegenerateInput(std::string(what) + ": matrix must have at least one row and column");
   }
   if (!m.allFinite()) {
      throw DegenerateInput(std::string(what) + ": matrix has non-finite entries");
   }
}

Eigen::MatrixXd empirical_covariance(const SampleMatrix& m)
{
   if (m.rows() < 2) {
      throw DegenerateInput("covariance needs at least two rows");
   }
   const Eigen::RowVectorXd mean = m.colwise().mean();
   const Eigen::MatrixXd centered = m.rowwise() - mean;
   return (centered.transpose() * centered) / static_cast<double>(m.rows() - 1);
}

void write_csv(std::ostream& out, const SampleMatrix& m)
{
   for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j == 0 ? "" : ",") << "dim_" << j;
   }
   out << '\n';
   char buf[32];
   for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
         std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
         out << (j == 0 ? "" : ",") << buf;
      }
      out << '\n';
   }
}

void write_csv(const std::string& path, const SampleMatrix& m)
{
   std::ofstream out(path);
   if (!out) {
      throw std::runtime_error("cannot open '" + path + "' for writing");
   }
   write_csv(out, m);
   if (!out) {
      throw std::runtime_error("write to '" + path + "' failed");
   }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
   std::vector<std::string_view> fields;
   std::size_t start = 0;
   while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) {
         break;
      }
      start = comma + 1;
   }
   return fields;
}

std::string_view trim(std::string_view s)
{
   while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
      s.remove_prefix(1);
   }
   while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
      s.remove_suffix(1);
   }
   return s;
}

} // namespace

SampleMatrix read_csv(std::istream& in)
{
   std::string line;
   std::size_t line_no = 0;
   std::size_t cols = 0;
   while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) {
         cols = split_fields(line).size();
         break;
      }
   }
   if (cols == 0) {
      throw ParseError("CSV is empty", line_no);
   }

   std::vector<double> values;
   std::size_t rows = 0;
   while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) {
         continue;
      }
      const auto fields = split_fields(line);
      if (fields.size() != cols) {
         throw ParseError("expected " + std::to_string(cols) + " fields, found "
                             + std::to_string(fields.size()) + " on line "
                             + std::to_string(line_no),
                          line_no);
      }
      for (const auto raw : fields) {
         const auto field = trim(raw);
         double v = 0.0;
         const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
         if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
            throw ParseError("invalid number '" + std::string(field) + "' on line "
                                + std::to_string(line_no),
                             line_no);
         }
         values.push_back(v);
      }
      ++rows;
   }
   if (rows == 0) {
      throw ParseError("CSV has a header but no data rows", line_no);
   }

   SampleMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
   for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
         m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
      }
   }
   return m;
}

SampleMatrix read_csv(const std::string& path)
{
   std::ifstream in(path);
   if (!in) {
      throw std::runtime_error("cannot open '" + path + "' for reading");
   }
   return read_csv(in);
}

} // namespace rgg
