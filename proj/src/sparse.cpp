#include "ipdg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ipdg {

SparseComplexMatrix::SparseComplexMatrix(
    std::size_t rows, std::size_t cols,
    const std::vector<std::vector<int>> &row_columns)
    : rows_(rows), cols_(cols) {
  if (row_columns.size() != rows)
    throw DimensionMismatch("sparsity pattern rows mismatch");
  row_ptr_.resize(rows + 1, 0);
  for (std::size_t i = 0; i < rows; ++i)
    row_ptr_[i + 1] = row_ptr_[i] + row_columns[i].size();
  col_idx_.reserve(row_ptr_[rows]);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::is_sorted(row_columns[i].begin(), row_columns[i].end()))
      throw InvalidParameter("sparsity pattern: row columns must be sorted");
    col_idx_.insert(col_idx_.end(), row_columns[i].begin(),
                    row_columns[i].end());
  }
  values_.assign(col_idx_.size(), Complex(0, 0));
}

void SparseComplexMatrix::add(std::size_t i, std::size_t j, Complex v) {
  auto begin = col_idx_.begin() + row_ptr_[i];
  auto end = col_idx_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(begin, end, static_cast<int>(j));
  if (it == end || *it != static_cast<int>(j))
    throw DimensionMismatch("add: entry outside the sparsity pattern");
  values_[it - col_idx_.begin()] += v;
}

Complex SparseComplexMatrix::coeff(std::size_t i, std::size_t j) const {
  auto begin = col_idx_.begin() + row_ptr_[i];
  auto end = col_idx_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(begin, end, static_cast<int>(j));
  if (it == end || *it != static_cast<int>(j))
    return Complex(0, 0);
  return values_[it - col_idx_.begin()];
}

std::vector<Complex> SparseComplexMatrix::multiply(
    std::span<const Complex> x) const {
  if (x.size() != cols_)
    throw DimensionMismatch("multiply: vector length mismatch");
  std::vector<Complex> y(rows_, Complex(0, 0));
  for (std::size_t i = 0; i < rows_; ++i) {
    Complex acc(0, 0);
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      acc += values_[p] * x[col_idx_[p]];
    y[i] = acc;
  }
  return y;
}

double SparseComplexMatrix::max_entry_difference(const SparseComplexMatrix &a,
                                                 const SparseComplexMatrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("max_entry_difference: shape mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t p = a.row_ptr_[i]; p < a.row_ptr_[i + 1]; ++p)
      worst = std::max(worst,
                       std::abs(a.values_[p] - b.coeff(i, a.col_idx_[p])));
    for (std::size_t p = b.row_ptr_[i]; p < b.row_ptr_[i + 1]; ++p)
      worst = std::max(worst,
                       std::abs(b.values_[p] - a.coeff(i, b.col_idx_[p])));
  }
  return worst;
}

Complex quadratic_form(const SparseComplexMatrix &a, std::span<const Complex> u,
                       std::span<const Complex> v) {
  if (u.size() != a.cols() || v.size() != a.rows())
    throw DimensionMismatch("quadratic_form: vector length mismatch");
  std::vector<Complex> au = a.multiply(u);
  Complex acc(0, 0);
  for (std::size_t i = 0; i < au.size(); ++i)
    acc += std::conj(v[i]) * au[i];
  return acc;
}

double vector_norm(std::span<const Complex> x) {
  double acc = 0.0;
  for (const Complex &c : x)
    acc += std::norm(c);
  return std::sqrt(acc);
}

void write_matrix_market(const SparseComplexMatrix &a,
                         const std::string &path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open for writing: " + path);
  out << "%%MatrixMarket matrix coordinate complex general\n";
  out << a.rows() << " " << a.cols() << " " << a.nnz() << "\n";
  char buf[128];
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) {
      std::snprintf(buf, sizeof(buf), "%zu %d %.17g %.17g\n", i + 1,
                    a.col_idx()[p] + 1, a.values()[p].real(),
                    a.values()[p].imag());
      out << buf;
    }
  if (!out)
    throw IoError("write failed: " + path);
}

SparseComplexMatrix read_matrix_market(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw IoError("empty MatrixMarket file: " + path);
  if (line.find("%%MatrixMarket") != 0 ||
      line.find("coordinate") == std::string::npos ||
      line.find("complex") == std::string::npos)
    throw IoError("unsupported MatrixMarket header in " + path);
  do {
    if (!std::getline(in, line))
      throw IoError("truncated MatrixMarket file: " + path);
  } while (!line.empty() && line[0] == '%');
  std::istringstream head(line);
  std::size_t rows = 0, cols = 0, nnz = 0;
  head >> rows >> cols >> nnz;
  if (!head)
    throw IoError("bad MatrixMarket size line in " + path);

  std::vector<std::map<int, Complex>> by_row(rows);
  for (std::size_t e = 0; e < nnz; ++e) {
    std::size_t i = 0, j = 0;
    double re = 0, im = 0;
    in >> i >> j >> re >> im;
    if (!in)
      throw IoError("truncated MatrixMarket entries in " + path);
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw IoError("MatrixMarket index out of range in " + path);
    by_row[i - 1][static_cast<int>(j - 1)] += Complex(re, im);
  }
  std::vector<std::vector<int>> pattern(rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (const auto &kv : by_row[i])
      pattern[i].push_back(kv.first);
  SparseComplexMatrix a(rows, cols, pattern);
  for (std::size_t i = 0; i < rows; ++i)
    for (const auto &kv : by_row[i])
      a.add(i, kv.first, kv.second);
  return a;
}

} // namespace ipdg
