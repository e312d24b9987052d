#pragma once

#include <span>
#include <string>
#include <vector>

#include "ipdg/common.hpp"

namespace ipdg {

/// Compressed-row complex matrix with a fixed sparsity pattern (column
/// indices sorted per row). Entries are accumulated into the pattern with
/// add(); the pattern itself is structurally symmetric when built from the
/// DG mesh adjacency.
class SparseComplexMatrix {
public:
  SparseComplexMatrix() = default;

  /// Builds the pattern from per-row sorted column lists.
  SparseComplexMatrix(std::size_t rows, std::size_t cols,
                      const std::vector<std::vector<int>> &row_columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  /// Accumulates into an existing pattern entry; throws DimensionMismatch if
  /// (i,j) is not in the pattern.
  void add(std::size_t i, std::size_t j, Complex v);

  /// Entry value, zero if outside the pattern.
  Complex coeff(std::size_t i, std::size_t j) const;

  std::vector<Complex> multiply(std::span<const Complex> x) const;

  const std::vector<std::size_t> &row_ptr() const { return row_ptr_; }
  const std::vector<int> &col_idx() const { return col_idx_; }
  const std::vector<Complex> &values() const { return values_; }
  std::vector<Complex> &values() { return values_; }

  /// Max |A_ij - B_ij| over the union of patterns.
  static double max_entry_difference(const SparseComplexMatrix &a,
                                     const SparseComplexMatrix &b);

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<Complex> values_;
};

/// a_h(u,v) through the assembled matrix: sum_ij conj(v_i) A_ij u_j.
Complex quadratic_form(const SparseComplexMatrix &a, std::span<const Complex> u,
                       std::span<const Complex> v);

double vector_norm(std::span<const Complex> x);

/// MatrixMarket coordinate format, complex general, 1-based indices, values
/// printed with 17 significant digits (bit-exact round-trip).
void write_matrix_market(const SparseComplexMatrix &a, const std::string &path);
SparseComplexMatrix read_matrix_market(const std::string &path);

} // namespace ipdg
