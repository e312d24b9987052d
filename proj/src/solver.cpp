#include "ipdg/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace ipdg {

namespace {

using SpMat = Eigen::SparseMatrix<Complex>;
using Clock = std::chrono::steady_clock;

SpMat to_eigen(const SparseComplexMatrix &A) {
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(A.nnz());
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t p = A.row_ptr()[i]; p < A.row_ptr()[i + 1]; ++p)
      trips.emplace_back(static_cast<int>(i), A.col_idx()[p], A.values()[p]);
  SpMat M(static_cast<Eigen::Index>(A.rows()),
          static_cast<Eigen::Index>(A.cols()));
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

int infer_m(std::size_t n) {
  int m = static_cast<int>(std::llround(std::cbrt(double(n) / 12.0)));
  while (static_cast<std::size_t>(m) * m * m * 12 < n)
    ++m;
  while (m > 1 && static_cast<std::size_t>(m) * m * m * 12 > n)
    --m;
  return m;
}

DGField make_field(std::size_t n, std::vector<Complex> coeffs) {
  DGField f;
  f.m = infer_m(n);
  f.coeffs = std::move(coeffs);
  return f;
}

double relative_residual(const SparseComplexMatrix &A,
                         std::span<const Complex> x,
                         std::span<const Complex> b, double bnorm) {
  std::vector<Complex> r = A.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = b[i] - r[i];
  return vector_norm(r) / bnorm;
}

// ILU(0): incomplete LU on the existing sparsity pattern, stored in-place in
// a copy of the CSR values. L has unit diagonal.
struct Ilu0 {
  explicit Ilu0(const SparseComplexMatrix &A)
      : row_ptr(A.row_ptr()), col_idx(A.col_idx()), values(A.values()),
        n(A.rows()) {
    diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = SIZE_MAX;
      for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
        if (col_idx[p] == static_cast<int>(i))
          diag[i] = p;
      if (diag[i] == SIZE_MAX)
        throw SingularSystem("ilu0: missing diagonal entry");
    }
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t p = row_ptr[i];
           p < row_ptr[i + 1] && col_idx[p] < static_cast<int>(i); ++p) {
        const std::size_t kcol = col_idx[p];
        if (values[diag[kcol]] == Complex(0, 0))
          throw SingularSystem("ilu0: zero pivot");
        Complex factor = values[p] / values[diag[kcol]];
        values[p] = factor;
        // Subtract factor * row k restricted to the pattern of row i.
        std::size_t pi = p + 1;
        for (std::size_t pk = diag[kcol] + 1; pk < row_ptr[kcol + 1]; ++pk) {
          while (pi < row_ptr[i + 1] && col_idx[pi] < col_idx[pk])
            ++pi;
          if (pi < row_ptr[i + 1] && col_idx[pi] == col_idx[pk])
            values[pi] -= factor * values[pk];
        }
      }
    }
  }

  std::vector<Complex> apply(std::span<const Complex> r) const {
    std::vector<Complex> y(r.begin(), r.end());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = row_ptr[i];
           p < row_ptr[i + 1] && col_idx[p] < static_cast<int>(i); ++p)
        y[i] -= values[p] * y[col_idx[p]];
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t p = diag[ii] + 1; p < row_ptr[ii + 1]; ++p)
        y[ii] -= values[p] * y[col_idx[p]];
      y[ii] /= values[diag[ii]];
    }
    return y;
  }

  std::vector<std::size_t> row_ptr;
  std::vector<int> col_idx;
  std::vector<Complex> values;
  std::vector<std::size_t> diag;
  std::size_t n;
};

// Block Jacobi with the natural 12x12 element blocks of the DG layout.
struct BlockJacobi12 {
  explicit BlockJacobi12(const SparseComplexMatrix &A) : n(A.rows()) {
    if (n % 12 != 0)
      throw DimensionMismatch("blockjacobi12: dimension not divisible by 12");
    const std::size_t nb = n / 12;
    inv.reserve(nb);
    for (std::size_t bidx = 0; bidx < nb; ++bidx) {
      Eigen::Matrix<Complex, 12, 12> blk;
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
          blk(i, j) = A.coeff(12 * bidx + i, 12 * bidx + j);
      inv.emplace_back(blk);
    }
  }

  std::vector<Complex> apply(std::span<const Complex> r) const {
    std::vector<Complex> y(r.size());
    Eigen::Matrix<Complex, 12, 1> seg;
    for (std::size_t bidx = 0; bidx < n / 12; ++bidx) {
      for (int i = 0; i < 12; ++i)
        seg[i] = r[12 * bidx + i];
      Eigen::Matrix<Complex, 12, 1> sol = inv[bidx].solve(seg);
      for (int i = 0; i < 12; ++i)
        y[12 * bidx + i] = sol[i];
    }
    return y;
  }

  std::vector<Eigen::PartialPivLU<Eigen::Matrix<Complex, 12, 12>>> inv;
  std::size_t n;
};

} // namespace

SolveReport solve_direct(const SparseComplexMatrix &A,
                         std::span<const Complex> b, double tol) {
  if (A.rows() != A.cols() || b.size() != A.rows())
    throw DimensionMismatch("solve_direct: shape mismatch");
  const auto t0 = Clock::now();
  const double bnorm = vector_norm(b);
  SolveReport rep;
  rep.method = SolveMethod::Direct;
  if (bnorm == 0.0) {
    rep.solution = make_field(A.rows(),
                              std::vector<Complex>(A.rows(), Complex(0, 0)));
    rep.relative_residual = 0.0;
    rep.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
    return rep;
  }

  SpMat M = to_eigen(A);
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(M);
  lu.factorize(M);
  if (lu.info() != Eigen::Success)
    throw SingularSystem("solve_direct: factorization failed (" +
                         lu.lastErrorMessage() + ")");

  Eigen::VectorXcd rhs(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    rhs[static_cast<Eigen::Index>(i)] = b[i];
  Eigen::VectorXcd x = lu.solve(rhs);
  std::vector<Complex> xv(x.data(), x.data() + x.size());
  double res = relative_residual(A, xv, b, bnorm);
  if (res > tol) {
    // One step of iterative refinement.
    std::vector<Complex> ax = A.multiply(xv);
    Eigen::VectorXcd r(b.size());
    for (std::size_t i = 0; i < b.size(); ++i)
      r[static_cast<Eigen::Index>(i)] = b[i] - ax[i];
    Eigen::VectorXcd dx = lu.solve(r);
    for (std::size_t i = 0; i < xv.size(); ++i)
      xv[i] += dx[static_cast<Eigen::Index>(i)];
    res = relative_residual(A, xv, b, bnorm);
  }
  if (res > tol)
    throw ConvergenceFailure(
        "solve_direct: residual above tolerance after refinement", res, 0,
        std::move(xv));

  rep.solution = make_field(A.rows(), std::move(xv));
  rep.relative_residual = res;
  rep.factor_nnz =
      static_cast<std::size_t>(lu.nnzL() + lu.nnzU());
  rep.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

SolveReport solve_gmres(const SparseComplexMatrix &A,
                        std::span<const Complex> b, double tol, int restart,
                        int maxit, Preconditioner precond) {
  if (A.rows() != A.cols() || b.size() != A.rows())
    throw DimensionMismatch("solve_gmres: shape mismatch");
  if (restart < 1 || maxit < 1)
    throw InvalidParameter("solve_gmres: restart and maxit must be >= 1");
  const auto t0 = Clock::now();
  const std::size_t n = A.rows();
  const double bnorm = vector_norm(b);
  SolveReport rep;
  rep.method = SolveMethod::Iterative;
  if (bnorm == 0.0) {
    rep.solution = make_field(n, std::vector<Complex>(n, Complex(0, 0)));
    rep.relative_residual = 0.0;
    rep.iterations = 0;
    rep.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
    return rep;
  }

  std::unique_ptr<Ilu0> ilu;
  std::unique_ptr<BlockJacobi12> bj;
  if (precond == Preconditioner::Ilu0)
    ilu = std::make_unique<Ilu0>(A);
  else if (precond == Preconditioner::BlockJacobi12)
    bj = std::make_unique<BlockJacobi12>(A);
  auto apply_precond = [&](std::span<const Complex> r) {
    if (ilu)
      return ilu->apply(r);
    if (bj)
      return bj->apply(r);
    return std::vector<Complex>(r.begin(), r.end());
  };

  std::vector<Complex> x(n, Complex(0, 0));
  std::vector<Complex> best = x;
  double best_res = 1.0; // residual of the zero iterate
  int total_it = 0;

  while (total_it < maxit) {
    // Arnoldi with modified Gram-Schmidt on A M^{-1}.
    std::vector<Complex> r = A.multiply(x);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = b[i] - r[i];
    double beta = vector_norm(r);
    if (beta / bnorm <= tol)
      break;
    const int mdim = std::min(restart, maxit - total_it);
    std::vector<std::vector<Complex>> V;
    V.reserve(mdim + 1);
    std::vector<Complex> v0 = r;
    for (Complex &c : v0)
      c /= beta;
    V.push_back(std::move(v0));
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(mdim + 1, mdim);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(mdim + 1);
    g[0] = beta;
    std::vector<Complex> cs(mdim), sn(mdim);
    int j = 0;
    for (; j < mdim; ++j) {
      std::vector<Complex> z = apply_precond(V[j]);
      std::vector<Complex> w = A.multiply(z);
      for (int i = 0; i <= j; ++i) {
        Complex hij(0, 0);
        for (std::size_t p = 0; p < n; ++p)
          hij += std::conj(V[i][p]) * w[p];
        H(i, j) = hij;
        for (std::size_t p = 0; p < n; ++p)
          w[p] -= hij * V[i][p];
      }
      double hn = vector_norm(w);
      H(j + 1, j) = hn;
      ++total_it;
      // Givens rotations to keep H upper triangular.
      for (int i = 0; i < j; ++i) {
        Complex t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -std::conj(sn[i]) * H(i, j) +
                      std::conj(cs[i]) * H(i + 1, j);
        H(i, j) = t;
      }
      double denom = std::sqrt(std::norm(H(j, j)) + hn * hn);
      if (denom == 0.0) {
        cs[j] = 1.0;
        sn[j] = 0.0;
      } else {
        cs[j] = std::conj(H(j, j)) / denom;
        sn[j] = hn / denom;
      }
      Complex t = cs[j] * H(j, j) + sn[j] * H(j + 1, j);
      H(j, j) = t;
      H(j + 1, j) = 0.0;
      Complex gj = g[j];
      g[j] = cs[j] * gj;
      g[j + 1] = -std::conj(sn[j]) * gj;
      double rel = std::abs(g[j + 1]) / bnorm;
      if (hn == 0.0 || rel <= 0.5 * tol || j == mdim - 1 ||
          total_it >= maxit) {
        ++j;
        break;
      }
      std::vector<Complex> vnext = std::move(w);
      for (Complex &c : vnext)
        c /= hn;
      V.push_back(std::move(vnext));
    }
    // Solve the small triangular system and update x = x + M^{-1} V y.
    Eigen::VectorXcd y(j);
    for (int i = j - 1; i >= 0; --i) {
      Complex acc = g[i];
      for (int l = i + 1; l < j; ++l)
        acc -= H(i, l) * y[l];
      y[i] = acc / H(i, i);
    }
    std::vector<Complex> update(n, Complex(0, 0));
    for (int i = 0; i < j; ++i)
      for (std::size_t p = 0; p < n; ++p)
        update[p] += y[i] * V[i][p];
    std::vector<Complex> z = apply_precond(update);
    for (std::size_t p = 0; p < n; ++p)
      x[p] += z[p];
    double res = relative_residual(A, x, b, bnorm);
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (res <= tol)
      break;
  }

  double final_res = relative_residual(A, best, b, bnorm);
  rep.iterations = total_it;
  rep.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  if (final_res > tol)
    throw ConvergenceFailure("solve_gmres: no convergence after " +
                                 std::to_string(total_it) + " iterations",
                             final_res, total_it, std::move(best));
  rep.solution = make_field(n, std::move(best));
  rep.relative_residual = final_res;
  return rep;
}

} // namespace ipdg
