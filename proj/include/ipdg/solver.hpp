#pragma once

#include <span>
#include <vector>

#include "ipdg/common.hpp"
#include "ipdg/dg_space.hpp"
#include "ipdg/sparse.hpp"

namespace ipdg {

enum class SolveMethod { Direct, Iterative };
enum class Preconditioner { None, Ilu0, BlockJacobi12 };

struct SolveReport {
  DGField solution; // m inferred from the DOF layout (12 m^3)
  double relative_residual = 0.0; // recomputed ||Ax-b||/||b||, never taken
                                  // from solver internals
  SolveMethod method = SolveMethod::Direct;
  int iterations = 0; // 0 for direct
  std::size_t factor_nnz = 0;
  double wall_time = 0.0;
};

/// Sparse LU (fill-reducing ordering, partial pivoting) in complex
/// arithmetic, with one step of iterative refinement if the first residual
/// misses tol. Throws SingularSystem on factorization failure and
/// ConvergenceFailure if the refined residual still exceeds tol.
SolveReport solve_direct(const SparseComplexMatrix &A,
                         std::span<const Complex> b, double tol = 1e-10);

/// Restarted GMRES, right-preconditioned. Returns when the recomputed
/// relative residual of the best iterate is <= tol; otherwise throws
/// ConvergenceFailure carrying the achieved residual and best iterate.
SolveReport solve_gmres(const SparseComplexMatrix &A,
                        std::span<const Complex> b, double tol, int restart,
                        int maxit,
                        Preconditioner precond = Preconditioner::None);

} // namespace ipdg
