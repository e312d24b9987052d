#pragma once

#include "ipdg/assembly.hpp"
#include "ipdg/common.hpp"
#include "ipdg/dg_space.hpp"
#include "ipdg/mesh.hpp"
#include "ipdg/solver.hpp"

namespace ipdg {

/// Norm components of a broken vector field. j0/j1 hold the penalty
/// quadratic forms J0(v,v), J1(v,v) (with weights gamma0 and |igamma1|), so
/// dg^2 = curl_broken^2 + l2^2 + j0 + j1. `energy` is the triple norm that
/// adds the h_F/gamma0-weighted average flux term to dg; `eh` is the
/// coercivity norm with the gamma_h weight.
struct NormSet {
  double l2 = 0.0;
  double curl_broken = 0.0;
  double hcurl = 0.0;
  double j0 = 0.0;
  double j1 = 0.0;
  double boundary_tangential = 0.0;
  double dg = 0.0;
  double energy = 0.0;
  double eh = 0.0;
};

/// 1/(lambda h_min) + 1/(gamma1 k^2 h_min^2) + 1/gamma0 + 1 with gamma1 =
/// |igamma1|. Throws InvalidParameter when any of k, lambda, gamma0, gamma1
/// is zero.
double gamma_h(const ProblemParams &params, double h_min);

/// Norms of a discrete field (exact quadrature, n=2).
NormSet field_norms(const DGField &field, const CartesianMesh &mesh,
                    const ProblemParams &params);

/// Norms of a smooth exact solution (no jumps, so j0 = j1 = 0).
NormSet exact_norms(const ExactSolution &exact, const CartesianMesh &mesh,
                    const ProblemParams &params, int quad_n);

/// Norms of (exact - field).
NormSet error_norms_abs(const DGField &field, const ExactSolution &exact,
                        const CartesianMesh &mesh, const ProblemParams &params,
                        int quad_n);

struct ErrorReport {
  NormSet error;
  NormSet exact;
  double rel_l2 = 0.0;
  double rel_hcurl = 0.0;
  double rel_dg = 0.0;
  double rel_energy = 0.0;
  double rel_boundary = 0.0;
  bool zero_denominator = false; // absolute values returned instead
};

/// Absolute and relative errors of a discrete field against an exact
/// solution.
ErrorReport error_norms(const DGField &field, const ExactSolution &exact,
                        const CartesianMesh &mesh, const ProblemParams &params,
                        int quad_n);

struct CoercivityReport {
  int samples = 0;
  double min_ratio = 0.0;
  double median_ratio = 0.0;
  double gamma_h = 0.0;
  unsigned long long seed = 0;
};

/// Empirical Theorem-4.1 ratio rho(u) = gamma_h |a_h(u,u)| / ||u||_{E,h}^2
/// over seeded random fields with coefficients uniform on re,im in [-1,1]
/// (zero draws are resampled).
CoercivityReport coercivity_sample(const CartesianMesh &mesh,
                                   const ProblemParams &params, int n_samples,
                                   unsigned long long seed);

/// Discrete elliptic projection (5.1): solves (b_h + mass) against the smooth
/// right-hand side with the direct solver. Independent of k and lambda.
DGField elliptic_projection(const CartesianMesh &mesh,
                            const ProblemParams &params,
                            const ExactSolution &exact,
                            double solver_tol = 1e-10,
                            double *residual_out = nullptr);

/// ||field||_{H(curl,T_h)} / ||exact||_{H(curl,T_h)}; NaN when the
/// denominator vanishes (callers flag it).
double stability_ratio(const DGField &solution, const ExactSolution &exact,
                       const CartesianMesh &mesh, const ProblemParams &params,
                       int quad_n);

/// log(err_coarse/err_fine) / log(ratio); the observed convergence order for
/// a mesh refinement by `ratio` (2 on dyadic sequences).
double observed_order(double err_coarse, double err_fine, double ratio = 2.0);

} // namespace ipdg
