#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ipdg/common.hpp"
#include "ipdg/dg_space.hpp"
#include "ipdg/mesh.hpp"
#include "ipdg/sparse.hpp"

namespace ipdg {

/// Parameters of the IPDG discretization. The J1 penalty is parameterized by
/// igamma1 = the value of i*gamma1, so the assembled J1 coefficient is
/// -igamma1*h_F and the J0 coefficient is -i*gamma0/h_F. The penalty
/// parameters -i*gamma0 and -igamma1 must have non-positive imaginary part;
/// strict negativity is the analyzed regime, equality with |igamma1| > 0 is
/// an admissible boundary case (see igamma1_boundary_case).
struct ProblemParams {
  double k = 1.0;      // wave number
  double lambda = 1.0; // impedance constant
  double gamma0 = 100.0;
  Complex igamma1 = Complex(0.0, 0.1);
  int epsilon = 1; // symmetrization flag; only +1 is exercised
};

/// Throws InvalidParameter on violated invariants (k, lambda, gamma0 > 0;
/// Im(-igamma1) <= 0; epsilon in {-1,0,1}).
void validate_params(const ProblemParams &p);

/// True when Im(-igamma1) == 0 with |igamma1| > 0 (purely real -igamma1).
bool igamma1_boundary_case(const ProblemParams &p);

/// Real weight used for J1 inside the norms when igamma1 is complex.
inline double gamma1_norm_weight(const ProblemParams &p) {
  return std::abs(p.igamma1);
}

using SourceFn = std::function<CVec3(const Vec3 &)>;
/// Boundary data evaluated at (x, outward normal).
using BoundaryFn = std::function<CVec3(const Vec3 &, const Vec3 &)>;

/// Impedance data g = curl E x nu - i*lambda*E_T of an exact solution.
BoundaryFn impedance_boundary_data(const ExactSolution &exact, double lambda);

/// Sparsity pattern of the DG forms: element self-blocks plus face-neighbor
/// blocks. Shared by assemble_system and assemble_projection_system.
std::vector<std::vector<int>> dg_sparsity(const CartesianMesh &mesh);

/// Matrix of a_h (3.16a): curl-curl - flux terms - i*J0 - i*J1 - k^2*mass
/// - i*lambda*boundary tangential mass. Entries A[i][j] = a_h(phi_j, phi_i),
/// conjugation on the second (test) argument. form_quad_n = 2 is exact for
/// broken-linear integrands.
SparseComplexMatrix assemble_system(const CartesianMesh &mesh,
                                    const ProblemParams &params,
                                    int form_quad_n = 2);

/// Matrix of b_h + L2 mass (the elliptic-projection form (5.1)): no k^2 term,
/// no boundary impedance term.
SparseComplexMatrix assemble_projection_system(const CartesianMesh &mesh,
                                               const ProblemParams &params,
                                               int form_quad_n = 2);

/// Load vector (f,phi_i) + <g, phi_{i,T}>. g is projected onto the face plane
/// before pairing; tangency_defect (if given) receives max |g . nu| over the
/// boundary quadrature points, to be flagged above 1e-10.
std::vector<Complex> assemble_rhs(const CartesianMesh &mesh,
                                  const ProblemParams &params,
                                  const SourceFn &f, const BoundaryFn &g,
                                  int quad_n,
                                  double *tangency_defect = nullptr);

/// Right-hand side b_h(E, phi_i) + (E, phi_i) for the elliptic projection of
/// a smooth E: jumps of E vanish, so only the curl-curl, mass and
/// average-flux terms survive.
std::vector<Complex> assemble_projection_rhs(const CartesianMesh &mesh,
                                             const ExactSolution &exact,
                                             int quad_n);

/// max_i |a_h(E, phi_i) - (f, phi_i) - <g, phi_{i,T}>| / ||load||_inf with
/// f = curl curl E - k^2 E and g = curl E x nu - i lambda E_T derived from
/// the exact solution; a_h(E, .) is evaluated with the smooth-E reductions.
double consistency_residual(const CartesianMesh &mesh,
                            const ProblemParams &params,
                            const ExactSolution &exact, int quad_n);

} // namespace ipdg
