#pragma once

#include <functional>
#include <vector>

#include "ipdg/common.hpp"
#include "ipdg/mesh.hpp"

namespace ipdg {

/// Broken P1 vector space: per element, 3 components x 4 centered monomials
/// {1, xi, eta, zeta} with xi = (x - x_c)/h in [-1/2,1/2].
inline constexpr int kBasisPerComponent = 4;
inline constexpr int kDofsPerElement = 12;

/// Total degrees of freedom 12*m^3.
int dof_count(const CartesianMesh &mesh);

/// Global index g = 12e + 4c + a.
inline int dof_index(int element, int component, int basis) {
  return kDofsPerElement * element + kBasisPerComponent * component + basis;
}

/// Complex coefficient vector over the broken-P1 DOFs of a mesh with m
/// elements per axis. Plain value type; read-shareable.
struct DGField {
  int m = 0;
  std::vector<Complex> coeffs;

  static DGField zero(const CartesianMesh &mesh) {
    DGField f;
    f.m = mesh.m;
    f.coeffs.assign(static_cast<std::size_t>(dof_count(mesh)), Complex(0, 0));
    return f;
  }
};

/// Scalar basis values (1, xi, eta, zeta) at local coordinates.
inline void basis_values(const Vec3 &local, double out[kBasisPerComponent]) {
  out[0] = 1.0;
  out[1] = local[0];
  out[2] = local[1];
  out[3] = local[2];
}

/// Field value at a point inside the closed element (the element label
/// disambiguates face points). Throws OutOfElement beyond 1e-12 in local
/// coordinates.
CVec3 eval_field(const DGField &field, const CartesianMesh &mesh, int element,
                 const Vec3 &point);

/// Element-wise curl; constant per element for broken-linear fields (so the
/// discrete curl-curl vanishes element-wise).
CVec3 eval_curl(const DGField &field, const CartesianMesh &mesh, int element);

/// Smooth reference field with analytic curl (and curl curl, used to derive
/// the volume source of manufactured problems).
struct ExactSolution {
  std::function<CVec3(const Vec3 &)> value;
  std::function<CVec3(const Vec3 &)> curl;
  std::function<CVec3(const Vec3 &)> curl_curl;
  double wave_number = 0.0;
};

/// The benchmark plane-wave triple E = (e^{ikz}, e^{ikx}, e^{iky}) with
/// curl E = ik (e^{iky}, e^{ikz}, e^{ikx}) and curl curl E = k^2 E.
ExactSolution plane_wave(double k);

/// Constant field E = v, curl 0.
ExactSolution constant_solution(const CVec3 &v);

/// Linear field E = (z, x, y), curl (1,1,1), curl curl 0.
ExactSolution linear_solution();

/// Max relative mismatch between the supplied curl and central finite
/// differences of value at n random points (step 1e-5). Used to spot-check
/// ExactSolution consistency at tolerance 1e-6.
double curl_consistency_residual(const ExactSolution &exact, int n_points,
                                 unsigned long long seed);

/// Element-wise L2 projection onto the broken-P1 space: per element and
/// component solves the 4x4 local mass system (diagonal in this basis) with a
/// quadrature right-hand side. Exact for globally linear fields.
DGField project_local(const ExactSolution &exact, const CartesianMesh &mesh,
                      int quad_order);

} // namespace ipdg
