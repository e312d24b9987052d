#include "ipdg/dg_space.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "ipdg/quadrature.hpp"

namespace ipdg {

int dof_count(const CartesianMesh &mesh) {
  return kDofsPerElement * mesh.element_count();
}

CVec3 eval_field(const DGField &field, const CartesianMesh &mesh, int element,
                 const Vec3 &point) {
  const Vec3 local = (point - mesh.elements[element].center) / mesh.h;
  for (int c = 0; c < 3; ++c)
    if (std::abs(local[c]) > 0.5 + 1e-12)
      throw OutOfElement("eval_field: point outside element " +
                         std::to_string(element));
  double phi[kBasisPerComponent];
  basis_values(local, phi);
  CVec3 v;
  for (int c = 0; c < 3; ++c) {
    Complex acc(0, 0);
    for (int a = 0; a < kBasisPerComponent; ++a)
      acc += field.coeffs[dof_index(element, c, a)] * phi[a];
    v[c] = acc;
  }
  return v;
}

CVec3 eval_curl(const DGField &field, const CartesianMesh &mesh, int element) {
  const double inv_h = 1.0 / mesh.h;
  const auto c = [&](int comp, int a) {
    return field.coeffs[dof_index(element, comp, a)];
  };
  // curl v = (dy vz - dz vy, dz vx - dx vz, dx vy - dy vx); d/dx of the xi
  // monomial is 1/h, etc.
  CVec3 curl;
  curl[0] = (c(2, 2) - c(1, 3)) * inv_h;
  curl[1] = (c(0, 3) - c(2, 1)) * inv_h;
  curl[2] = (c(1, 1) - c(0, 2)) * inv_h;
  return curl;
}

ExactSolution plane_wave(double k) {
  ExactSolution e;
  e.wave_number = k;
  const Complex ik(0.0, k);
  e.value = [ik](const Vec3 &x) -> CVec3 {
    return CVec3(std::exp(ik * x[2]), std::exp(ik * x[0]), std::exp(ik * x[1]));
  };
  e.curl = [ik](const Vec3 &x) -> CVec3 {
    return ik * CVec3(std::exp(ik * x[1]), std::exp(ik * x[2]),
                      std::exp(ik * x[0]));
  };
  const double k2 = k * k;
  e.curl_curl = [ik, k2](const Vec3 &x) -> CVec3 {
    return k2 * CVec3(std::exp(ik * x[2]), std::exp(ik * x[0]),
                      std::exp(ik * x[1]));
  };
  return e;
}

ExactSolution constant_solution(const CVec3 &v) {
  ExactSolution e;
  e.value = [v](const Vec3 &) { return v; };
  e.curl = [](const Vec3 &) { return CVec3::Zero().eval(); };
  e.curl_curl = [](const Vec3 &) { return CVec3::Zero().eval(); };
  return e;
}

ExactSolution linear_solution() {
  ExactSolution e;
  e.value = [](const Vec3 &x) { return CVec3(x[2], x[0], x[1]); };
  e.curl = [](const Vec3 &) { return CVec3(1.0, 1.0, 1.0); };
  e.curl_curl = [](const Vec3 &) { return CVec3::Zero().eval(); };
  return e;
}

double curl_consistency_residual(const ExactSolution &exact, int n_points,
                                 unsigned long long seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  const double step = 1e-5;
  double worst = 0.0;
  for (int s = 0; s < n_points; ++s) {
    // Stay away from the boundary so central differences remain inside.
    Vec3 x(0.1 + 0.8 * uniform(), 0.1 + 0.8 * uniform(),
           0.1 + 0.8 * uniform());
    CVec3 fd;
    auto diff = [&](int comp, int dir) {
      Vec3 xp = x, xm = x;
      xp[dir] += step;
      xm[dir] -= step;
      return (exact.value(xp)[comp] - exact.value(xm)[comp]) / (2.0 * step);
    };
    fd[0] = diff(2, 1) - diff(1, 2);
    fd[1] = diff(0, 2) - diff(2, 0);
    fd[2] = diff(1, 0) - diff(0, 1);
    CVec3 an = exact.curl(x);
    double scale = std::max(an.norm(), 1.0);
    worst = std::max(worst, (fd - an).norm() / scale);
  }
  return worst;
}

DGField project_local(const ExactSolution &exact, const CartesianMesh &mesh,
                      int quad_order) {
  if (quad_order < 2)
    throw InvalidParameter("project_local: quad_order must be >= 2");
  const QuadRule &rule = gauss_rule(quad_order, 3);
  const double h = mesh.h;
  const double vol = h * h * h;
  DGField out = DGField::zero(mesh);
  // Local mass matrix is vol * diag(1, 1/12, 1/12, 1/12) in this basis; the
  // 4x4 system assembled by quadrature is solved per element and component.
  Eigen::Matrix4d mass = Eigen::Matrix4d::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    Vec3 local(rule.points[q][0], rule.points[q][1], rule.points[q][2]);
    double phi[kBasisPerComponent];
    basis_values(local, phi);
    for (int a = 0; a < kBasisPerComponent; ++a)
      for (int b = 0; b < kBasisPerComponent; ++b)
        mass(a, b) += rule.weights[q] * vol * phi[a] * phi[b];
  }
  Eigen::PartialPivLU<Eigen::Matrix4cd> lu(mass.cast<Complex>());

  const int ne = mesh.element_count();
  for (int e = 0; e < ne; ++e) {
    const Vec3 &center = mesh.elements[e].center;
    Eigen::Matrix<Complex, 4, 3> rhs = Eigen::Matrix<Complex, 4, 3>::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Vec3 local(rule.points[q][0], rule.points[q][1], rule.points[q][2]);
      Vec3 x = center + h * local;
      CVec3 val = exact.value(x);
      double phi[kBasisPerComponent];
      basis_values(local, phi);
      double w = rule.weights[q] * vol;
      for (int a = 0; a < kBasisPerComponent; ++a)
        for (int c = 0; c < 3; ++c)
          rhs(a, c) += w * phi[a] * val[c];
    }
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector4cd coeff = lu.solve(rhs.col(c).eval());
      for (int a = 0; a < kBasisPerComponent; ++a)
        out.coeffs[dof_index(e, c, a)] = coeff[a];
    }
  }
  return out;
}

} // namespace ipdg
