#include "ipdg/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "ipdg/quadrature.hpp"

namespace ipdg {

namespace {

constexpr int kB = kDofsPerElement; // 12

inline Complex dot_bilinear(const CVec3 &a, const CVec3 &b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline CVec3 cross_cr(const CVec3 &a, const Vec3 &b) {
  return CVec3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
               a[0] * b[1] - a[1] * b[0]);
}

inline CVec3 tangential(const CVec3 &v, const Vec3 &nu) {
  return v - dot_bilinear(v, nu.cast<Complex>()) * nu.cast<Complex>();
}

inline Vec3 tangential(const Vec3 &v, const Vec3 &nu) {
  return v - v.dot(nu) * nu;
}

// curl(phi_a e_c) is constant: grad phi_a x e_c with grad of the centered
// monomials = e_{a-1}/h (zero for a = 0).
Vec3 basis_curl(int c, int a, double h) {
  if (a == 0)
    return Vec3::Zero();
  Vec3 grad = Vec3::Zero();
  grad[a - 1] = 1.0 / h;
  Vec3 ec = Vec3::Zero();
  ec[c] = 1.0;
  return grad.cross(ec);
}

using Block12 = Eigen::Matrix<Complex, kB, kB>;
using Block24 = Eigen::Matrix<Complex, 2 * kB, 2 * kB>;

// Volume block: sum_q w h^3 (curl phi_j . curl phi_i + mass_coef phi_j phi_i).
// Row index i is the test function, column j the trial one.
Block12 volume_block(double h, Complex mass_coef, int quad_n) {
  const QuadRule &rule = gauss_rule(quad_n, 3);
  const double vol = h * h * h;
  Block12 block = Block12::Zero();
  std::array<Vec3, kB> curls;
  for (int c = 0; c < 3; ++c)
    for (int a = 0; a < kBasisPerComponent; ++a)
      curls[4 * c + a] = basis_curl(c, a, h);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q] * vol;
    Vec3 local(rule.points[q][0], rule.points[q][1], rule.points[q][2]);
    double phi[kBasisPerComponent];
    basis_values(local, phi);
    for (int ci = 0; ci < 3; ++ci)
      for (int ai = 0; ai < kBasisPerComponent; ++ai) {
        const int i = 4 * ci + ai;
        for (int cj = 0; cj < 3; ++cj)
          for (int aj = 0; aj < kBasisPerComponent; ++aj) {
            const int j = 4 * cj + aj;
            Complex val = Complex(w * curls[j].dot(curls[i]), 0.0);
            if (ci == cj)
              val += mass_coef * w * phi[aj] * phi[ai];
            block(i, j) += val;
          }
      }
  }
  return block;
}

// Geometry of one face relative to its owner/neighbor, derived from the face
// record alone: the owner sits on the -nu side.
struct FaceFrame {
  Vec3 nu;
  int a1, a2; // in-plane axes
};

FaceFrame face_frame(const Face &f) {
  return FaceFrame{f.normal, (f.axis + 1) % 3, (f.axis + 2) % 3};
}

// Interior-face block of b_h: flux + symmetrization + penalties. Index
// (side*12 + dof), side 0 = owner, 1 = neighbor; jump sign +1 for the owner.
// Depends on the face only through (axis, normal sign), which callers use as
// the memoization key.
Block24 interior_face_block(const Face &f, const ProblemParams &p,
                            int quad_n) {
  const FaceFrame fr = face_frame(f);
  const double h = f.h_f;
  const double area = h * h;
  const QuadRule &rule = gauss_rule(quad_n, 2);
  const double eps = static_cast<double>(p.epsilon);
  const Complex j0_coef = Complex(0, -1) * (p.gamma0 / h);
  const Complex j1_coef = -p.igamma1 * h;

  // Constant per-dof curl traces.
  std::array<Vec3, kB> curl_cross_nu;
  for (int c = 0; c < 3; ++c)
    for (int a = 0; a < kBasisPerComponent; ++a)
      curl_cross_nu[4 * c + a] = basis_curl(c, a, h).cross(fr.nu);

  std::array<Vec3, 3> tang_e;
  for (int c = 0; c < 3; ++c) {
    Vec3 ec = Vec3::Zero();
    ec[c] = 1.0;
    tang_e[c] = tangential(ec, fr.nu);
  }

  const double sign[2] = {1.0, -1.0};
  Block24 block = Block24::Zero();

  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q] * area;
    // Local coordinates of the quad point inside each side: in-plane (s,t)
    // plus +-nu/2 along the face axis (owner on the -nu side).
    Vec3 local[2];
    for (int side = 0; side < 2; ++side) {
      Vec3 loc = Vec3::Zero();
      loc[fr.a1] = rule.points[q][0];
      loc[fr.a2] = rule.points[q][1];
      loc += 0.5 * sign[side] * fr.nu;
      local[side] = loc;
    }
    double phi[2][kBasisPerComponent];
    basis_values(local[0], phi[0]);
    basis_values(local[1], phi[1]);

    for (int si = 0; si < 2; ++si)
      for (int ci = 0; ci < 3; ++ci)
        for (int ai = 0; ai < kBasisPerComponent; ++ai) {
          const int i = si * kB + 4 * ci + ai;
          const double jump_ti = sign[si] * phi[si][ai]; // times tang_e[ci]
          for (int sj = 0; sj < 2; ++sj)
            for (int cj = 0; cj < 3; ++cj)
              for (int aj = 0; aj < kBasisPerComponent; ++aj) {
                const int j = sj * kB + 4 * cj + aj;
                const double jump_tj = sign[sj] * phi[sj][aj];
                const double avg_curl_j_dot_ti =
                    0.5 * curl_cross_nu[4 * cj + aj].dot(tang_e[ci]);
                const double avg_curl_i_dot_tj =
                    0.5 * curl_cross_nu[4 * ci + ai].dot(tang_e[cj]);
                double flux = -avg_curl_j_dot_ti * jump_ti -
                              eps * jump_tj * avg_curl_i_dot_tj;
                Complex val(w * flux, 0.0);
                val += j0_coef * w * jump_tj * jump_ti *
                       tang_e[cj].dot(tang_e[ci]);
                val += j1_coef * w * sign[sj] * sign[si] *
                       curl_cross_nu[4 * cj + aj].dot(
                           curl_cross_nu[4 * ci + ai]);
                block(i, j) += val;
              }
        }
  }
  return block;
}

// Boundary tangential mass: <phi_{j,T}, phi_{i,T}>_F (no coefficient).
Block12 boundary_tangential_block(const Face &f, int quad_n) {
  const FaceFrame fr = face_frame(f);
  const double area = f.h_f * f.h_f;
  const QuadRule &rule = gauss_rule(quad_n, 2);
  std::array<Vec3, 3> tang_e;
  for (int c = 0; c < 3; ++c) {
    Vec3 ec = Vec3::Zero();
    ec[c] = 1.0;
    tang_e[c] = tangential(ec, fr.nu);
  }
  Block12 block = Block12::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q] * area;
    Vec3 loc = Vec3::Zero();
    loc[fr.a1] = rule.points[q][0];
    loc[fr.a2] = rule.points[q][1];
    loc += 0.5 * fr.nu; // owner is on the -nu side
    double phi[kBasisPerComponent];
    basis_values(loc, phi);
    for (int ci = 0; ci < 3; ++ci)
      for (int ai = 0; ai < kBasisPerComponent; ++ai)
        for (int cj = 0; cj < 3; ++cj)
          for (int aj = 0; aj < kBasisPerComponent; ++aj)
            block(4 * ci + ai, 4 * cj + aj) +=
                w * phi[aj] * phi[ai] * tang_e[cj].dot(tang_e[ci]);
  }
  return block;
}

// Signature of the face geometry for memoization: identical blocks for every
// face sharing (axis, normal sign).
int face_key(const Face &f) {
  int sign_bit = f.normal[f.axis] > 0 ? 1 : 0;
  return 2 * f.axis + sign_bit;
}

SparseComplexMatrix assemble(const CartesianMesh &mesh,
                             const ProblemParams &params, int form_quad_n,
                             bool projection_form) {
  validate_params(params);
  const int n = dof_count(mesh);
  SparseComplexMatrix A(n, n, dg_sparsity(mesh));

  const Complex mass_coef =
      projection_form ? Complex(1.0, 0.0)
                      : Complex(-params.k * params.k, 0.0);
  const Block12 vol = volume_block(mesh.h, mass_coef, form_quad_n);
  const int ne = mesh.element_count();
  for (int e = 0; e < ne; ++e)
    for (int i = 0; i < kB; ++i)
      for (int j = 0; j < kB; ++j)
        A.add(kB * e + i, kB * e + j, vol(i, j));

  std::map<int, Block24> face_cache;
  for (const Face &f : mesh.interior_faces) {
    auto it = face_cache.find(face_key(f));
    if (it == face_cache.end())
      it = face_cache
               .emplace(face_key(f),
                        interior_face_block(f, params, form_quad_n))
               .first;
    const Block24 &blk = it->second;
    const int base[2] = {kB * f.owner, kB * f.neighbor};
    for (int si = 0; si < 2; ++si)
      for (int i = 0; i < kB; ++i)
        for (int sj = 0; sj < 2; ++sj)
          for (int j = 0; j < kB; ++j)
            A.add(base[si] + i, base[sj] + j, blk(si * kB + i, sj * kB + j));
  }

  if (!projection_form) {
    const Complex coef(0.0, -params.lambda);
    std::map<int, Block12> bdry_cache;
    for (const Face &f : mesh.boundary_faces) {
      auto it = bdry_cache.find(face_key(f));
      if (it == bdry_cache.end())
        it = bdry_cache
                 .emplace(face_key(f),
                          boundary_tangential_block(f, form_quad_n))
                 .first;
      const Block12 &blk = it->second;
      for (int i = 0; i < kB; ++i)
        for (int j = 0; j < kB; ++j)
          A.add(kB * f.owner + i, kB * f.owner + j, coef * blk(i, j));
    }
  }
  return A;
}

} // namespace

void validate_params(const ProblemParams &p) {
  if (!(p.k > 0))
    throw InvalidParameter("params: wave number k must be positive");
  if (!(p.lambda > 0))
    throw InvalidParameter("params: impedance lambda must be positive");
  if (!(p.gamma0 > 0))
    throw InvalidParameter("params: gamma0 must be positive");
  // Penalty parameter -igamma1 needs non-positive imaginary part.
  if (std::imag(-p.igamma1) > 0)
    throw InvalidParameter(
        "params: igamma1 violates Im(-igamma1) <= 0 (got Im(igamma1) < 0)");
  if (p.epsilon != -1 && p.epsilon != 0 && p.epsilon != 1)
    throw InvalidParameter("params: epsilon must be -1, 0 or +1");
}

bool igamma1_boundary_case(const ProblemParams &p) {
  return std::abs(p.igamma1) > 0 && std::imag(p.igamma1) == 0.0;
}

BoundaryFn impedance_boundary_data(const ExactSolution &exact, double lambda) {
  const Complex ilambda(0.0, lambda);
  auto value = exact.value;
  auto curl = exact.curl;
  return [value, curl, ilambda](const Vec3 &x, const Vec3 &nu) -> CVec3 {
    CVec3 et = tangential(value(x), nu);
    return cross_cr(curl(x), nu) - ilambda * et;
  };
}

std::vector<std::vector<int>> dg_sparsity(const CartesianMesh &mesh) {
  const int ne = mesh.element_count();
  std::vector<std::vector<int>> neighbors(ne);
  for (const Face &f : mesh.interior_faces) {
    neighbors[f.owner].push_back(f.neighbor);
    neighbors[f.neighbor].push_back(f.owner);
  }
  std::vector<std::vector<int>> pattern(static_cast<std::size_t>(dof_count(mesh)));
  for (int e = 0; e < ne; ++e) {
    std::vector<int> elems = neighbors[e];
    elems.push_back(e);
    std::sort(elems.begin(), elems.end());
    std::vector<int> cols;
    cols.reserve(elems.size() * kB);
    for (int other : elems)
      for (int d = 0; d < kB; ++d)
        cols.push_back(kB * other + d);
    for (int d = 0; d < kB; ++d)
      pattern[kB * e + d] = cols;
  }
  return pattern;
}

SparseComplexMatrix assemble_system(const CartesianMesh &mesh,
                                    const ProblemParams &params,
                                    int form_quad_n) {
  return assemble(mesh, params, form_quad_n, false);
}

SparseComplexMatrix assemble_projection_system(const CartesianMesh &mesh,
                                               const ProblemParams &params,
                                               int form_quad_n) {
  return assemble(mesh, params, form_quad_n, true);
}

std::vector<Complex> assemble_rhs(const CartesianMesh &mesh,
                                  const ProblemParams &params,
                                  const SourceFn &f, const BoundaryFn &g,
                                  int quad_n, double *tangency_defect) {
  validate_params(params);
  std::vector<Complex> b(static_cast<std::size_t>(dof_count(mesh)),
                         Complex(0, 0));
  const double h = mesh.h;
  if (f) {
    const QuadRule &rule = gauss_rule(quad_n, 3);
    const double vol = h * h * h;
    const int ne = mesh.element_count();
    for (int e = 0; e < ne; ++e) {
      const Vec3 &center = mesh.elements[e].center;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        Vec3 local(rule.points[q][0], rule.points[q][1], rule.points[q][2]);
        CVec3 fv = f(center + h * local);
        double phi[kBasisPerComponent];
        basis_values(local, phi);
        const double w = rule.weights[q] * vol;
        for (int c = 0; c < 3; ++c)
          for (int a = 0; a < kBasisPerComponent; ++a)
            b[dof_index(e, c, a)] += w * phi[a] * fv[c];
      }
    }
  }
  double defect = 0.0;
  if (g) {
    const QuadRule &rule = gauss_rule(quad_n, 2);
    const double area = h * h;
    for (const Face &face : mesh.boundary_faces) {
      const FaceFrame fr = face_frame(face);
      std::array<Vec3, 3> tang_e;
      for (int c = 0; c < 3; ++c) {
        Vec3 ec = Vec3::Zero();
        ec[c] = 1.0;
        tang_e[c] = tangential(ec, fr.nu);
      }
      for (std::size_t q = 0; q < rule.size(); ++q) {
        Vec3 loc = Vec3::Zero();
        loc[fr.a1] = rule.points[q][0];
        loc[fr.a2] = rule.points[q][1];
        Vec3 x = face.center + h * loc;
        loc += 0.5 * fr.nu;
        CVec3 gv = g(x, fr.nu);
        defect = std::max(defect,
                          std::abs(dot_bilinear(gv, fr.nu.cast<Complex>())));
        CVec3 gt = tangential(gv, fr.nu);
        double phi[kBasisPerComponent];
        basis_values(loc, phi);
        const double w = rule.weights[q] * area;
        for (int c = 0; c < 3; ++c) {
          Complex g_dot_t = dot_bilinear(gt, tang_e[c].cast<Complex>());
          for (int a = 0; a < kBasisPerComponent; ++a)
            b[dof_index(face.owner, c, a)] += w * phi[a] * g_dot_t;
        }
      }
    }
  }
  if (tangency_defect)
    *tangency_defect = defect;
  return b;
}

namespace {

// Accumulates b_h(E, phi_i) for smooth E (zero jumps): curl-curl volume term
// minus the interior-face average flux. Optionally adds mass_coef*(E, phi_i)
// and the boundary impedance pairing.
std::vector<Complex> apply_form_to_smooth(const CartesianMesh &mesh,
                                          const ExactSolution &exact,
                                          Complex mass_coef,
                                          std::optional<Complex> bdry_coef,
                                          int quad_n) {
  std::vector<Complex> out(static_cast<std::size_t>(dof_count(mesh)),
                           Complex(0, 0));
  const double h = mesh.h;
  const double vol = h * h * h;
  const QuadRule &vrule = gauss_rule(quad_n, 3);
  const int ne = mesh.element_count();
  for (int e = 0; e < ne; ++e) {
    const Vec3 &center = mesh.elements[e].center;
    std::array<Vec3, kB> curls;
    for (int c = 0; c < 3; ++c)
      for (int a = 0; a < kBasisPerComponent; ++a)
        curls[4 * c + a] = basis_curl(c, a, h);
    for (std::size_t q = 0; q < vrule.size(); ++q) {
      Vec3 local(vrule.points[q][0], vrule.points[q][1], vrule.points[q][2]);
      Vec3 x = center + h * local;
      CVec3 curl_e = exact.curl(x);
      CVec3 val_e = exact.value(x);
      double phi[kBasisPerComponent];
      basis_values(local, phi);
      const double w = vrule.weights[q] * vol;
      for (int c = 0; c < 3; ++c)
        for (int a = 0; a < kBasisPerComponent; ++a) {
          Complex acc =
              w * dot_bilinear(curl_e, curls[4 * c + a].cast<Complex>());
          acc += mass_coef * w * phi[a] * val_e[c];
          out[dof_index(e, c, a)] += acc;
        }
    }
  }

  const QuadRule &frule = gauss_rule(quad_n, 2);
  const double area = h * h;
  const double sign[2] = {1.0, -1.0};
  for (const Face &face : mesh.interior_faces) {
    const FaceFrame fr = face_frame(face);
    std::array<Vec3, 3> tang_e;
    for (int c = 0; c < 3; ++c) {
      Vec3 ec = Vec3::Zero();
      ec[c] = 1.0;
      tang_e[c] = tangential(ec, fr.nu);
    }
    const int elem[2] = {face.owner, face.neighbor};
    for (std::size_t q = 0; q < frule.size(); ++q) {
      Vec3 inplane = Vec3::Zero();
      inplane[fr.a1] = frule.points[q][0];
      inplane[fr.a2] = frule.points[q][1];
      Vec3 x = face.center + h * inplane;
      CVec3 flux = cross_cr(exact.curl(x), fr.nu);
      const double w = frule.weights[q] * area;
      // -<curl E x nu, [phi_T]> spreads over both sides with the jump sign.
      for (int side = 0; side < 2; ++side) {
        Vec3 loc = inplane + 0.5 * sign[side] * fr.nu;
        double phi[kBasisPerComponent];
        basis_values(loc, phi);
        for (int c = 0; c < 3; ++c) {
          Complex f_dot_t = dot_bilinear(flux, tang_e[c].cast<Complex>());
          for (int a = 0; a < kBasisPerComponent; ++a)
            out[dof_index(elem[side], c, a)] -=
                w * sign[side] * phi[a] * f_dot_t;
        }
      }
    }
  }

  if (bdry_coef) {
    for (const Face &face : mesh.boundary_faces) {
      const FaceFrame fr = face_frame(face);
      std::array<Vec3, 3> tang_e;
      for (int c = 0; c < 3; ++c) {
        Vec3 ec = Vec3::Zero();
        ec[c] = 1.0;
        tang_e[c] = tangential(ec, fr.nu);
      }
      for (std::size_t q = 0; q < frule.size(); ++q) {
        Vec3 loc = Vec3::Zero();
        loc[fr.a1] = frule.points[q][0];
        loc[fr.a2] = frule.points[q][1];
        Vec3 x = face.center + h * loc;
        loc += 0.5 * fr.nu;
        CVec3 et = tangential(exact.value(x), fr.nu);
        double phi[kBasisPerComponent];
        basis_values(loc, phi);
        const double w = frule.weights[q] * area;
        for (int c = 0; c < 3; ++c) {
          Complex e_dot_t = dot_bilinear(et, tang_e[c].cast<Complex>());
          for (int a = 0; a < kBasisPerComponent; ++a)
            out[dof_index(face.owner, c, a)] +=
                (*bdry_coef) * w * phi[a] * e_dot_t;
        }
      }
    }
  }
  return out;
}

} // namespace

std::vector<Complex> assemble_projection_rhs(const CartesianMesh &mesh,
                                             const ExactSolution &exact,
                                             int quad_n) {
  return apply_form_to_smooth(mesh, exact, Complex(1.0, 0.0), std::nullopt,
                              quad_n);
}

double consistency_residual(const CartesianMesh &mesh,
                            const ProblemParams &params,
                            const ExactSolution &exact, int quad_n) {
  validate_params(params);
  const double k2 = params.k * params.k;
  std::vector<Complex> lhs = apply_form_to_smooth(
      mesh, exact, Complex(-k2, 0.0), Complex(0.0, -params.lambda), quad_n);

  auto curl_curl = exact.curl_curl;
  auto value = exact.value;
  SourceFn f = [curl_curl, value, k2](const Vec3 &x) -> CVec3 {
    return curl_curl(x) - k2 * value(x);
  };
  BoundaryFn g = impedance_boundary_data(exact, params.lambda);
  std::vector<Complex> rhs = assemble_rhs(mesh, params, f, g, quad_n);

  double scale = 0.0;
  for (const Complex &c : rhs)
    scale = std::max(scale, std::abs(c));
  if (scale == 0.0)
    scale = 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < rhs.size(); ++i)
    worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
  return worst / scale;
}

} // namespace ipdg
