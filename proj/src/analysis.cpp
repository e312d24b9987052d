#include "ipdg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ipdg/quadrature.hpp"

namespace ipdg {

namespace {

inline Complex dot_bilinear(const CVec3 &a, const CVec3 &b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline CVec3 tangential_c(const CVec3 &v, const Vec3 &nu) {
  return v - dot_bilinear(v, nu.cast<Complex>()) * nu.cast<Complex>();
}

inline CVec3 cross_cr(const CVec3 &a, const Vec3 &b) {
  return CVec3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
               a[0] * b[1] - a[1] * b[0]);
}

// Raw squared accumulators; combined into a NormSet once gamma_h is known.
struct RawNorms {
  double l2_sq = 0.0;
  double curl_sq = 0.0;
  double j0 = 0.0;
  double j1 = 0.0;
  double avg_flux_sq = 0.0; // h_F/gamma0-weighted average term of (3.13)
  double bt_sq = 0.0;
};

// Integrates the norm components of the function given by per-element value
// and curl evaluators (both may be discontinuous across faces).
template <typename ValueFn, typename CurlFn>
RawNorms accumulate_norms(const CartesianMesh &mesh,
                          const ProblemParams &params, int quad_n,
                          const ValueFn &value, const CurlFn &curl) {
  RawNorms r;
  const double h = mesh.h;
  const double vol = h * h * h;
  const double area = h * h;
  const double g1 = gamma1_norm_weight(params);
  const QuadRule &vrule = gauss_rule(quad_n, 3);
  const int ne = mesh.element_count();
  for (int e = 0; e < ne; ++e) {
    const Vec3 &center = mesh.elements[e].center;
    for (std::size_t q = 0; q < vrule.size(); ++q) {
      Vec3 x = center + h * Vec3(vrule.points[q][0], vrule.points[q][1],
                                 vrule.points[q][2]);
      const double w = vrule.weights[q] * vol;
      r.l2_sq += w * value(e, x).squaredNorm();
      r.curl_sq += w * curl(e, x).squaredNorm();
    }
  }
  const QuadRule &frule = gauss_rule(quad_n, 2);
  for (const Face &f : mesh.interior_faces) {
    const int a1 = (f.axis + 1) % 3, a2 = (f.axis + 2) % 3;
    for (std::size_t q = 0; q < frule.size(); ++q) {
      Vec3 x = f.center;
      x[a1] += h * frule.points[q][0];
      x[a2] += h * frule.points[q][1];
      const double w = frule.weights[q] * area;
      CVec3 jump_t = tangential_c(value(f.owner, x) - value(f.neighbor, x),
                                  f.normal);
      r.j0 += (params.gamma0 / f.h_f) * w * jump_t.squaredNorm();
      CVec3 curl_o = curl(f.owner, x);
      CVec3 curl_n = curl(f.neighbor, x);
      r.j1 += g1 * f.h_f * w *
              cross_cr(curl_o - curl_n, f.normal).squaredNorm();
      r.avg_flux_sq += (f.h_f / params.gamma0) * w *
                       cross_cr(0.5 * (curl_o + curl_n), f.normal)
                           .squaredNorm();
    }
  }
  for (const Face &f : mesh.boundary_faces) {
    const int a1 = (f.axis + 1) % 3, a2 = (f.axis + 2) % 3;
    for (std::size_t q = 0; q < frule.size(); ++q) {
      Vec3 x = f.center;
      x[a1] += h * frule.points[q][0];
      x[a2] += h * frule.points[q][1];
      const double w = frule.weights[q] * area;
      r.bt_sq += w * tangential_c(value(f.owner, x), f.normal).squaredNorm();
    }
  }
  return r;
}

NormSet finalize(const RawNorms &r, const CartesianMesh &mesh,
                 const ProblemParams &params) {
  NormSet n;
  n.l2 = std::sqrt(r.l2_sq);
  n.curl_broken = std::sqrt(r.curl_sq);
  n.hcurl = std::sqrt(r.l2_sq + r.curl_sq);
  n.j0 = r.j0;
  n.j1 = r.j1;
  n.boundary_tangential = std::sqrt(r.bt_sq);
  n.dg = std::sqrt(r.curl_sq + r.l2_sq + r.j0 + r.j1);
  n.energy = std::sqrt(n.dg * n.dg + r.avg_flux_sq);
  const double gh = gamma_h(params, mesh.h);
  n.eh = std::sqrt(r.curl_sq + params.k * params.k * r.l2_sq +
                   gh * (r.j0 + r.j1 +
                         params.lambda * r.bt_sq));
  return n;
}

} // namespace

double gamma_h(const ProblemParams &params, double h_min) {
  const double g1 = gamma1_norm_weight(params);
  if (params.k == 0 || params.lambda == 0 || params.gamma0 == 0 || g1 == 0)
    throw InvalidParameter("gamma_h: k, lambda, gamma0, |igamma1| must be "
                           "nonzero");
  if (h_min <= 0)
    throw InvalidParameter("gamma_h: h_min must be positive");
  return 1.0 / (params.lambda * h_min) +
         1.0 / (g1 * params.k * params.k * h_min * h_min) +
         1.0 / params.gamma0 + 1.0;
}

NormSet field_norms(const DGField &field, const CartesianMesh &mesh,
                    const ProblemParams &params) {
  auto value = [&](int e, const Vec3 &x) {
    return eval_field(field, mesh, e, x);
  };
  auto curl = [&](int e, const Vec3 &) { return eval_curl(field, mesh, e); };
  return finalize(accumulate_norms(mesh, params, 2, value, curl), mesh,
                  params);
}

NormSet exact_norms(const ExactSolution &exact, const CartesianMesh &mesh,
                    const ProblemParams &params, int quad_n) {
  auto value = [&](int, const Vec3 &x) { return exact.value(x); };
  auto curl = [&](int, const Vec3 &x) { return exact.curl(x); };
  return finalize(accumulate_norms(mesh, params, quad_n, value, curl), mesh,
                  params);
}

NormSet error_norms_abs(const DGField &field, const ExactSolution &exact,
                        const CartesianMesh &mesh, const ProblemParams &params,
                        int quad_n) {
  auto value = [&](int e, const Vec3 &x) -> CVec3 {
    return exact.value(x) - eval_field(field, mesh, e, x);
  };
  auto curl = [&](int e, const Vec3 &x) -> CVec3 {
    return exact.curl(x) - eval_curl(field, mesh, e);
  };
  return finalize(accumulate_norms(mesh, params, quad_n, value, curl), mesh,
                  params);
}

ErrorReport error_norms(const DGField &field, const ExactSolution &exact,
                        const CartesianMesh &mesh, const ProblemParams &params,
                        int quad_n) {
  ErrorReport rep;
  rep.error = error_norms_abs(field, exact, mesh, params, quad_n);
  rep.exact = exact_norms(exact, mesh, params, quad_n);
  auto rel = [&rep](double err, double ref) {
    if (ref == 0.0) {
      rep.zero_denominator = true;
      return err;
    }
    return err / ref;
  };
  rep.rel_l2 = rel(rep.error.l2, rep.exact.l2);
  rep.rel_hcurl = rel(rep.error.hcurl, rep.exact.hcurl);
  rep.rel_dg = rel(rep.error.dg, rep.exact.dg);
  rep.rel_energy = rel(rep.error.energy, rep.exact.energy);
  rep.rel_boundary =
      rel(rep.error.boundary_tangential, rep.exact.boundary_tangential);
  return rep;
}

CoercivityReport coercivity_sample(const CartesianMesh &mesh,
                                   const ProblemParams &params, int n_samples,
                                   unsigned long long seed) {
  if (n_samples < 1)
    throw InvalidParameter("coercivity_sample: n_samples must be >= 1");
  const SparseComplexMatrix A = assemble_system(mesh, params);
  const double gh = gamma_h(params, mesh.h);
  std::mt19937_64 rng(seed);
  auto uniform_pm1 = [&rng]() {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  };
  const int n = dof_count(mesh);
  std::vector<double> ratios;
  ratios.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    DGField u;
    u.m = mesh.m;
    u.coeffs.resize(n);
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (int i = 0; i < n; ++i) {
        u.coeffs[i] = Complex(uniform_pm1(), uniform_pm1());
        norm2 += std::norm(u.coeffs[i]);
      }
    } while (norm2 == 0.0); // zero draws are resampled

    const Complex ah = quadratic_form(A, u.coeffs, u.coeffs);
    const NormSet ns = field_norms(u, mesh, params);
    ratios.push_back(gh * std::abs(ah) / (ns.eh * ns.eh));
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  CoercivityReport rep;
  rep.samples = n_samples;
  rep.min_ratio = sorted.front();
  rep.median_ratio = n_samples % 2 == 1
                         ? sorted[n_samples / 2]
                         : 0.5 * (sorted[n_samples / 2 - 1] +
                                  sorted[n_samples / 2]);
  rep.gamma_h = gh;
  rep.seed = seed;
  return rep;
}

DGField elliptic_projection(const CartesianMesh &mesh,
                            const ProblemParams &params,
                            const ExactSolution &exact, double solver_tol,
                            double *residual_out) {
  const SparseComplexMatrix P = assemble_projection_system(mesh, params);
  const int quad_n = oscillatory_order(exact.wave_number, mesh.h);
  const std::vector<Complex> rhs =
      assemble_projection_rhs(mesh, exact, quad_n);
  SolveReport rep = solve_direct(P, rhs, solver_tol);
  if (residual_out)
    *residual_out = rep.relative_residual;
  rep.solution.m = mesh.m;
  return std::move(rep.solution);
}

double stability_ratio(const DGField &solution, const ExactSolution &exact,
                       const CartesianMesh &mesh, const ProblemParams &params,
                       int quad_n) {
  const double num = field_norms(solution, mesh, params).hcurl;
  const double den = exact_norms(exact, mesh, params, quad_n).hcurl;
  if (den == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

double observed_order(double err_coarse, double err_fine, double ratio) {
  if (err_coarse <= 0 || err_fine <= 0 || ratio <= 1)
    return std::numeric_limits<double>::quiet_NaN();
  return std::log(err_coarse / err_fine) / std::log(ratio);
}

} // namespace ipdg
