#include "ipdg/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

#include "ipdg/quadrature.hpp"

namespace ipdg {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double resolve_lambda(const ExperimentConfig &cfg, double k) {
  return cfg.lambda_equals_k ? k : cfg.lambda_fixed;
}

// Runs fn(i) for i in [0, count) on cfg.workers threads. Each index writes
// only its own slot, so results are worker-count independent.
void parallel_cells(int count, int workers, const std::function<void(int)> &fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
        fn(i);
    });
  for (auto &t : pool)
    t.join();
}

void base_metadata(ExperimentReport &rep, const ExperimentConfig &cfg,
                   const std::string &command) {
  rep.metadata.emplace_back("command", command);
  rep.metadata.emplace_back("tool_version", kVersion);
  rep.metadata.emplace_back("preset",
                            cfg.preset.empty() ? "custom" : cfg.preset);
  rep.metadata.emplace_back("gamma0", format_real(cfg.gamma0));
  rep.metadata.emplace_back("igamma1", format_complex(cfg.igamma1));
  rep.metadata.emplace_back("lambda_rule", cfg.lambda_equals_k
                                               ? "k"
                                               : format_real(cfg.lambda_fixed));
  rep.metadata.emplace_back("seed", std::to_string(cfg.seed));
  rep.metadata.emplace_back("solver", cfg.solver.method == SolveMethod::Direct
                                          ? "direct"
                                          : "gmres");
  rep.metadata.emplace_back("solver_tol", format_real(cfg.solver.tol));
  std::string ks, ms;
  for (double k : cfg.k_list)
    ks += (ks.empty() ? "" : ",") + format_real(k);
  for (int m : cfg.m_list)
    ms += (ms.empty() ? "" : ",") + std::to_string(m);
  rep.metadata.emplace_back("k_list", ks);
  rep.metadata.emplace_back("m_list", ms);
}

// One plane-wave benchmark solve. Fills the full row; solver failures are
// flagged instead of propagated when tolerate_failure is set (sweep mode).
ExperimentRow solve_cell(const ExperimentConfig &cfg, double k, int m,
                         bool tolerate_failure) {
  const auto t0 = Clock::now();
  ExperimentRow row;
  row.k = k;
  row.m = m;
  const CartesianMesh mesh = build_mesh(m);
  row.h = mesh.h;
  row.dofs = dof_count(mesh);
  row.gamma0 = cfg.gamma0;
  row.igamma1 = cfg.igamma1;

  const ProblemParams params = params_for(cfg, k);
  if (igamma1_boundary_case(params))
    row.flags.push_back("igamma1-boundary-case");
  const ExactSolution exact = plane_wave(k);
  const int quad_n = oscillatory_order(k, mesh.h);

  double defect = 0.0;
  const BoundaryFn g = impedance_boundary_data(exact, params.lambda);
  std::vector<Complex> rhs =
      assemble_rhs(mesh, params, nullptr, g, quad_n, &defect);
  if (defect > 1e-10)
    row.flags.push_back("g-not-tangential");
  // Oscillatory-quadrature self check: n vs n+2.
  if (quad_n + 2 <= 20) {
    std::vector<Complex> rhs2 =
        assemble_rhs(mesh, params, nullptr, g, quad_n + 2);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      diff = std::max(diff, std::abs(rhs[i] - rhs2[i]));
      scale = std::max(scale, std::abs(rhs2[i]));
    }
    if (scale > 0 && diff / scale > 1e-8)
      row.flags.push_back("quad-selfcheck");
  }

  const SparseComplexMatrix A = assemble_system(mesh, params);
  DGField solution;
  bool solved = false;
  try {
    SolveReport srep =
        cfg.solver.method == SolveMethod::Direct
            ? solve_direct(A, rhs, cfg.solver.tol)
            : solve_gmres(A, rhs, cfg.solver.tol, cfg.solver.restart,
                          cfg.solver.maxit, cfg.solver.precond);
    solution = std::move(srep.solution);
    solution.m = mesh.m;
    row.residual = srep.relative_residual;
    solved = true;
  } catch (const ConvergenceFailure &e) {
    if (!tolerate_failure)
      throw;
    row.flags.push_back("solver-no-convergence");
    row.residual = e.achieved_residual;
    if (!e.best_iterate.empty()) {
      solution.m = mesh.m;
      solution.coeffs = e.best_iterate;
      solved = true;
    }
  } catch (const SingularSystem &) {
    if (!tolerate_failure)
      throw;
    row.flags.push_back("singular-system");
  }
  if (solved) {
    const ErrorReport err = error_norms(solution, exact, mesh, params, quad_n);
    row.rel_l2 = err.rel_l2;
    row.rel_hcurl = err.rel_hcurl;
    row.rel_dg = err.rel_dg;
    row.stability_ratio = stability_ratio(solution, exact, mesh, params, quad_n);
    if (err.zero_denominator)
      row.flags.push_back("zero-exact-norm");
  }
  row.wall_time = elapsed(t0);
  return row;
}

void append_orders(ExperimentReport &rep,
                   const std::vector<std::string> &names,
                   const std::vector<std::vector<double>> &errors) {
  // errors[c][r]: error series per column, aligned with rep.rows.
  if (rep.rows.size() < 2)
    return;
  for (const std::string &n : names)
    rep.extra_columns.push_back("order_" + n);
  for (std::size_t r = 1; r < rep.rows.size(); ++r) {
    double ratio = double(rep.rows[r].m) / double(rep.rows[r - 1].m);
    if (rep.rows[r].k != rep.rows[r - 1].k)
      continue;
    if (std::abs(ratio - 2.0) > 1e-12)
      rep.rows[r].flags.push_back("nondyadic-pair");
    for (std::size_t c = 0; c < names.size(); ++c)
      rep.rows[r].extras["order_" + names[c]] =
          observed_order(errors[c][r - 1], errors[c][r], ratio);
  }
}

} // namespace

double ExperimentRow::nan_value() {
  return std::numeric_limits<double>::quiet_NaN();
}

void apply_preset(ExperimentConfig &cfg, const std::string &name) {
  if (name == "7.4") {
    cfg.gamma0 = 100.0;
    cfg.igamma1 = Complex(0.0, 0.1);
  } else if (name == "7.8") {
    cfg.gamma0 = 100.0;
    cfg.igamma1 = Complex(0.08, 0.01);
  } else {
    throw InvalidParameter("unknown preset '" + name + "' (use 7.4 or 7.8)");
  }
  cfg.preset = name;
}

ProblemParams params_for(const ExperimentConfig &cfg, double k) {
  ProblemParams p;
  p.k = k;
  p.lambda = resolve_lambda(cfg, k);
  p.gamma0 = cfg.gamma0;
  p.igamma1 = cfg.igamma1;
  validate_params(p);
  return p;
}

int env_workers() {
  const char *env = std::getenv("MAXWELL_IPDG_WORKERS");
  if (!env)
    return 1;
  int w = std::atoi(env);
  return w >= 1 ? w : 1;
}

ExperimentReport run_solve(const ExperimentConfig &cfg) {
  if (cfg.k_list.size() != 1 || cfg.m_list.size() != 1)
    throw InvalidParameter("solve: exactly one k and one m required");
  ExperimentReport rep;
  base_metadata(rep, cfg, "solve");
  rep.rows.push_back(solve_cell(cfg, cfg.k_list[0], cfg.m_list[0], false));
  return rep;
}

ExperimentReport run_convergence(const ExperimentConfig &cfg) {
  if (cfg.k_list.empty() || cfg.m_list.empty())
    throw InvalidParameter("convergence: k-list and m-list must be nonempty");
  if (!std::is_sorted(cfg.m_list.begin(), cfg.m_list.end()))
    throw InvalidParameter("convergence: m-list must be ascending");
  ExperimentReport rep;
  base_metadata(rep, cfg, "convergence");
  const int nk = static_cast<int>(cfg.k_list.size());
  const int nm = static_cast<int>(cfg.m_list.size());
  rep.rows.resize(static_cast<std::size_t>(nk) * nm);
  parallel_cells(nk * nm, cfg.workers, [&](int idx) {
    rep.rows[idx] = solve_cell(cfg, cfg.k_list[idx / nm],
                               cfg.m_list[idx % nm], true);
  });
  std::vector<std::vector<double>> series(3);
  for (const ExperimentRow &r : rep.rows) {
    series[0].push_back(r.rel_l2);
    series[1].push_back(r.rel_hcurl);
    series[2].push_back(r.rel_dg);
  }
  append_orders(rep, {"l2", "hcurl", "dg"}, series);
  return rep;
}

ExperimentReport run_stability_sweep(const ExperimentConfig &cfg) {
  if (cfg.k_list.empty())
    throw InvalidParameter("stability: k-list must be nonempty");
  if (cfg.m_list.size() != 1)
    throw InvalidParameter("stability: exactly one m (fixed h) required");
  ExperimentReport rep;
  base_metadata(rep, cfg, "stability");
  const int nk = static_cast<int>(cfg.k_list.size());
  rep.rows.resize(nk);
  parallel_cells(nk, cfg.workers, [&](int i) {
    rep.rows[i] = solve_cell(cfg, cfg.k_list[i], cfg.m_list[0], true);
  });
  return rep;
}

ExperimentReport run_critical_h(const ExperimentConfig &cfg) {
  if (cfg.k_list.empty())
    throw InvalidParameter("critical-h: k-list must be nonempty");
  if (!(cfg.eps > 0.0 && cfg.eps <= 1.0))
    throw InvalidParameter("critical-h: eps must be in (0,1]");
  ExperimentReport rep;
  base_metadata(rep, cfg, "critical-h");
  rep.metadata.emplace_back("eps", format_real(cfg.eps));
  rep.metadata.emplace_back("m_max", std::to_string(cfg.m_max));
  const int nk = static_cast<int>(cfg.k_list.size());
  rep.rows.resize(nk);
  parallel_cells(nk, cfg.workers, [&](int i) {
    const double k = cfg.k_list[i];
    ExperimentRow found;
    bool resolved = false;
    for (int m = 2; m <= cfg.m_max; ++m) {
      ExperimentRow row = solve_cell(cfg, k, m, true);
      const bool pass = std::isfinite(row.rel_hcurl) &&
                        row.rel_hcurl <= cfg.eps;
      if (pass) {
        // Confirm the next refinement still passes (monotone-beyond-threshold
        // assumption; reversals are flagged, not resolved).
        if (m + 1 <= cfg.m_max) {
          ExperimentRow next = solve_cell(cfg, k, m + 1, true);
          if (!(std::isfinite(next.rel_hcurl) && next.rel_hcurl <= cfg.eps))
            row.flags.push_back("reversal-next-m-fails");
        } else {
          row.flags.push_back("next-unchecked");
        }
        found = std::move(row);
        resolved = true;
        break;
      }
      found = std::move(row); // keep the last attempt for unresolved rows
    }
    if (!resolved)
      found.flags.push_back("unresolved");
    if (std::isfinite(found.rel_hcurl) && found.rel_hcurl > 1.0)
      found.flags.push_back("error-above-one");
    rep.rows[i] = std::move(found);
  });
  // Least-squares slope of log h(k,eps) vs log k over resolved rows.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const ExperimentRow &r : rep.rows) {
    bool unresolved = false;
    for (const std::string &f : r.flags)
      if (f == "unresolved")
        unresolved = true;
    if (unresolved)
      continue;
    double x = std::log(r.k), y = std::log(r.h);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (n >= 2 && sxx * n - sx * sx != 0.0)
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  rep.metadata.emplace_back("fitted_slope", format_real(slope));
  rep.extra_columns.push_back("eps");
  for (ExperimentRow &r : rep.rows)
    r.extras["eps"] = cfg.eps;
  return rep;
}

ExperimentReport run_penalty_scan(const ExperimentConfig &cfg) {
  if (cfg.k_list.size() != 1 || cfg.m_list.size() != 1)
    throw InvalidParameter("penalty-scan: exactly one k and one m required");
  if (cfg.scan_re_step <= 0 || cfg.scan_im_step <= 0)
    throw InvalidParameter("penalty-scan: grid steps must be positive");
  ExperimentReport rep;
  base_metadata(rep, cfg, "penalty-scan");
  std::vector<Complex> grid;
  const double tiny = 1e-12;
  for (double re = cfg.scan_re_min; re <= cfg.scan_re_max + tiny;
       re += cfg.scan_re_step)
    for (double im = cfg.scan_im_min; im <= cfg.scan_im_max + tiny;
         im += cfg.scan_im_step)
      grid.emplace_back(re, im);
  rep.rows.resize(grid.size());
  parallel_cells(static_cast<int>(grid.size()), cfg.workers, [&](int i) {
    ExperimentConfig point = cfg;
    point.igamma1 = grid[i];
    // Penalty parameter sign rule: reject Im(-igamma1) > 0.
    if (std::imag(-grid[i]) > 0) {
      ExperimentRow row;
      row.k = cfg.k_list[0];
      row.m = cfg.m_list[0];
      row.h = 1.0 / cfg.m_list[0];
      row.dofs = 12LL * cfg.m_list[0] * cfg.m_list[0] * cfg.m_list[0];
      row.gamma0 = cfg.gamma0;
      row.igamma1 = grid[i];
      row.flags.push_back("infeasible-skipped");
      rep.rows[i] = std::move(row);
      return;
    }
    rep.rows[i] = solve_cell(point, cfg.k_list[0], cfg.m_list[0], true);
  });
  int argmin = -1;
  for (std::size_t i = 0; i < rep.rows.size(); ++i)
    if (std::isfinite(rep.rows[i].rel_hcurl) &&
        (argmin < 0 || rep.rows[i].rel_hcurl < rep.rows[argmin].rel_hcurl))
      argmin = static_cast<int>(i);
  if (argmin >= 0) {
    rep.rows[argmin].flags.push_back("argmin");
    rep.metadata.emplace_back("argmin_igamma1",
                              format_complex(rep.rows[argmin].igamma1));
    rep.metadata.emplace_back("argmin_rel_hcurl",
                              format_real(rep.rows[argmin].rel_hcurl));
  }
  return rep;
}

ExperimentReport run_coercivity(const ExperimentConfig &cfg) {
  if (cfg.k_list.empty() || cfg.m_list.empty())
    throw InvalidParameter("coercivity: k-list and m-list must be nonempty");
  ExperimentReport rep;
  base_metadata(rep, cfg, "coercivity");
  rep.metadata.emplace_back("samples", std::to_string(cfg.samples));
  rep.extra_columns = {"samples", "min_ratio", "median_ratio", "gamma_h"};
  const int nk = static_cast<int>(cfg.k_list.size());
  const int nm = static_cast<int>(cfg.m_list.size());
  rep.rows.resize(static_cast<std::size_t>(nk) * nm);
  parallel_cells(nk * nm, cfg.workers, [&](int idx) {
    const auto t0 = Clock::now();
    const double k = cfg.k_list[idx / nm];
    const int m = cfg.m_list[idx % nm];
    const CartesianMesh mesh = build_mesh(m);
    const ProblemParams params = params_for(cfg, k);
    const CoercivityReport c =
        coercivity_sample(mesh, params, cfg.samples, cfg.seed);
    ExperimentRow row;
    row.k = k;
    row.m = m;
    row.h = mesh.h;
    row.dofs = dof_count(mesh);
    row.gamma0 = cfg.gamma0;
    row.igamma1 = cfg.igamma1;
    row.extras["samples"] = c.samples;
    row.extras["min_ratio"] = c.min_ratio;
    row.extras["median_ratio"] = c.median_ratio;
    row.extras["gamma_h"] = c.gamma_h;
    row.wall_time = elapsed(t0);
    rep.rows[idx] = std::move(row);
  });
  return rep;
}

ExperimentReport run_projection(const ExperimentConfig &cfg) {
  if (cfg.k_list.empty() || cfg.m_list.empty())
    throw InvalidParameter("projection: k-list and m-list must be nonempty");
  ExperimentReport rep;
  base_metadata(rep, cfg, "projection");
  rep.extra_columns = {"rel_energy", "rel_boundary"};
  const int nk = static_cast<int>(cfg.k_list.size());
  const int nm = static_cast<int>(cfg.m_list.size());
  rep.rows.resize(static_cast<std::size_t>(nk) * nm);
  parallel_cells(nk * nm, cfg.workers, [&](int idx) {
    const auto t0 = Clock::now();
    const double k = cfg.k_list[idx / nm];
    const int m = cfg.m_list[idx % nm];
    const CartesianMesh mesh = build_mesh(m);
    const ProblemParams params = params_for(cfg, k);
    const ExactSolution exact = plane_wave(k);
    const int quad_n = oscillatory_order(k, mesh.h);
    ExperimentRow row;
    row.k = k;
    row.m = m;
    row.h = mesh.h;
    row.dofs = dof_count(mesh);
    row.gamma0 = cfg.gamma0;
    row.igamma1 = cfg.igamma1;
    double residual = 0.0;
    DGField proj =
        elliptic_projection(mesh, params, exact, cfg.solver.tol, &residual);
    row.residual = residual;
    const ErrorReport err = error_norms(proj, exact, mesh, params, quad_n);
    row.rel_l2 = err.rel_l2;
    row.rel_hcurl = err.rel_hcurl;
    row.rel_dg = err.rel_dg;
    row.extras["rel_energy"] = err.rel_energy;
    row.extras["rel_boundary"] = err.rel_boundary;
    row.stability_ratio = stability_ratio(proj, exact, mesh, params, quad_n);
    row.wall_time = elapsed(t0);
    rep.rows[idx] = std::move(row);
  });
  std::vector<std::vector<double>> series(3);
  for (const ExperimentRow &r : rep.rows) {
    series[0].push_back(r.rel_l2);
    series[1].push_back(r.extras.count("rel_energy")
                            ? r.extras.at("rel_energy")
                            : ExperimentRow::nan_value());
    series[2].push_back(r.extras.count("rel_boundary")
                            ? r.extras.at("rel_boundary")
                            : ExperimentRow::nan_value());
  }
  append_orders(rep, {"l2", "energy", "boundary"}, series);
  return rep;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string format_complex(const Complex &c) {
  std::string re = format_real(c.real());
  double im = c.imag();
  if (im >= 0 || std::isnan(im))
    return re + "+" + format_real(im) + "i";
  return re + "-" + format_real(-im) + "i";
}

Complex parse_complex(const std::string &input) {
  std::string s;
  for (char ch : input)
    if (!std::isspace(static_cast<unsigned char>(ch)))
      s += ch;
  if (s.empty())
    throw InvalidParameter("parse_complex: empty string");
  // Split at the last +/- that is not a leading sign or an exponent sign.
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  auto parse_part = [](std::string part, bool imaginary) -> double {
    if (imaginary) {
      if (part.empty() || part.back() != 'i')
        throw InvalidParameter("parse_complex: missing trailing i");
      part.pop_back();
      if (part.empty() || part == "+")
        return 1.0;
      if (part == "-")
        return -1.0;
    }
    std::size_t used = 0;
    double v = std::stod(part, &used);
    if (used != part.size())
      throw InvalidParameter("parse_complex: trailing characters in '" + part +
                             "'");
    return v;
  };
  const bool has_i = s.back() == 'i';
  if (split == std::string::npos)
    return has_i ? Complex(0.0, parse_part(s, true))
                 : Complex(parse_part(s, false), 0.0);
  if (!has_i)
    throw InvalidParameter("parse_complex: expected 'a+bi' form, got '" +
                           input + "'");
  return Complex(parse_part(s.substr(0, split), false),
                 parse_part(s.substr(split), true));
}

void write_csv(const ExperimentReport &report, const std::string &path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open for writing: " + path);
  out << "k,m,h,dofs,gamma0,igamma1,rel_l2,rel_hcurl,rel_dg,stability_ratio,"
         "residual,wall_time,flags";
  for (const std::string &c : report.extra_columns)
    out << "," << c;
  out << "\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_real(v); };
  for (const ExperimentRow &r : report.rows) {
    out << format_real(r.k) << "," << r.m << "," << format_real(r.h) << ","
        << r.dofs << "," << format_real(r.gamma0) << ","
        << format_complex(r.igamma1) << "," << cell(r.rel_l2) << ","
        << cell(r.rel_hcurl) << "," << cell(r.rel_dg) << ","
        << cell(r.stability_ratio) << "," << cell(r.residual) << ","
        << cell(r.wall_time) << ",";
    for (std::size_t i = 0; i < r.flags.size(); ++i)
      out << (i ? ";" : "") << r.flags[i];
    for (const std::string &c : report.extra_columns) {
      auto it = r.extras.find(c);
      out << ","
          << (it == r.extras.end() ? std::string() : cell(it->second));
    }
    out << "\n";
  }
  if (!out)
    throw IoError("write failed: " + path);

  // Sidecar metadata: <stem>.meta.json, plain key/value JSON object.
  std::string stem = path;
  const std::size_t dot = stem.find_last_of('.');
  const std::size_t slash = stem.find_last_of("/\\");
  if (dot != std::string::npos &&
      (slash == std::string::npos || dot > slash))
    stem = stem.substr(0, dot);
  std::ofstream meta(stem + ".meta.json");
  if (!meta)
    throw IoError("cannot open for writing: " + stem + ".meta.json");
  meta << "{\n";
  for (std::size_t i = 0; i < report.metadata.size(); ++i) {
    std::string value = report.metadata[i].second;
    std::string escaped;
    for (char ch : value) {
      if (ch == '"' || ch == '\\')
        escaped += '\\';
      escaped += ch;
    }
    meta << "  \"" << report.metadata[i].first << "\": \"" << escaped << "\""
         << (i + 1 < report.metadata.size() ? "," : "") << "\n";
  }
  meta << "}\n";
  if (!meta)
    throw IoError("write failed: " + stem + ".meta.json");
}

} // namespace ipdg
