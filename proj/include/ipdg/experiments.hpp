#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ipdg/analysis.hpp"
#include "ipdg/assembly.hpp"
#include "ipdg/common.hpp"
#include "ipdg/solver.hpp"

namespace ipdg {

struct SolverOptions {
  SolveMethod method = SolveMethod::Direct;
  double tol = 1e-10;
  int restart = 50;
  int maxit = 200;
  Preconditioner precond = Preconditioner::None;
};

/// Campaign configuration. Penalty presets: "7.4" = (gamma0 100, igamma1
/// 0.1i), "7.8" = (gamma0 100, igamma1 0.08+0.01i); lambda follows the
/// lambda = k rule unless a fixed value is set.
struct ExperimentConfig {
  std::vector<double> k_list;
  std::vector<int> m_list;
  bool lambda_equals_k = true;
  double lambda_fixed = 0.0;
  double gamma0 = 100.0;
  Complex igamma1 = Complex(0.0, 0.1);
  std::string preset; // "", "7.4" or "7.8"
  double eps = 0.5;   // critical-h relative tolerance, in (0,1]
  double scan_re_min = 0.0, scan_re_max = 0.2, scan_re_step = 0.02;
  double scan_im_min = 0.0, scan_im_max = 0.1, scan_im_step = 0.02;
  unsigned long long seed = 20240915;
  int samples = 100; // coercivity draws per (k,m)
  SolverOptions solver;
  int m_max = 24; // desk-scale critical-h scan budget (overridable)
  int workers = 1;
};

/// Applies a named penalty preset ("7.4" or "7.8").
void apply_preset(ExperimentConfig &cfg, const std::string &name);

ProblemParams params_for(const ExperimentConfig &cfg, double k);

/// Worker count from MAXWELL_IPDG_WORKERS (>=1), default 1.
int env_workers();

/// One result row of the experiments CSV. NaN-valued numeric fields are
/// serialized as empty cells.
struct ExperimentRow {
  double k = 0.0;
  int m = 0;
  double h = 0.0;
  long long dofs = 0;
  double gamma0 = 0.0;
  Complex igamma1;
  double rel_l2 = nan_value();
  double rel_hcurl = nan_value();
  double rel_dg = nan_value();
  double stability_ratio = nan_value();
  double residual = nan_value();
  double wall_time = nan_value();
  std::vector<std::string> flags;
  std::map<std::string, double> extras; // keyed by report.extra_columns

  static double nan_value();
};

struct ExperimentReport {
  std::vector<std::string> extra_columns; // appended after the fixed schema
  std::vector<ExperimentRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata; // sidecar
};

/// Single (k,m) IPDG solve of the plane-wave benchmark (f = 0, impedance
/// data from the exact solution): errors, stability ratio, residual.
ExperimentReport run_solve(const ExperimentConfig &cfg);

/// Rows per (k,m) plus observed orders between successive m.
ExperimentReport run_convergence(const ExperimentConfig &cfg);

/// Stability ratio per k at fixed mesh.
ExperimentReport run_stability_sweep(const ExperimentConfig &cfg);

/// Critical mesh size h(k,eps): first m (from 2, up to m_max) with relative
/// H(curl) error <= eps; reversals of the next refinement are flagged and the
/// fitted log-log slope goes to the metadata.
ExperimentReport run_critical_h(const ExperimentConfig &cfg);

/// Relative H(curl) error over the igamma1 grid at fixed (k,m); the
/// minimizing row is flagged "argmin". Grid points with Im(-igamma1) > 0 are
/// skipped with a flag; boundary cases are admitted flagged.
ExperimentReport run_penalty_scan(const ExperimentConfig &cfg);

/// Theorem-4.1 coercivity sampling per (k,m).
ExperimentReport run_coercivity(const ExperimentConfig &cfg);

/// Elliptic-projection errors per (k,m) with observed orders.
ExperimentReport run_projection(const ExperimentConfig &cfg);

/// UTF-8 CSV with the fixed header (k,m,h,dofs,gamma0,igamma1,rel_l2,
/// rel_hcurl,rel_dg,stability_ratio,residual,wall_time,flags) plus the
/// report's extra columns; reals at 12 significant digits, complex values as
/// "a+bi". Writes a sidecar <stem>.meta.json with the report metadata.
void write_csv(const ExperimentReport &report, const std::string &path);

std::string format_real(double v);          // %.12g
std::string format_complex(const Complex &c); // "a+bi"
Complex parse_complex(const std::string &s);

} // namespace ipdg
