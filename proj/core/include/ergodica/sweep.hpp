#pragma once

#include "ergodica/config.hpp"
#include "ergodica/effective.hpp"

#include <limits>
#include <string>
#include <vector>

namespace ergodica {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// One epsilon of a sweep. Quantities that were not measured stay NaN.
struct SweepRow {
  long m = 0;  // eps = 1/m
  double eps = kNaN;
  int n = 0;   // domain intervals per axis
  double lambda_eps = kNaN;
  double lambda_bar = kNaN;
  double abs_err_lambda = kNaN;
  double eigfun_err = kNaN;  // |(1 + t) u_eps - u|_inf
  double z_norm = kNaN;
  double v_norm = kNaN;
  double seconds = 0.0;
  // diagnostics
  double pivot_err = kNaN;   // |w_eps - u|_inf
  double residual = kNaN;    // expansion residual
  double t_eps = kNaN;
  double eigfun_err_direct = kNaN;  // |u_eps - u|_inf
  double eigfun_err_l2 = kNaN;
  double cw_lower = kNaN;
  double cw_upper = kNaN;
  int iterations = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct RateFit {
  double slope = kNaN;
  double constant = kNaN;
  double r2 = kNaN;
  std::size_t points = 0;
};

/// Least squares of log e against log eps. Nonpositive or nonfinite errors
/// are dropped; fewer than three survivors raise InputError.
RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& errors);

struct MeasurementFit {
  std::string measurement;
  std::string status;  // "ok", "exact" or "insufficient: ..."
  RateFit fit;
};

struct SweepReport {
  std::string problem;
  std::string mode;
  int dim = 1;
  int oversampling = 0;
  int torus_n = 0;
  std::vector<std::string> measurements;
  EffectiveLinear effective;            // linear problems
  std::vector<double> effective_planes; // Bellman: supporting-plane a_bar entries (a11[, a12, a22] each)
  std::vector<SweepRow> rows;
  std::vector<MeasurementFit> fits;

  const MeasurementFit* fit(const std::string& measurement) const;
};

/// Column of a row for a measurement.
double measurement_value(const SweepRow& row, Measurement m);

/// Computes the effective problem once, then one row per eps (rows run in
/// parallel), then fits every requested measurement. Row failures are
/// recorded in the row status.
SweepReport run_sweep(const SweepConfig& config);

/// Worker count: min(requested or hardware, jobs, ERGODICA_THREADS).
int worker_count(int requested, std::size_t jobs);

}  // namespace ergodica
