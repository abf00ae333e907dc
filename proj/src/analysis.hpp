#pragma once

// Error functional of a nested trajectory pair, its Monte-Carlo mean over
// independent noise paths, log-log rate regression and the correction of the
// slope bias caused by measuring against a finite reference step.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "config.hpp"
#include "stepper.hpp"

namespace splap::analysis {

struct PathError {
  double max_l2_sq = 0.0;
  double quasi_sum = 0.0;
  double total = 0.0;
};

/// max_m ||u~(t_m) - u_m||^2_L2 + sum_m tau_m ||F(grad u~(t_m)) - F(grad u_m)||^2
/// over the coarse points t_m, m >= 1, with the fine trajectory in place of
/// the exact solution.
PathError path_error(const stepper::Trajectory& coarse, const stepper::Trajectory& fine,
                     const fem::FemOperators& ops, const constitutive::GrowthParams& params);

/// Monte-Carlo table for one exponent p.
struct McTable {
  double p = 0.0;
  /// Decreasing; always ends with the reference step.
  std::vector<double> taus;
  /// errors[r][i] for replicate r and taus[i]; empty when replicate r failed.
  std::vector<std::vector<PathError>> errors;
  std::vector<std::string> failures;
  /// Mean and sample standard deviation of total error over successful
  /// replicates, per tau.
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Steps evaluated by the experiment: the ladder plus the reference step,
/// sorted decreasing, duplicates removed.
std::vector<double> evaluated_taus(const cli::ExperimentConfig& cfg);

/// Builds mesh, operators, noise and initial datum from the config, then for
/// every replicate samples W^(r), runs the reference trajectory and one
/// coarse trajectory per ladder entry on that path, and evaluates the
/// path errors. Replicates run on `workers` threads (0: hardware count).
McTable monte_carlo_estimate(const cli::ExperimentConfig& cfg, double p,
                             unsigned workers = 0);

struct FitResult {
  double log_c = 0.0;
  double a = 0.0;
  /// Standard error of the slope; 0 with only two points.
  double stderr_slope = 0.0;
};

/// OLS of log value on log tau. Needs >= 2 strictly positive pairs with at
/// least two distinct taus.
FitResult fit_rate(const std::vector<double>& taus, const std::vector<double>& values);

/// tau^a / (tau^a - tau_ref^a).
double bias(double tau, double tau_ref, double a);

/// Mean of bias(tau_i, tau_ref, a) over taus.
double mean_bias(const std::vector<double>& taus, double tau_ref, double a);

struct Correction {
  double a = 0.0;
  double alpha = 0.0;
  /// Root lies above 1, outside the range covered by the bias analysis.
  bool above_one = false;
};

/// Solves a * mean_bias(a) = a_tilde for a in (1e-6, 2] by bisection.
Correction corrected_rate(double a_tilde, const std::vector<double>& taus, double tau_ref);

// ---------------------------------------------------------------------------
// Aggregation of the persisted result table.

struct ResultRow {
  double p = 0.0;
  double tau = 0.0;
  int replicate = 0;
  double e_total = 0.0;
  double e_max_l2 = 0.0;
  double e_quasi = 0.0;
};

std::vector<ResultRow> to_rows(const McTable& table);

struct RateEstimate {
  double p = 0.0;
  double tau_ref = 0.0;
  std::vector<double> fit_taus;
  int replicates = 0;

  /// Slopes of the per-replicate regressions and their mean / std.
  std::vector<int> slope_replicates;
  std::vector<double> replicate_slopes;
  double a_biased = 0.0;
  double stderr_biased = 0.0;

  /// Regression on the replicate-mean curve.
  FitResult mean_curve;

  /// Bias-corrected a from a_biased; a_lo / a_hi invert a_biased -/+ std.
  double a_corrected = 0.0;
  double a_lo = 0.0;
  double a_hi = 0.0;
  double alpha = 0.0;
  double alpha_std = 0.0;
  double mean_curve_a_corrected = 0.0;

  /// Per-tau mean and standard deviation of E_total, in `taus` order.
  std::vector<double> taus;
  std::vector<double> mean;
  std::vector<double> stddev;

  std::vector<std::string> warnings;
  std::string error;
};

/// Pure function of the table: the reference step of each p is its smallest
/// tau, regression uses tau_ref < tau <= fit_tau_max.
std::vector<RateEstimate> aggregate(const std::vector<ResultRow>& rows, double fit_tau_max);

}  // namespace splap::analysis
