#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace splap::cli {

/// Experiment description. Defaults reproduce the reference protocol: unit
/// square with n = 32, tau in {1, ..., 1/32} against tau_ref = 1/32, 100
/// replicates, noise |x|^(-1/2), initial datum 1.
struct ExperimentConfig {
  std::vector<double> p_list{1.1, 1.2, 1.5, 2.5};
  double kappa = 0.0;
  double eps_reg = 1e-6;
  int mesh_n = 32;
  std::vector<double> tau_ladder{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
  double tau_ref = 0.03125;
  /// Largest tau entering the rate regression.
  double fit_tau_max = 0.5;
  double T = 1.0;
  int n_r = 100;
  std::uint64_t master_seed = 1;
  std::string noise_mode = "additive";        // additive | multiplicative
  std::string phi = "inv_sqrt_radius";        // inv_sqrt_radius | one | zero
  double phi_scale = 1.0;
  int K = 1;
  std::string sigma = "linear";               // linear | sin (multiplicative)
  std::string initial = "one";                // one | zero | sine
  bool clip_initial = false;
  std::string grid_kind = "deterministic";    // deterministic | random
  double tol = 1e-9;
  int max_newton = 200;
  std::string formulation = "euclidean";      // euclidean | componentwise
  std::string output_dir = "splap_out";

  /// Throws ErrorKind::Config naming the offending key.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// `key = value` lines, `#` comments, lists comma separated, steps may be
/// written as fractions (`1/32`). Missing keys keep their defaults; unknown
/// keys are rejected. The result is validated.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Every key in canonical form; parse_config_string(echo(c)) == c.
std::string echo(const ExperimentConfig& cfg);

/// Decimal or a/b fraction.
double parse_number(const std::string& text, const std::string& key);

/// Shortest round-trip decimal.
std::string format_double(double v);

}  // namespace splap::cli
