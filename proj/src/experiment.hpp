#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "config.hpp"

namespace splap::cli {

struct RunOutcome {
  /// 0: every (p, replicate) cell succeeded; 1: some cells failed. Rate
  /// estimates that cannot be formed (e.g. no root of the bias correction)
  /// are reported in summary.json without affecting the status.
  int status = 0;
  std::vector<analysis::RateEstimate> estimates;
  std::vector<std::string> failures;
};

/// Full protocol for every p of the config. Writes into cfg.output_dir:
/// config.echo, results.csv, summary.json, fig_p<p>.svg, run.log.
RunOutcome run_experiment(const ExperimentConfig& cfg, unsigned workers = 0);

/// Columns p,tau,replicate,E_total,E_maxL2,E_quasi; numbers in shortest
/// round-trip form, rows in (p, replicate, decreasing tau) order.
void write_results_csv(const std::vector<analysis::ResultRow>& rows, std::ostream& out);
std::vector<analysis::ResultRow> read_results_csv(std::istream& in);

nlohmann::json summary_json(const std::vector<analysis::RateEstimate>& estimates,
                            double fit_tau_max, const std::vector<std::string>& failures);

/// Re-renders summary.json and the figures from a persisted results.csv.
/// Returns the estimates.
std::vector<analysis::RateEstimate> plot_from_csv(const std::string& csv_path,
                                                  const std::string& out_dir,
                                                  double fit_tau_max);

std::string figure_name(double p);

}  // namespace splap::cli
