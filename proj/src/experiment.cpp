#include "experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "svg_plot.hpp"

namespace splap::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write " + path.string());
  out << content;
  require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

// Finite doubles as numbers, everything else as null.
nlohmann::json number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json numbers(const std::vector<double>& v) {
  auto arr = nlohmann::json::array();
  for (double x : v) arr.push_back(number(x));
  return arr;
}

void write_figures(const std::vector<analysis::RateEstimate>& estimates,
                   const std::vector<analysis::ResultRow>& rows, const fs::path& dir) {
  for (const auto& est : estimates) {
    write_file(dir / figure_name(est.p), plot::rate_figure(est, rows));
  }
}

class RunLog {
 public:
  explicit RunLog(const fs::path& path) : out_(path) {
    require(out_.good(), ErrorKind::Io, "cannot write " + path.string());
  }
  void event(nlohmann::json j) { out_ << j.dump() << '\n' << std::flush; }

 private:
  std::ofstream out_;
};

}  // namespace

std::string figure_name(double p) { return "fig_p" + format_double(p) + ".svg"; }

void write_results_csv(const std::vector<analysis::ResultRow>& rows, std::ostream& out) {
  out << "p,tau,replicate,E_total,E_maxL2,E_quasi\n";
  for (const auto& r : rows) {
    out << format_double(r.p) << ',' << format_double(r.tau) << ',' << r.replicate << ','
        << format_double(r.e_total) << ',' << format_double(r.e_max_l2) << ','
        << format_double(r.e_quasi) << '\n';
  }
}

std::vector<analysis::ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Parse, "empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "p,tau,replicate,E_total,E_maxL2,E_quasi", ErrorKind::Parse,
          "unexpected results header '" + line + "'");
  std::vector<analysis::ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    require(cells.size() == 6, ErrorKind::Parse,
            "results line " + std::to_string(lineno) + ": expected 6 columns");
    const std::string where = "results line " + std::to_string(lineno);
    analysis::ResultRow r;
    try {
      r.p = parse_number(cells[0], where);
      r.tau = parse_number(cells[1], where);
      r.replicate = static_cast<int>(parse_number(cells[2], where));
      r.e_total = parse_number(cells[3], where);
      r.e_max_l2 = parse_number(cells[4], where);
      r.e_quasi = parse_number(cells[5], where);
    } catch (const Error& e) {
      fail(ErrorKind::Parse, e.what());
    }
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json summary_json(const std::vector<analysis::RateEstimate>& estimates,
                            double fit_tau_max, const std::vector<std::string>& failures) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& e : estimates) {
    nlohmann::json j;
    j["p"] = e.p;
    j["tau_ref"] = e.tau_ref;
    j["fit_taus"] = numbers(e.fit_taus);
    j["replicates"] = e.replicates;
    j["a_tilde"] = number(e.a_biased);
    j["a_tilde_std"] = number(e.stderr_biased);
    j["a"] = number(e.a_corrected);
    j["a_lo"] = number(e.a_lo);
    j["a_hi"] = number(e.a_hi);
    j["alpha"] = number(e.alpha);
    j["alpha_std"] = number(e.alpha_std);
    j["mean_curve"] = {{"log_c", number(e.mean_curve.log_c)},
                       {"a_tilde", number(e.mean_curve.a)},
                       {"a_tilde_stderr", number(e.mean_curve.stderr_slope)},
                       {"a", number(e.mean_curve_a_corrected)}};
    j["replicate_slopes"] = numbers(e.replicate_slopes);
    j["slope_replicates"] = e.slope_replicates;
    j["taus"] = numbers(e.taus);
    j["mean"] = numbers(e.mean);
    j["std"] = numbers(e.stddev);
    j["warnings"] = e.warnings;
    j["error"] = e.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(e.error);
    results.push_back(std::move(j));
  }
  return {{"fit_tau_max", fit_tau_max}, {"results", results}, {"failures", failures}};
}

RunOutcome run_experiment(const ExperimentConfig& cfg, unsigned workers) {
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create output directory " + dir.string());

  write_file(dir / "config.echo", echo(cfg));
  RunLog log(dir / "run.log");
  log.event({{"event", "start"}, {"p_list", cfg.p_list}, {"n_r", cfg.n_r},
             {"master_seed", cfg.master_seed}, {"taus", analysis::evaluated_taus(cfg)}});

  RunOutcome outcome;
  std::vector<analysis::ResultRow> rows;
  for (double p : cfg.p_list) {
    const auto started = std::chrono::steady_clock::now();
    const analysis::McTable table = analysis::monte_carlo_estimate(cfg, p, workers);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    for (const auto& f : table.failures) {
      log.event({{"event", "cell_failed"}, {"p", p}, {"message", f}});
      outcome.failures.push_back(f);
    }
    log.event({{"event", "p_done"}, {"p", p}, {"seconds", seconds},
               {"failed_replicates", table.failures.size()},
               {"taus", table.taus}, {"mean", numbers(table.mean)},
               {"std", numbers(table.stddev)}});
    const auto prow = analysis::to_rows(table);
    rows.insert(rows.end(), prow.begin(), prow.end());
  }

  std::ostringstream csv;
  write_results_csv(rows, csv);
  write_file(dir / "results.csv", csv.str());

  outcome.estimates = analysis::aggregate(rows, cfg.fit_tau_max);
  for (const auto& e : outcome.estimates) {
    for (const auto& w : e.warnings) log.event({{"event", "warning"}, {"p", e.p}, {"message", w}});
    if (!e.error.empty()) {
      log.event({{"event", "estimate_failed"}, {"p", e.p}, {"message", e.error}});
    }
  }
  if (!outcome.failures.empty()) outcome.status = 1;
  write_file(dir / "summary.json",
             summary_json(outcome.estimates, cfg.fit_tau_max, outcome.failures).dump(2) + "\n");
  write_figures(outcome.estimates, rows, dir);
  log.event({{"event", "done"}, {"status", outcome.status}});
  return outcome;
}

std::vector<analysis::RateEstimate> plot_from_csv(const std::string& csv_path,
                                                  const std::string& out_dir,
                                                  double fit_tau_max) {
  std::ifstream in(csv_path);
  require(in.good(), ErrorKind::Io, "cannot open " + csv_path);
  const auto rows = read_results_csv(in);
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::Io, "cannot create output directory " + dir.string());
  auto estimates = analysis::aggregate(rows, fit_tau_max);
  write_file(dir / "summary.json", summary_json(estimates, fit_tau_max, {}).dump(2) + "\n");
  write_figures(estimates, rows, dir);
  return estimates;
}

}  // namespace splap::cli
