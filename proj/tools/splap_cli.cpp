// Command-line front end. Talks to the library only through the C API.

#include <splap/splap.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

int report_failure(const char* what, splap_status status) {
  std::fprintf(stderr, "splap %s: %s: %s\n", what, splap_status_string(status),
               splap_last_error());
  return status == SPLAP_ERR_PARTIAL ? 1 : 2;
}

void print_summary(const splap_summary* summary) {
  for (size_t i = 0; i < splap_summary_count(summary); ++i) {
    splap_rate r{};
    if (splap_summary_get(summary, i, &r) != SPLAP_OK) continue;
    std::printf("p=%-5g  a~=%.3f +/- %.3f  (mean curve %.3f)  a=%.3f  alpha=%.3f +/- %.3f  [%d replicates]\n",
                r.p, r.a_tilde, r.a_tilde_std, r.mean_curve_a_tilde, r.a, r.alpha,
                r.alpha_std, r.replicates);
  }
  if (size_t f = splap_summary_failure_count(summary)) {
    std::printf("%zu failed cells, see run.log\n", f);
  }
}

std::string echo_config(const splap_config* cfg) {
  size_t needed = 0;
  splap_config_echo(cfg, nullptr, 0, &needed);
  std::vector<char> buf(needed);
  splap_config_echo(cfg, buf.data(), buf.size(), &needed);
  return buf.data();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic p-Laplace space-time solver and convergence-rate experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "run the convergence experiment");
  run->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides config)");
  run->add_option("--workers", workers, "worker threads (0: hardware concurrency)");
  auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides config)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "parse and check a config, print it canonically");
  validate->add_option("--config", validate_path, "experiment config file")->required()->check(CLI::ExistingFile);

  std::string csv_path;
  std::string plot_out;
  double fit_tau_max = 0.5;
  auto* plot = app.add_subcommand("plot", "re-render summary and figures from results.csv");
  plot->add_option("--csv", csv_path, "results.csv of a previous run")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "output directory (default: next to the csv)");
  plot->add_option("--fit-tau-max", fit_tau_max, "largest tau entering the regression");

  CLI11_PARSE(app, argc, argv);

  if (*validate) {
    splap_config* cfg = nullptr;
    if (auto st = splap_config_parse_file(validate_path.c_str(), &cfg); st != SPLAP_OK) {
      return report_failure("validate", st);
    }
    std::fputs(echo_config(cfg).c_str(), stdout);
    splap_config_free(cfg);
    return 0;
  }

  if (*plot) {
    if (plot_out.empty()) {
      plot_out = std::filesystem::path(csv_path).parent_path().string();
      if (plot_out.empty()) plot_out = ".";
    }
    splap_summary* summary = nullptr;
    const auto st = splap_plot_from_csv(csv_path.c_str(), plot_out.c_str(), fit_tau_max, &summary);
    if (summary) print_summary(summary);
    splap_summary_free(summary);
    return st == SPLAP_OK ? 0 : report_failure("plot", st);
  }

  splap_config* cfg = nullptr;
  if (auto st = splap_config_parse_file(config_path.c_str(), &cfg); st != SPLAP_OK) {
    return report_failure("run", st);
  }
  if (*seed_opt) splap_config_set_seed(cfg, seed);
  if (*out_opt) {
    if (auto st = splap_config_set_output_dir(cfg, out_dir.c_str()); st != SPLAP_OK) {
      splap_config_free(cfg);
      return report_failure("run", st);
    }
  }
  splap_summary* summary = nullptr;
  const auto st = splap_run_experiment(cfg, workers, &summary);
  splap_config_free(cfg);
  if (summary) print_summary(summary);
  splap_summary_free(summary);
  return st == SPLAP_OK ? 0 : report_failure("run", st);
}
