#include <splap/splap.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <sstream>
#include <string>

#include "analysis.hpp"
#include "config.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "mesh.hpp"

struct splap_config {
  splap::cli::ExperimentConfig cfg;
};

struct splap_mesh {
  splap::mesh::Mesh mesh;
};

struct splap_summary {
  std::vector<splap::analysis::RateEstimate> estimates;
  std::vector<std::string> failures;
};

namespace {

thread_local std::string g_last_error;

splap_status to_status(splap::ErrorKind kind) {
  switch (kind) {
    case splap::ErrorKind::Input: return SPLAP_ERR_INPUT;
    case splap::ErrorKind::Parse: return SPLAP_ERR_PARSE;
    case splap::ErrorKind::Validation: return SPLAP_ERR_VALIDATION;
    case splap::ErrorKind::Config: return SPLAP_ERR_CONFIG;
    case splap::ErrorKind::Convergence: return SPLAP_ERR_CONVERGENCE;
    case splap::ErrorKind::Io: return SPLAP_ERR_IO;
  }
  return SPLAP_ERR_INTERNAL;
}

template <typename Fn>
splap_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const splap::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return SPLAP_ERR_INTERNAL;
}

splap_status null_arg(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return SPLAP_ERR_INPUT;
}

splap_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  return SPLAP_OK;
}

}  // namespace

extern "C" {

const char* splap_version(void) { return "0.1.0"; }

const char* splap_last_error(void) { return g_last_error.c_str(); }

const char* splap_status_string(splap_status status) {
  switch (status) {
    case SPLAP_OK: return "ok";
    case SPLAP_ERR_INPUT: return "input error";
    case SPLAP_ERR_PARSE: return "parse error";
    case SPLAP_ERR_VALIDATION: return "validation error";
    case SPLAP_ERR_CONFIG: return "configuration error";
    case SPLAP_ERR_CONVERGENCE: return "convergence error";
    case SPLAP_ERR_IO: return "i/o error";
    case SPLAP_ERR_INTERNAL: return "internal error";
    case SPLAP_ERR_PARTIAL: return "partial failure";
  }
  return "unknown status";
}

splap_status splap_config_default(splap_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new splap_config{};
    return SPLAP_OK;
  });
}

splap_status splap_config_parse_file(const char* path, splap_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new splap_config{splap::cli::parse_config_file(path)};
    return SPLAP_OK;
  });
}

splap_status splap_config_parse_string(const char* text, splap_config** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new splap_config{splap::cli::parse_config_string(text)};
    return SPLAP_OK;
  });
}

splap_status splap_config_set_seed(splap_config* cfg, uint64_t seed) {
  if (!cfg) return null_arg("cfg");
  cfg->cfg.master_seed = seed;
  return SPLAP_OK;
}

splap_status splap_config_set_output_dir(splap_config* cfg, const char* dir) {
  if (!cfg) return null_arg("cfg");
  if (!dir) return null_arg("dir");
  return guarded([&] {
    splap::require(*dir != '\0', splap::ErrorKind::Config, "output_dir: empty");
    cfg->cfg.output_dir = dir;
    return SPLAP_OK;
  });
}

splap_status splap_config_output_dir(const splap_config* cfg, char* buf, size_t cap,
                                     size_t* needed) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { return copy_out(cfg->cfg.output_dir, buf, cap, needed); });
}

splap_status splap_config_echo(const splap_config* cfg, char* buf, size_t cap,
                               size_t* needed) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { return copy_out(splap::cli::echo(cfg->cfg), buf, cap, needed); });
}

void splap_config_free(splap_config* cfg) { delete cfg; }

splap_status splap_run_experiment(const splap_config* cfg, unsigned workers,
                                  splap_summary** out) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    auto outcome = splap::cli::run_experiment(cfg->cfg, workers);
    if (out) {
      *out = new splap_summary{std::move(outcome.estimates), std::move(outcome.failures)};
    }
    if (outcome.status != 0) {
      g_last_error = "some (p, replicate) cells failed; see summary.json and run.log";
      return SPLAP_ERR_PARTIAL;
    }
    return SPLAP_OK;
  });
}

splap_status splap_plot_from_csv(const char* csv_path, const char* out_dir,
                                 double fit_tau_max, splap_summary** out) {
  if (!csv_path) return null_arg("csv_path");
  if (!out_dir) return null_arg("out_dir");
  return guarded([&] {
    auto estimates = splap::cli::plot_from_csv(csv_path, out_dir, fit_tau_max);
    if (out) *out = new splap_summary{std::move(estimates), {}};
    return SPLAP_OK;
  });
}

size_t splap_summary_count(const splap_summary* summary) {
  return summary ? summary->estimates.size() : 0;
}

size_t splap_summary_failure_count(const splap_summary* summary) {
  return summary ? summary->failures.size() : 0;
}

splap_status splap_summary_get(const splap_summary* summary, size_t index, splap_rate* out) {
  if (!summary) return null_arg("summary");
  if (!out) return null_arg("out");
  if (index >= summary->estimates.size()) {
    g_last_error = "summary index out of range";
    return SPLAP_ERR_INPUT;
  }
  const auto& e = summary->estimates[index];
  out->p = e.p;
  out->tau_ref = e.tau_ref;
  out->replicates = e.replicates;
  out->a_tilde = e.a_biased;
  out->a_tilde_std = e.stderr_biased;
  out->a = e.a_corrected;
  out->alpha = e.alpha;
  out->alpha_std = e.alpha_std;
  out->mean_curve_a_tilde = e.mean_curve.a;
  return SPLAP_OK;
}

void splap_summary_free(splap_summary* summary) { delete summary; }

splap_status splap_mesh_unit_square(int n, splap_mesh** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new splap_mesh{splap::mesh::generate_unit_square(n)};
    return SPLAP_OK;
  });
}

splap_status splap_mesh_load_file(const char* path, splap_mesh** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new splap_mesh{splap::mesh::load_mesh_file(path)};
    return SPLAP_OK;
  });
}

splap_status splap_mesh_load_string(const char* text, splap_mesh** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  return guarded([&] {
    std::istringstream in(text);
    *out = new splap_mesh{splap::mesh::load_mesh(in)};
    return SPLAP_OK;
  });
}

splap_status splap_mesh_counts(const splap_mesh* mesh, size_t* vertices, size_t* simplices) {
  if (!mesh) return null_arg("mesh");
  if (vertices) *vertices = mesh->mesh.num_vertices();
  if (simplices) *simplices = mesh->mesh.num_simplices();
  return SPLAP_OK;
}

splap_status splap_mesh_nondegeneracy(const splap_mesh* mesh, double* out) {
  if (!mesh) return null_arg("mesh");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = splap::mesh::nondegeneracy(mesh->mesh);
    return SPLAP_OK;
  });
}

splap_status splap_mesh_size(const splap_mesh* mesh, double* out) {
  if (!mesh) return null_arg("mesh");
  if (!out) return null_arg("out");
  *out = mesh->mesh.mesh_size();
  return SPLAP_OK;
}

splap_status splap_mesh_save(const splap_mesh* mesh, char* buf, size_t cap, size_t* needed) {
  if (!mesh) return null_arg("mesh");
  return guarded([&] { return copy_out(splap::mesh::to_text(mesh->mesh), buf, cap, needed); });
}

void splap_mesh_free(splap_mesh* mesh) { delete mesh; }

splap_status splap_bias(double tau, double tau_ref, double a, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = splap::analysis::bias(tau, tau_ref, a);
    return SPLAP_OK;
  });
}

splap_status splap_corrected_rate(double a_tilde, const double* taus, size_t n,
                                  double tau_ref, double* a, double* alpha) {
  if (!taus && n > 0) return null_arg("taus");
  return guarded([&] {
    const auto c = splap::analysis::corrected_rate(a_tilde, std::vector<double>(taus, taus + n),
                                                   tau_ref);
    if (a) *a = c.a;
    if (alpha) *alpha = c.alpha;
    return SPLAP_OK;
  });
}

splap_status splap_fit_rate(const double* taus, const double* values, size_t n,
                            double* log_c, double* a, double* stderr_slope) {
  if ((!taus || !values) && n > 0) return null_arg("taus/values");
  return guarded([&] {
    const auto fit = splap::analysis::fit_rate(std::vector<double>(taus, taus + n),
                                               std::vector<double>(values, values + n));
    if (log_c) *log_c = fit.log_c;
    if (a) *a = fit.a;
    if (stderr_slope) *stderr_slope = fit.stderr_slope;
    return SPLAP_OK;
  });
}

}  // extern "C"
