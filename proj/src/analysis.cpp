#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "error.hpp"
#include "parallel.hpp"

namespace splap::analysis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shifted by the first value so that identical inputs give their value back
// and a spread of exactly zero.
double mean_of(const std::vector<double>& v) {
  double d = 0.0;
  for (double x : v) d += x - v.front();
  return v.front() + d / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

bool same_time(double a, double b, double scale) {
  return std::abs(a - b) <= 1e-9 * scale;
}

// Everything a replicate needs that does not depend on the noise path.
struct Setup {
  std::shared_ptr<const fem::FemOperators> ops;
  stochastics::NoiseCoefficient noise;
  fem::FeFunction initial;
  constitutive::GrowthParams params;
  psolver::SolverOptions solver;
  psolver::Formulation formulation;
};

Setup make_setup(const cli::ExperimentConfig& cfg, double p) {
  Setup s;
  auto mesh = std::make_shared<const mesh::Mesh>(mesh::generate_unit_square(cfg.mesh_n));
  s.ops = std::make_shared<const fem::FemOperators>(fem::assemble(mesh));

  if (cfg.phi == "inv_sqrt_radius") {
    s.noise = stochastics::inverse_sqrt_radius_noise(*mesh, cfg.phi_scale, cfg.K);
  } else {
    const double level = cfg.phi == "one" ? 1.0 : 0.0;
    s.noise = stochastics::noise_from_profile(
        *mesh, [level](const mesh::Point&) { return level; }, cfg.phi_scale, cfg.K);
  }
  if (cfg.noise_mode == "multiplicative") {
    std::function<double(double)> sigma = [](double u) { return u; };
    if (cfg.sigma == "sin") sigma = [](double u) { return std::sin(u); };
    s.noise = stochastics::with_sigma(std::move(s.noise), std::move(sigma));
  }

  std::function<double(const mesh::Point&)> u0 = [](const mesh::Point&) { return 1.0; };
  if (cfg.initial == "zero") u0 = [](const mesh::Point&) { return 0.0; };
  if (cfg.initial == "sine") {
    u0 = [](const mesh::Point& x) {
      return std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
    };
  }
  s.initial = fem::nodal_interpolate(*mesh, u0);
  s.params = {p, cfg.kappa, cfg.eps_reg};
  s.solver.tol = cfg.tol;
  s.solver.max_iterations_per_level = cfg.max_newton;
  s.formulation = cfg.formulation == "componentwise" ? psolver::Formulation::Componentwise
                                                     : psolver::Formulation::Euclidean;
  return s;
}

stepper::SchemeConfig scheme(const Setup& s, stochastics::TimeGrid grid,
                             std::shared_ptr<const stochastics::NoisePath> path,
                             bool clip) {
  stepper::SchemeConfig c;
  c.ops = s.ops;
  c.params = s.params;
  c.grid = std::move(grid);
  c.noise = s.noise;
  c.path = std::move(path);
  c.initial = s.initial;
  c.solver = s.solver;
  c.formulation = s.formulation;
  c.clip_initial = clip;
  return c;
}

long steps_for(double horizon, double tau) {
  return std::lround(horizon / tau);
}

std::vector<PathError> run_replicate(const cli::ExperimentConfig& cfg, const Setup& s,
                                     const std::vector<double>& taus, int replicate) {
  const std::uint64_t seed =
      stochastics::derive_seed(cfg.master_seed, static_cast<std::uint64_t>(replicate));
  const bool random = cfg.grid_kind == "random";

  // Random coarse points may overshoot T by up to tau/4; the path and the
  // reference trajectory then extend past T on the reference grid.
  double horizon = cfg.T;
  if (random) {
    const double tau_max = *std::max_element(taus.begin(), taus.end());
    horizon = std::ceil((cfg.T + 0.25 * tau_max) / cfg.tau_ref - 1e-9) * cfg.tau_ref;
  }
  const long n_fine = steps_for(horizon, cfg.tau_ref);
  auto path = std::make_shared<const stochastics::NoisePath>(
      stochastics::sample_path(seed, horizon, n_fine, cfg.K));

  const auto fine_cfg = scheme(s, stochastics::uniform_time_grid(static_cast<int>(n_fine), horizon),
                               path, cfg.clip_initial);
  const stepper::Trajectory fine = stepper::run_trajectory(fine_cfg);

  std::vector<PathError> out;
  out.reserve(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double tau = taus[i];
    if (same_time(tau, cfg.tau_ref, cfg.tau_ref)) {
      out.push_back(path_error(fine, fine, *s.ops, s.params));
      continue;
    }
    const int M = static_cast<int>(steps_for(cfg.T, tau));
    stochastics::TimeGrid grid =
        random ? stochastics::snap_to_fine_grid(
                     stochastics::random_time_grid(stochastics::derive_seed(seed, 1 + i), M, cfg.T),
                     cfg.tau_ref)
               : stochastics::uniform_time_grid(M, cfg.T);
    const auto coarse_cfg = scheme(s, std::move(grid), path, cfg.clip_initial);
    const stepper::Trajectory coarse = stepper::run_trajectory(coarse_cfg);
    out.push_back(path_error(coarse, fine, *s.ops, s.params));
  }
  return out;
}

}  // namespace

PathError path_error(const stepper::Trajectory& coarse, const stepper::Trajectory& fine,
                     const fem::FemOperators& ops, const constitutive::GrowthParams& params) {
  require(!coarse.states.empty() && coarse.states.size() == coarse.grid.points.size(),
          ErrorKind::Input, "coarse trajectory is inconsistent with its grid");
  require(!fine.states.empty() && fine.states.size() == fine.grid.points.size(),
          ErrorKind::Input, "fine trajectory is inconsistent with its grid");
  const double scale = fine.grid.mean_step;
  PathError err;
  std::size_t f = 0;
  for (int m = 1; m <= coarse.grid.steps(); ++m) {
    const double t = coarse.grid.points[m];
    while (f < fine.grid.points.size() && fine.grid.points[f] < t &&
           !same_time(fine.grid.points[f], t, scale)) {
      ++f;
    }
    require(f < fine.grid.points.size() && same_time(fine.grid.points[f], t, scale),
            ErrorKind::Input,
            "grids are not nested: coarse time " + std::to_string(t) +
                " is not a fine grid point");
    const auto& uf = fine.states[f];
    const auto& uc = coarse.states[static_cast<std::size_t>(m)];
    err.max_l2_sq = std::max(err.max_l2_sq, fem::l2_error_sq(ops, uf, uc));
    err.quasi_sum += coarse.grid.step(m) * fem::quasinorm_error_sq(ops, uf, uc, params);
  }
  err.total = err.max_l2_sq + err.quasi_sum;
  return err;
}

std::vector<double> evaluated_taus(const cli::ExperimentConfig& cfg) {
  std::vector<double> taus = cfg.tau_ladder;
  taus.push_back(cfg.tau_ref);
  std::sort(taus.begin(), taus.end(), std::greater<>());
  std::vector<double> out;
  for (double t : taus) {
    if (out.empty() || !same_time(out.back(), t, cfg.tau_ref)) out.push_back(t);
  }
  return out;
}

McTable monte_carlo_estimate(const cli::ExperimentConfig& cfg, double p, unsigned workers) {
  cfg.validate();
  const Setup setup = make_setup(cfg, p);
  McTable table;
  table.p = p;
  table.taus = evaluated_taus(cfg);
  table.errors.assign(static_cast<std::size_t>(cfg.n_r), {});
  std::vector<std::string> failure(static_cast<std::size_t>(cfg.n_r));

  parallel_for(static_cast<std::size_t>(cfg.n_r), workers, [&](std::size_t r) {
    try {
      table.errors[r] = run_replicate(cfg, setup, table.taus, static_cast<int>(r));
    } catch (const std::exception& e) {
      table.errors[r].clear();
      failure[r] = "p=" + cli::format_double(p) + " replicate " + std::to_string(r) + ": " +
                   e.what();
    }
  });
  for (auto& f : failure) {
    if (!f.empty()) table.failures.push_back(std::move(f));
  }

  for (std::size_t i = 0; i < table.taus.size(); ++i) {
    std::vector<double> values;
    for (const auto& row : table.errors) {
      if (!row.empty()) values.push_back(row[i].total);
    }
    table.mean.push_back(values.empty() ? kNaN : mean_of(values));
    table.stddev.push_back(values.empty() ? kNaN : sample_std(values));
  }
  return table;
}

FitResult fit_rate(const std::vector<double>& taus, const std::vector<double>& values) {
  require(taus.size() == values.size(), ErrorKind::Input, "fit_rate: length mismatch");
  require(taus.size() >= 2, ErrorKind::Input, "fit_rate: needs at least two points");
  const auto n = static_cast<double>(taus.size());
  std::vector<double> x, y;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    require(taus[i] > 0.0 && std::isfinite(taus[i]), ErrorKind::Input,
            "fit_rate: step sizes must be positive");
    require(values[i] > 0.0 && std::isfinite(values[i]), ErrorKind::Input,
            "fit_rate: nonpositive value " + std::to_string(values[i]) + " at tau " +
                std::to_string(taus[i]));
    x.push_back(std::log(taus[i]));
    y.push_back(std::log(values[i]));
  }
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::Input, "fit_rate: needs two distinct step sizes");
  FitResult fit;
  fit.a = sxy / sxx;
  fit.log_c = my - fit.a * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.log_c - fit.a * x[i];
      ssr += r * r;
    }
    fit.stderr_slope = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

double bias(double tau, double tau_ref, double a) {
  require(tau_ref > 0.0 && tau_ref < tau, ErrorKind::Input,
          "bias needs 0 < tau_ref < tau (unbounded as tau -> tau_ref)");
  require(a > 0.0 && a <= 2.0, ErrorKind::Input, "bias needs 0 < a <= 2");
  const double ta = std::pow(tau, a);
  return ta / (ta - std::pow(tau_ref, a));
}

double mean_bias(const std::vector<double>& taus, double tau_ref, double a) {
  require(!taus.empty(), ErrorKind::Input, "mean_bias: no steps");
  double s = 0.0;
  for (double t : taus) s += bias(t, tau_ref, a);
  return s / static_cast<double>(taus.size());
}

Correction corrected_rate(double a_tilde, const std::vector<double>& taus, double tau_ref) {
  require(a_tilde > 0.0 && std::isfinite(a_tilde), ErrorKind::Input,
          "corrected_rate: biased slope must be > 0");
  double lo = 1e-6, hi = 2.0;
  const auto h = [&](double a) { return a * mean_bias(taus, tau_ref, a); };

  // a -> a * beta_mu(a) is increasing; verify on the bracket before bisecting.
  double prev = h(lo);
  for (int i = 1; i <= 200; ++i) {
    const double a = lo + (hi - lo) * i / 200.0;
    const double v = h(a);
    require(v > prev, ErrorKind::Input,
            "corrected_rate: a * beta_mu(a) not increasing near a = " + std::to_string(a));
    prev = v;
  }
  const double h_lo = h(lo), h_hi = h(hi);
  require(h_lo < a_tilde && a_tilde <= h_hi, ErrorKind::Input,
          "corrected_rate: no root for a_tilde = " + std::to_string(a_tilde) +
              "; a * beta_mu(a) spans [" + std::to_string(h_lo) + ", " +
              std::to_string(h_hi) + "] on a in [1e-6, 2]");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < a_tilde ? lo : hi) = mid;
  }
  Correction c;
  c.a = 0.5 * (lo + hi);
  c.alpha = 0.5 * c.a;
  c.above_one = c.a > 1.0;
  return c;
}

std::vector<ResultRow> to_rows(const McTable& table) {
  std::vector<ResultRow> rows;
  for (std::size_t r = 0; r < table.errors.size(); ++r) {
    if (table.errors[r].empty()) continue;
    for (std::size_t i = 0; i < table.taus.size(); ++i) {
      const auto& e = table.errors[r][i];
      rows.push_back({table.p, table.taus[i], static_cast<int>(r), e.total, e.max_l2_sq,
                      e.quasi_sum});
    }
  }
  return rows;
}

std::vector<RateEstimate> aggregate(const std::vector<ResultRow>& rows, double fit_tau_max) {
  std::map<double, std::vector<const ResultRow*>> by_p;
  for (const auto& row : rows) by_p[row.p].push_back(&row);

  std::vector<RateEstimate> out;
  for (const auto& [p, prow] : by_p) {
    RateEstimate est;
    est.p = p;
    std::set<double, std::greater<>> tau_set;
    std::map<int, std::map<double, double>> by_rep;
    for (const auto* r : prow) {
      tau_set.insert(r->tau);
      by_rep[r->replicate][r->tau] = r->e_total;
    }
    est.taus.assign(tau_set.begin(), tau_set.end());
    est.tau_ref = est.taus.back();
    est.replicates = static_cast<int>(by_rep.size());
    for (double t : est.taus) {
      if (t > est.tau_ref && t <= fit_tau_max * (1.0 + 1e-12)) est.fit_taus.push_back(t);
    }
    for (double t : est.taus) {
      std::vector<double> v;
      for (const auto& [rep, m] : by_rep) {
        if (auto it = m.find(t); it != m.end()) v.push_back(it->second);
      }
      est.mean.push_back(mean_of(v));
      est.stddev.push_back(sample_std(v));
    }

    for (const auto& [rep, m] : by_rep) {
      std::vector<double> xs, ys;
      for (double t : est.fit_taus) {
        const auto it = m.find(t);
        if (it == m.end()) continue;
        if (!(it->second > 0.0)) {
          est.warnings.push_back("replicate " + std::to_string(rep) + ": nonpositive error at tau " +
                                 cli::format_double(t) + " excluded from regression");
          continue;
        }
        xs.push_back(t);
        ys.push_back(it->second);
      }
      if (xs.size() < 2) {
        est.warnings.push_back("replicate " + std::to_string(rep) +
                               ": fewer than two usable points, no slope");
        continue;
      }
      est.slope_replicates.push_back(rep);
      est.replicate_slopes.push_back(fit_rate(xs, ys).a);
    }

    est.a_biased = kNaN;
    est.a_corrected = est.a_lo = est.a_hi = est.alpha = est.alpha_std = kNaN;
    est.mean_curve = {kNaN, kNaN, kNaN};
    est.mean_curve_a_corrected = kNaN;
    if (est.replicate_slopes.empty()) {
      est.error = "no replicate produced a slope";
      out.push_back(std::move(est));
      continue;
    }
    est.a_biased = mean_of(est.replicate_slopes);
    est.stderr_biased = sample_std(est.replicate_slopes);

    {
      std::vector<double> xs, ys;
      for (std::size_t i = 0; i < est.taus.size(); ++i) {
        const double t = est.taus[i];
        if (t > est.tau_ref && t <= fit_tau_max * (1.0 + 1e-12) && est.mean[i] > 0.0) {
          xs.push_back(t);
          ys.push_back(est.mean[i]);
        }
      }
      if (xs.size() >= 2) est.mean_curve = fit_rate(xs, ys);
    }

    try {
      const Correction c = corrected_rate(est.a_biased, est.fit_taus, est.tau_ref);
      est.a_corrected = c.a;
      est.alpha = c.alpha;
      if (c.above_one) {
        est.warnings.push_back("corrected rate a = " + cli::format_double(c.a) +
                               " exceeds 1, outside the range of the bias model");
      }
    } catch (const Error& e) {
      est.error = e.what();
    }
    try {
      est.a_lo = corrected_rate(est.a_biased - est.stderr_biased, est.fit_taus, est.tau_ref).a;
      est.a_hi = corrected_rate(est.a_biased + est.stderr_biased, est.fit_taus, est.tau_ref).a;
      est.alpha_std = 0.25 * (est.a_hi - est.a_lo);
    } catch (const Error& e) {
      est.warnings.push_back(std::string("spread of corrected rate unavailable: ") + e.what());
    }
    if (std::isfinite(est.mean_curve.a)) {
      try {
        est.mean_curve_a_corrected =
            corrected_rate(est.mean_curve.a, est.fit_taus, est.tau_ref).a;
      } catch (const Error& e) {
        est.warnings.push_back(std::string("mean-curve correction failed: ") + e.what());
      }
    }
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace splap::analysis
