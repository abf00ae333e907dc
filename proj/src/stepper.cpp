#include "stepper.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <json.hpp>
#include <ostream>
#include <string>

namespace splap::stepper {

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void check_nested(const std::vector<long>& coarse, const std::vector<long>& fine) {
  std::size_t f = 0;
  for (long k : coarse) {
    while (f < fine.size() && fine[f] < k) ++f;
    require(f < fine.size() && fine[f] == k, ErrorKind::Input,
            "grids are not nested: coarse point at fine index " + std::to_string(k) +
                " is missing from the fine grid");
  }
}

}  // namespace

std::vector<long> path_indices(const stochastics::TimeGrid& grid,
                               const stochastics::NoisePath& path) {
  std::vector<long> idx;
  idx.reserve(grid.points.size());
  for (double t : grid.points) {
    const long k = stochastics::fine_index(t, path.finest_step());
    require(k <= path.n_fine(), ErrorKind::Input,
            "grid point " + std::to_string(t) + " lies past the end of the noise path");
    idx.push_back(k);
  }
  return idx;
}

Trajectory run_trajectory(const SchemeConfig& cfg) {
  require(cfg.ops && cfg.path, ErrorKind::Input, "scheme config without operators or path");
  const auto& ops = *cfg.ops;
  cfg.params.validate();
  cfg.grid.validate();
  require(cfg.initial.coeffs.size() == ops.num_vertices(), ErrorKind::Input,
          "initial datum length mismatch");
  require(cfg.noise.components() == cfg.path->components(), ErrorKind::Input,
          "noise coefficient and path disagree on the number of components");
  const std::vector<long> idx = path_indices(cfg.grid, *cfg.path);

  Trajectory traj;
  traj.grid = cfg.grid;
  const int M = cfg.grid.steps();
  traj.states.reserve(static_cast<std::size_t>(M) + 1);
  traj.steps.reserve(static_cast<std::size_t>(M));

  fem::FeFunction u0 = cfg.initial;
  if (cfg.clip_initial) u0.coeffs = ops.prolong(ops.restrict_interior(u0.coeffs));
  traj.states.push_back(std::move(u0));

  for (int m = 1; m <= M; ++m) {
    const fem::FeFunction& prev = traj.states.back();
    const Eigen::VectorXd dW = cfg.path->increment(idx[m - 1], idx[m]);
    psolver::StepProblem prob(ops, cfg.params, cfg.grid.step(m),
                              stochastics::noise_load(ops, cfg.noise, prev, dW),
                              cfg.formulation);
    psolver::StepSolution sol;
    try {
      sol = psolver::solve_step(prob, ops.restrict_interior(prev.coeffs), cfg.solver);
    } catch (const psolver::SolveError& e) {
      throw StepError(m, e);
    }
    StepRecord rec{std::move(sol.report), psolver::kkt_residual(prob, sol.u_interior)};
    traj.states.push_back(fem::FeFunction{ops.prolong(sol.u_interior)});
    traj.steps.push_back(std::move(rec));
  }
  return traj;
}

std::pair<Trajectory, Trajectory> run_nested_pair(const SchemeConfig& coarse,
                                                  const SchemeConfig& fine) {
  require(coarse.path && fine.path, ErrorKind::Input, "nested pair without noise path");
  require(coarse.path == fine.path, ErrorKind::Input,
          "nested pair must share one noise path");
  require(coarse.ops == fine.ops, ErrorKind::Input, "nested pair must share operators");
  check_nested(path_indices(coarse.grid, *coarse.path),
               path_indices(fine.grid, *fine.path));
  if (coarse.grid.kind == stochastics::GridKind::Deterministic &&
      fine.grid.kind == stochastics::GridKind::Deterministic) {
    const double ratio = coarse.grid.mean_step / fine.grid.mean_step;
    require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio && ratio >= 1.0 - 1e-9,
            ErrorKind::Input, "coarse step is not an integer multiple of the fine step");
  }
  return {run_trajectory(coarse), run_trajectory(fine)};
}

void write_states(const Trajectory& traj, std::ostream& out) {
  const std::uint64_t rows = traj.states.size();
  const std::uint64_t cols = rows ? static_cast<std::uint64_t>(traj.states[0].coeffs.size()) : 0;
  out.write("SPLAPT1\0", 8);
  write_u64(out, rows);
  write_u64(out, cols);
  for (const auto& s : traj.states) {
    for (Eigen::Index k = 0; k < s.coeffs.size(); ++k) {
      write_u64(out, std::bit_cast<std::uint64_t>(s.coeffs[k]));
    }
  }
}

void write_solve_log(const Trajectory& traj, std::ostream& out) {
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const auto& s = traj.steps[i];
    const int m = static_cast<int>(i) + 1;
    nlohmann::json j{
        {"step", m},
        {"t", traj.grid.points[m]},
        {"tau", traj.grid.step(m)},
        {"iterations", s.report.iterations},
        {"polish_steps", s.report.polish_steps},
        {"final_grad_norm", s.report.final_grad_norm},
        {"target_grad_norm", s.report.target_grad_norm},
        {"kkt_residual", s.kkt},
        {"continuation_levels", s.report.continuation_levels},
        {"objective_trace", s.report.objective_trace},
    };
    out << j.dump() << '\n';
  }
}

}  // namespace splap::stepper
