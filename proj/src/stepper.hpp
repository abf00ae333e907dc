#pragma once

#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "fem.hpp"
#include "psolver.hpp"
#include "stochastics.hpp"

namespace splap::stepper {

struct SchemeConfig {
  std::shared_ptr<const fem::FemOperators> ops;
  constitutive::GrowthParams params;
  stochastics::TimeGrid grid;
  stochastics::NoiseCoefficient noise;
  std::shared_ptr<const stochastics::NoisePath> path;
  fem::FeFunction initial;
  psolver::SolverOptions solver;
  psolver::Formulation formulation = psolver::Formulation::Euclidean;
  /// Zero the boundary coefficients of the initial state as well.
  bool clip_initial = false;
};

struct StepRecord {
  psolver::SolveReport report;
  double kkt = 0.0;
};

struct Trajectory {
  stochastics::TimeGrid grid;
  /// One per grid point; states[0] is the initial datum.
  std::vector<fem::FeFunction> states;
  /// steps[m-1] belongs to the solve producing states[m].
  std::vector<StepRecord> steps;
};

/// Solver failure at a given step.
class StepError : public psolver::SolveError {
 public:
  StepError(int step, const psolver::SolveError& cause)
      : psolver::SolveError("step " + std::to_string(step) + ": " + cause.what(),
                            cause.report()),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Fine-path index of every grid point; throws ErrorKind::Input when a point
/// is not on the path grid or lies past its end.
std::vector<long> path_indices(const stochastics::TimeGrid& grid,
                               const stochastics::NoisePath& path);

Trajectory run_trajectory(const SchemeConfig& cfg);

/// Runs both configurations, which must share one noise path and one set of
/// operators, with the coarse grid contained in the fine one.
std::pair<Trajectory, Trajectory> run_nested_pair(const SchemeConfig& coarse,
                                                  const SchemeConfig& fine);

/// Binary state matrix: "SPLAPT1\0", uint64 rows (M+1), uint64 cols (nv),
/// then row-major little-endian doubles.
void write_states(const Trajectory& traj, std::ostream& out);

/// One JSON object per step.
void write_solve_log(const Trajectory& traj, std::ostream& out);

}  // namespace splap::stepper
