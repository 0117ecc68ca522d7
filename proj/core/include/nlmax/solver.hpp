// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_SOLVER_HPP
#define NLMAX_SOLVER_HPP

#include <random>
#include <string>
#include <vector>

#include "nlmax/dual.hpp"

namespace nlmax {

struct FlowOptions {
  double grad_tol = 1e-6;   // relative to the |P|_p'^(p'-1) scale
  int max_iters = 10000;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double step0 = 1.0;
  double j_floor = -1e12;   // raw-mode stop when J drops below
  bool fibered = true;      // descend the fibered envelope m(P) = J(t* P)
  bool record_trajectory = false;
};

struct TrajectoryPoint {
  int step;
  double J;
  double grad_norm;
};

enum class FlowStatus {
  converged,
  budget_exhausted,
  stagnated,       // Armijo step-size underflow
  cone_exit,       // left the B < 0 cone (fibered mode)
  below_floor      // raw mode only
};

std::string to_string(FlowStatus s);

struct FlowResult {
  VectorField P;            // terminal state (Nehari-scaled in fibered mode)
  double J = 0;
  double rel_grad = 0;
  double t_star = 0;        // fibering factor of the terminal direction
  int iterations = 0;
  FlowStatus status = FlowStatus::budget_exhausted;
  std::vector<TrajectoryPoint> trajectory;
};

/// Discrete pseudo-gradient descent flow dP/dt = -grad with explicit
/// Armijo-controlled steps. In fibered mode the objective is the
/// envelope m(P) = J(t*(P) P) and the step direction is the envelope
/// gradient t* grad_J(t* P); the recorded J-trace decreases strictly
/// on every accepted step. Starting at a critical point returns
/// immediately with zero steps.
FlowResult pseudo_gradient_flow(const DualProblem& prob, const VectorField& P0,
                                const FlowOptions& opt);

struct SolveReport {
  std::string mode;
  int iterations = 0;
  double final_J = 0;
  double final_rel_grad = 0;
  double fiber_t_star = 0;
  double dual_primal_residual = 0;
  std::vector<double> energies;  // all critical levels found by the run
  double wall_time_s = 0;
  int restarts = 0;
  std::string status;
  std::string to_json() const;
};

struct GroundStateResult {
  VectorField P;
  SolveReport report;
};

/// Fibered descent from `init` with re-randomized restarts on cone
/// exit or stagnation. Throws ConfigError on a zero init (0 is always
/// critical with J = 0) and ConvergenceError when every restart fails.
GroundStateResult ground_state_search(const DualProblem& prob,
                                      const VectorField& init,
                                      const FlowOptions& opt,
                                      std::mt19937_64& rng,
                                      int max_restarts = 3);

struct SectorSpec {
  int m = 3;                    // number of sectors
  double dedup_energy = 1e-4;   // relative energy gap treated as equal
  double dedup_distance = 1e-3; // relative state distance treated as equal
};

/// Sector-restricted bound-state sweep: seeds from m distinct
/// eigenvalue clusters above omega^2 (cavity) or m spectral shells
/// above lambda (fullspace), each relaxed by the fibered flow, then
/// deduplicated by energy gap or translation-minimized distance.
/// Unconverged sectors are dropped and noted in their reports.
std::vector<GroundStateResult> bound_state_search(const DualProblem& prob,
                                                  const SectorSpec& sector,
                                                  const FlowOptions& opt,
                                                  std::mt19937_64& rng);

/// Random dual-space field with N(0,1) entries, constraint-projected
/// and p'-normalized; used for restarts and multi-start agreement runs.
VectorField random_state(const DualProblem& prob, std::mt19937_64& rng);

void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj,
                          const std::string& path);

}  // namespace nlmax

#endif  // NLMAX_SOLVER_HPP
