// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include "nlmax/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace nlmax {

std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::budget_exhausted: return "budget_exhausted";
    case FlowStatus::stagnated: return "stagnated";
    case FlowStatus::cone_exit: return "cone_exit";
    default: return "below_floor";
  }
}

namespace {

double rel_grad_of(const DualProblem& prob, const VectorField& Pt,
                   double grad_norm) {
  return grad_norm / std::max(prob.grad_scale(Pt), 1e-300);
}

FlowResult flow_fibered(const DualProblem& prob, const VectorField& P0,
                        const FlowOptions& opt) {
  FlowResult res;
  const double pp = prob.nonlin().p_conj();

  VectorField P = P0;
  double scale = lp_norm(P, pp);
  if (!(scale > 0.0)) throw ConfigError("pseudo_gradient_flow: zero start");
  P *= 1.0 / scale;

  double A = prob.fiber_A(P);
  double B = prob.fiber_B(P);
  if (!(A > 0.0) || !(B < 0.0)) {
    res.P = P;
    res.status = FlowStatus::cone_exit;
    return res;
  }

  double alpha = opt.step0;
  for (int it = 0; it < opt.max_iters; ++it) {
    const auto fs = prob.fiber_scale(A, B);
    const double t = fs.t_star;
    VectorField Pt = P;
    Pt *= t;
    const auto ev = prob.eval(Pt);
    const double relg = rel_grad_of(prob, Pt, ev.grad_norm);
    if (opt.record_trajectory)
      res.trajectory.push_back({it, fs.m_val, ev.grad_norm});
    if (relg <= opt.grad_tol) {
      res.P = Pt;
      res.J = ev.J;
      res.rel_grad = relg;
      res.t_star = t;
      res.iterations = it;
      res.status = FlowStatus::converged;
      return res;
    }

    // Envelope direction: dm(P)[d] = t <grad_J(tP), d>.
    const double gg = prob.inner(ev.grad, ev.grad);
    double step = std::min(opt.step0, 2.0 * alpha);
    bool accepted = false;
    while (step > 1e-14 * opt.step0) {
      VectorField trial = P;
      VectorField dir = ev.grad;
      dir *= -t * step;
      trial += dir;
      const double At = prob.fiber_A(trial);
      const double Bt = prob.fiber_B(trial);
      if (At > 0.0 && Bt < 0.0) {
        const double mt = prob.fiber_scale(At, Bt).m_val;
        if (mt <= fs.m_val - opt.armijo_c * step * t * t * gg) {
          const double ns = lp_norm(trial, pp);
          trial *= 1.0 / ns;
          P = std::move(trial);
          // A, B rescale exactly under normalization.
          A = At * std::pow(1.0 / ns, pp);
          B = Bt / (ns * ns);
          alpha = step;
          accepted = true;
          break;
        }
      }
      step *= opt.backtrack;
    }
    if (!accepted) {
      res.P = Pt;
      res.J = ev.J;
      res.rel_grad = relg;
      res.t_star = t;
      res.iterations = it;
      res.status = FlowStatus::stagnated;
      return res;
    }
  }

  const auto fs = prob.fiber_scale(A, B);
  VectorField Pt = P;
  Pt *= fs.t_star;
  const auto ev = prob.eval(Pt);
  res.P = Pt;
  res.J = ev.J;
  res.rel_grad = rel_grad_of(prob, Pt, ev.grad_norm);
  res.t_star = fs.t_star;
  res.iterations = opt.max_iters;
  res.status = FlowStatus::budget_exhausted;
  return res;
}

FlowResult flow_raw(const DualProblem& prob, const VectorField& P0,
                    const FlowOptions& opt) {
  FlowResult res;
  VectorField P = P0;
  if (!(prob.norm(P) > 0.0))
    throw ConfigError("pseudo_gradient_flow: degenerate start P = 0");

  double alpha = opt.step0;
  for (int it = 0; it < opt.max_iters; ++it) {
    const auto ev = prob.eval(P);
    const double relg = rel_grad_of(prob, P, ev.grad_norm);
    if (opt.record_trajectory)
      res.trajectory.push_back({it, ev.J, ev.grad_norm});
    res.P = P;
    res.J = ev.J;
    res.rel_grad = relg;
    res.iterations = it;
    if (relg <= opt.grad_tol) {
      res.status = FlowStatus::converged;
      return res;
    }
    if (ev.J < opt.j_floor) {
      res.status = FlowStatus::below_floor;
      return res;
    }

    const double gg = prob.inner(ev.grad, ev.grad);
    double step = std::min(opt.step0, 2.0 * alpha);
    bool accepted = false;
    while (step > 1e-14 * opt.step0) {
      VectorField trial = ev.grad;
      trial *= -step;
      trial += P;
      if (prob.J_eval(trial) <= ev.J - opt.armijo_c * step * gg) {
        P = std::move(trial);
        alpha = step;
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    if (!accepted) {
      res.status = FlowStatus::stagnated;
      return res;
    }
  }
  res.status = FlowStatus::budget_exhausted;
  return res;
}

}  // namespace

FlowResult pseudo_gradient_flow(const DualProblem& prob, const VectorField& P0,
                                const FlowOptions& opt) {
  return opt.fibered ? flow_fibered(prob, P0, opt) : flow_raw(prob, P0, opt);
}

VectorField random_state(const DualProblem& prob, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorField P(prob.grid());
  for (double& v : P.raw()) v = gauss(rng);
  P = prob.project_constraints(P);
  const double s = lp_norm(P, prob.nonlin().p_conj());
  if (s > 0.0) P *= 1.0 / s;
  return P;
}

std::string SolveReport::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["mode"] = mode;
  j["iterations"] = iterations;
  j["final_J"] = final_J;
  j["final_rel_grad"] = final_rel_grad;
  j["fiber_t_star"] = fiber_t_star;
  j["dual_primal_residual"] = dual_primal_residual;
  j["energies"] = energies;
  j["restarts"] = restarts;
  j["status"] = status;
  j["wall_time_s"] = wall_time_s;
  return j.dump(2);
}

namespace {

SolveReport make_report(const DualProblem& prob, const FlowResult& fr,
                        int restarts, double wall_s) {
  SolveReport rep;
  rep.mode = to_string(prob.mode());
  rep.iterations = fr.iterations;
  rep.final_J = fr.J;
  rep.final_rel_grad = fr.rel_grad;
  rep.restarts = restarts;
  rep.status = to_string(fr.status);
  rep.wall_time_s = wall_s;
  rep.energies = {fr.J};
  if (fr.status == FlowStatus::converged) {
    // Stationarity along the ray: the terminal state is its own Nehari
    // projection, so its fibering factor should sit at 1.
    rep.fiber_t_star = prob.fiber_scale(fr.P).t_star;
    rep.dual_primal_residual = prob.to_primal(fr.P).agreement;
  } else {
    rep.fiber_t_star = fr.t_star;
    rep.dual_primal_residual = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace

GroundStateResult ground_state_search(const DualProblem& prob,
                                      const VectorField& init,
                                      const FlowOptions& opt,
                                      std::mt19937_64& rng, int max_restarts) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(prob.norm(init) > 0.0))
    throw ConfigError(
        "ground_state_search: degenerate start P = 0 rejected (0 is always "
        "critical with J = 0)");

  FlowOptions fopt = opt;
  fopt.fibered = true;
  VectorField P0 = init;
  for (int attempt = 0; attempt <= max_restarts; ++attempt) {
    FlowResult fr = pseudo_gradient_flow(prob, P0, fopt);
    if (fr.status == FlowStatus::converged) {
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      GroundStateResult out{std::move(fr.P),
                            make_report(prob, fr, attempt, wall)};
      out.report.iterations = fr.iterations;
      return out;
    }
    if (fr.status == FlowStatus::budget_exhausted)
      throw ConvergenceError(
          "ground_state_search: iteration budget exhausted (rel grad " +
          std::to_string(fr.rel_grad) + ")");
    P0 = random_state(prob, rng);  // cone exit or stagnation: re-randomize
  }
  throw ConvergenceError(
      "ground_state_search: restart cap reached without convergence");
}

std::vector<GroundStateResult> bound_state_search(const DualProblem& prob,
                                                  const SectorSpec& sector,
                                                  const FlowOptions& opt,
                                                  std::mt19937_64& rng) {
  (void)rng;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<VectorField> seeds;
  if (const auto* cav = dynamic_cast<const CavityDualProblem*>(&prob)) {
    const VecXd& lam = cav->system().eigenvalues();
    const double w2 = cav->omega_sq();
    const double tol = cav->system().default_match_tol();
    double cluster_head = -1.0;
    for (Eigen::Index k = 0;
         k < lam.size() && static_cast<int>(seeds.size()) < sector.m; ++k) {
      if (lam(k) <= w2 + tol) continue;
      if (cluster_head > 0.0 && std::abs(lam(k) - cluster_head) <= tol)
        continue;  // same multiplet, one seed per cluster
      cluster_head = lam(k);
      seeds.push_back(cav->eigenmode_seed(static_cast<int>(k)));
    }
  } else if (const auto* full =
                 dynamic_cast<const FullspaceDualProblem*>(&prob)) {
    for (int j = 1; j <= sector.m; ++j) seeds.push_back(full->shell_seed(j));
  } else {
    throw ConfigError("bound_state_search: unknown dual problem backend");
  }
  if (static_cast<int>(seeds.size()) < sector.m)
    throw ConfigError("bound_state_search: fewer than m sectors available");

  FlowOptions fopt = opt;
  fopt.fibered = true;
  std::vector<GroundStateResult> found;
  for (const VectorField& seed : seeds) {
    FlowResult fr = pseudo_gradient_flow(prob, seed, fopt);
    if (fr.status != FlowStatus::converged) continue;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    found.push_back({std::move(fr.P), make_report(prob, fr, 0, wall)});
  }

  // Deduplicate: equal energy or small translation-minimized distance
  // marks the same critical point.
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) {
              return a.report.final_J < b.report.final_J;
            });
  std::vector<GroundStateResult> unique;
  for (auto& cand : found) {
    bool dup = false;
    for (const auto& kept : unique) {
      const double ja = cand.report.final_J, jb = kept.report.final_J;
      const double egap = std::abs(ja - jb) /
                          std::max({std::abs(ja), std::abs(jb), 1e-300});
      if (egap < sector.dedup_energy ||
          prob.state_distance(cand.P, kept.P) < sector.dedup_distance) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(std::move(cand));
  }
  std::vector<double> energies;
  for (const auto& u : unique) energies.push_back(u.report.final_J);
  for (auto& u : unique) u.report.energies = energies;
  return unique;
}

void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_trajectory_csv: cannot open " + path);
  out << "step,J,grad_norm\n";
  for (const auto& p : traj)
    out << p.step << "," << p.J << "," << p.grad_norm << "\n";
}

}  // namespace nlmax
