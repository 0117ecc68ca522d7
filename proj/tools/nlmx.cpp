// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0
//
// nlmx: command-line front end. Subcommands:
//   decompose  Helmholtz-split a field file into divergence-free and
//              gradient parts
//   resolvent  apply the limiting-absorption resolvent (periodic) or
//              the three-case cavity solve
//   solve      ground-state search, or a bound-state sector sweep
//   verify     run the structural check battery and write the report
//   info       print the spectrum / spectral classification of lambda

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "nlmax/field_io.hpp"
#include "nlmax/primal.hpp"
#include "nlmax/solver.hpp"
#include "nlmax/suite.hpp"

namespace {

using namespace nlmax;
using nlohmann::json;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string mode_override;
  std::string case_override;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

RunConfig load_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = RunConfig::parse_file(args.config_path);
  if (!args.mode_override.empty())
    cfg.mode = grid_mode_from_string(args.mode_override);
  if (!args.case_override.empty()) cfg.case_name = args.case_override;
  if (args.seed_set) cfg.seed = args.seed;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Config file (ini or json)");
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seed", args.seed, "RNG seed override")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--mode", args.mode_override, "periodic|cavity");
  cmd->add_option("--case", args.case_override, "I|II|III|fullspace|auto");
}

std::unique_ptr<DualProblem> make_problem(const RunConfig& cfg,
                                          std::unique_ptr<CavitySystem>& keep) {
  if (cfg.mode == GridMode::periodic) {
    if (cfg.case_name != "auto" && cfg.case_name != "fullspace")
      throw ConfigError("periodic mode only supports case fullspace");
    return std::make_unique<FullspaceDualProblem>(
        cfg.grid(), cfg.nonlinearity(), cfg.medium().lambda());
  }
  keep = std::make_unique<CavitySystem>(
      CavitySystem::build(cfg.grid(), cfg.bc, cfg.medium()));
  const DualMode classified =
      CavityDualProblem::classify(*keep, cfg.omega_sq);
  DualMode mode = classified;
  if (cfg.case_name != "auto") mode = dual_mode_from_string(cfg.case_name);
  return std::make_unique<CavityDualProblem>(*keep, cfg.nonlinearity(),
                                             cfg.omega_sq, mode);
}

int cmd_decompose(const CommonArgs& args, const std::string& input) {
  const RunConfig cfg = load_config(args);
  const VectorField f = read_field(input);
  if (f.grid().mode == GridMode::periodic) {
    auto [e1, e2] = helmholtz_project(fft(f));
    write_field(ifft(e1), cfg.out_dir + "/divfree.f64");
    write_field(ifft(e2), cfg.out_dir + "/gradient.f64");
  } else {
    const Medium med = cfg.medium();
    const CavitySystem sys = CavitySystem::build(f.grid(), cfg.bc, med);
    // Edge shadow of the cell field, then the weighted Hodge split.
    VectorField ef(f.grid());
    for (std::size_t i = 0; i < f.grid().num_points(); ++i)
      ef.set(i, med.eps_at(i) * f.at(i));
    const VecXd pw = sys.solve_M(f.grid().cell_volume() * sys.cell_load(ef));
    const HodgeSplit hs = sys.hodge_project(pw);
    write_field(sys.edges_to_cells(hs.f_X), cfg.out_dir + "/divfree.f64");
    write_field(sys.edges_to_cells(hs.f_Y), cfg.out_dir + "/gradient.f64");
  }
  std::cout << "decompose: wrote divfree.f64 and gradient.f64 to "
            << cfg.out_dir << "\n";
  return 0;
}

int cmd_resolvent(const CommonArgs& args, const std::string& input,
                  double eps_reg) {
  const RunConfig cfg = load_config(args);
  const VectorField g = read_field(input);
  if (g.grid().mode == GridMode::periodic) {
    const double lambda = cfg.medium().lambda();
    const SpectralField ghat = project_divfree(fft(g));
    const VectorField out =
        ifft(resolvent_R(ghat, lambda, eps_reg, 1e-6 * lambda));
    write_field(out, cfg.out_dir + "/resolvent.f64");
    std::cout << "resolvent: lambda = " << lambda << ", wrote resolvent.f64\n";
    return 0;
  }
  const CavitySystem sys = CavitySystem::build(g.grid(), cfg.bc, cfg.medium());
  Eigen::Map<const VecXd> flat(g.data(), static_cast<Eigen::Index>(g.size()));
  const VecXd load = sys.solve_M(g.grid().cell_volume() * sys.cell_load(g));
  try {
    const auto res = sys.linear_solve(load, cfg.omega_sq);
    write_field(sys.edges_to_cells(res.E), cfg.out_dir + "/resolvent.f64");
    std::cout << "resolvent: Fredholm case " << res.fredholm_case
              << ", kernel dim " << res.kernel_dim << "\n";
  } catch (const InfeasibleError& e) {
    json j;
    j["infeasible"] = true;
    j["violated_pairings"] = e.violated_pairings;
    j["what"] = e.what();
    std::ofstream(cfg.out_dir + "/resolvent_infeasible.json") << j.dump(2);
    std::cout << "resolvent: certified infeasibility, "
              << e.violated_pairings.size() << " violated pairing(s)\n";
  }
  return 0;
}

int cmd_solve(const CommonArgs& args, bool bound_sweep) {
  const RunConfig cfg = load_config(args);
  std::unique_ptr<CavitySystem> keep;
  auto prob = make_problem(cfg, keep);
  std::mt19937_64 rng(cfg.seed);

  FlowOptions opt;
  opt.grad_tol = cfg.grad_tol;
  opt.max_iters = cfg.max_iters;
  opt.record_trajectory = cfg.write_trajectory;

  if (bound_sweep) {
    SectorSpec sector;
    sector.m = cfg.sector_m;
    sector.dedup_energy = cfg.dedup_energy;
    sector.dedup_distance = cfg.dedup_distance;
    auto states = bound_state_search(*prob, sector, opt, rng);
    json j = json::array();
    for (std::size_t i = 0; i < states.size(); ++i) {
      j.push_back(json::parse(states[i].report.to_json()));
      write_field(states[i].P,
                  cfg.out_dir + "/bound_state_" + std::to_string(i) + ".f64");
    }
    std::ofstream(cfg.out_dir + "/bound_states.json") << j.dump(2);
    std::cout << "solve --bound: " << states.size()
              << " deduplicated critical point(s)\n";
    if (states.empty()) return 3;
    return 0;
  }

  VectorField init = random_state(*prob, rng);
  if (const auto* cav = dynamic_cast<const CavityDualProblem*>(prob.get())) {
    const VecXd& lam = cav->system().eigenvalues();
    for (Eigen::Index k = 0; k < lam.size(); ++k)
      if (lam(k) > cfg.omega_sq) {
        init = cav->eigenmode_seed(static_cast<int>(k));
        break;
      }
  } else {
    init = static_cast<const FullspaceDualProblem*>(prob.get())->shell_seed(1);
  }
  FlowOptions gopt = opt;
  auto gs = ground_state_search(*prob, init, gopt, rng, cfg.restarts);
  std::ofstream(cfg.out_dir + "/solve_report.json") << gs.report.to_json();
  write_field(gs.P, cfg.out_dir + "/ground_state_P.f64");
  const auto rec = prob->to_primal(gs.P);
  write_field(rec.E_formula, cfg.out_dir + "/ground_state_E.f64");
  if (cfg.write_trajectory) {
    FlowResult fr = pseudo_gradient_flow(*prob, init, opt);
    write_trajectory_csv(fr.trajectory, cfg.out_dir + "/trajectory.csv");
  }
  std::cout << "solve: J = " << gs.report.final_J
            << ", rel grad = " << gs.report.final_rel_grad
            << ", dual-primal agreement = " << gs.report.dual_primal_residual
            << "\n";
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const VerificationReport rep = run_suite(cfg);
  for (const auto& c : rep.checks)
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name
              << "  measured=" << c.measured << " tol=" << c.tolerance
              << (c.note.empty() ? "" : "  (" + c.note + ")") << "\n";
  std::ofstream(cfg.out_dir + "/verify_report.json") << rep.to_json().dump(2);
  std::cout << (rep.all_pass ? "all checks passed" : "CHECK FAILURES") << "\n";
  return rep.all_pass ? 0 : 1;
}

int cmd_info(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  if (cfg.mode == GridMode::periodic) {
    const double lambda = cfg.medium().lambda();
    const double gap = symbol_gap(cfg.grid(), lambda);
    std::cout << "periodic box, n = " << cfg.n << ", L = " << cfg.cell_length
              << "\nlambda = " << lambda << ", symbol gap = " << gap
              << (gap < 1e-6 * lambda ? "  (RESONANT)" : "  (off-resonance)")
              << "\n";
    return 0;
  }
  const CavitySystem sys =
      CavitySystem::build(cfg.grid(), cfg.bc, cfg.medium());
  std::cout << sys.summary_json() << "\n";
  const DualMode mode = CavityDualProblem::classify(sys, cfg.omega_sq);
  std::cout << "omega_sq = " << cfg.omega_sq << " classified as "
            << to_string(mode);
  const auto eig = sys.eig_index(cfg.omega_sq);
  if (!eig.empty()) std::cout << " (cluster multiplicity " << eig.dimension() << ")";
  std::cout << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual variational solver for time-harmonic nonlinear Maxwell "
               "problems on periodic boxes and box cavities"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string input;
  double eps_reg = 0.0;
  bool bound_sweep = false;

  auto* dec = app.add_subcommand("decompose", "Helmholtz-split a field file");
  add_common(dec, args);
  dec->add_option("input", input, "Field file")->required();

  auto* rsv = app.add_subcommand("resolvent",
                                 "Apply R (periodic) or (L-lambda)^-1 (cavity)");
  add_common(rsv, args);
  rsv->add_option("input", input, "Field file")->required();
  rsv->add_option("--eps-reg", eps_reg, "Regularization of the multiplier");

  auto* slv = app.add_subcommand("solve", "Ground/bound state search");
  add_common(slv, args);
  slv->add_flag("--bound", bound_sweep, "Run the sector sweep instead");

  auto* ver = app.add_subcommand("verify", "Run the check battery");
  add_common(ver, args);

  auto* inf = app.add_subcommand("info", "Spectrum / classification");
  add_common(inf, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (dec->parsed()) return cmd_decompose(args, input);
    if (rsv->parsed()) return cmd_resolvent(args, input, eps_reg);
    if (slv->parsed()) return cmd_solve(args, bound_sweep);
    if (ver->parsed()) return cmd_verify(args);
    if (inf->parsed()) return cmd_info(args);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return 2;
  } catch (const ResonanceError& e) {
    std::cerr << "resonance error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
