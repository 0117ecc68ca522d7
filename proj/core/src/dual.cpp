// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include "nlmax/dual.hpp"

#include <Eigen/QR>
#include <cmath>

namespace nlmax {

std::string to_string(DualMode m) {
  switch (m) {
    case DualMode::cavity_I: return "cavity_I";
    case DualMode::cavity_II: return "cavity_II";
    case DualMode::cavity_III: return "cavity_III";
    default: return "fullspace";
  }
}

DualMode dual_mode_from_string(const std::string& s) {
  if (s == "cavity_I" || s == "I") return DualMode::cavity_I;
  if (s == "cavity_II" || s == "II") return DualMode::cavity_II;
  if (s == "cavity_III" || s == "III") return DualMode::cavity_III;
  if (s == "fullspace") return DualMode::fullspace;
  throw ConfigError("unknown dual mode: " + s);
}

// --- shared functional machinery -----------------------------------------

double DualProblem::inner(const VectorField& a, const VectorField& b) const {
  require_same_grid(a.grid(), grid_, "DualProblem::inner");
  require_same_grid(b.grid(), grid_, "DualProblem::inner");
  const double dv = grid_.cell_volume();
  double acc = 0.0;
  for (std::size_t i = 0; i < grid_.num_points(); ++i)
    acc += (eps_cell(i) * a.at(i)).dot(b.at(i));
  return acc * dv;
}

double DualProblem::fiber_A(const VectorField& P) const {
  require_same_grid(P.grid(), grid_, "fiber_A");
  const double dv = grid_.cell_volume();
  double acc = 0.0;
  for (int ix = 0; ix < grid_.n; ++ix)
    for (int iy = 0; iy < grid_.n; ++iy)
      for (int iz = 0; iz < grid_.n; ++iz) {
        const std::size_t i = grid_.point_index(ix, iy, iz);
        const Vec3 x(grid_.point(ix, iy, iz).data());
        acc += nl_.eval_Psi(x, eps_cell(i) * P.at(i));
      }
  return acc * dv;
}

double DualProblem::fiber_B(const VectorField& P) const {
  return quad(P, false).B;
}

double DualProblem::J_eval(const VectorField& P) const {
  return fiber_A(P) + fiber_B(P);
}

DualProblem::Eval DualProblem::eval(const VectorField& P) const {
  require_same_grid(P.grid(), grid_, "DualProblem::eval");
  Eval out;
  QuadEval q = quad(P, true);
  out.B = q.B;

  const double dv = grid_.cell_volume();
  VectorField raw(grid_);
  double acc = 0.0;
  for (int ix = 0; ix < grid_.n; ++ix)
    for (int iy = 0; iy < grid_.n; ++iy)
      for (int iz = 0; iz < grid_.n; ++iz) {
        const std::size_t i = grid_.point_index(ix, iy, iz);
        const Vec3 x(grid_.point(ix, iy, iz).data());
        const Vec3 ep = eps_cell(i) * P.at(i);
        acc += nl_.eval_Psi(x, ep);
        raw.set(i, nl_.eval_psi(x, ep) - q.formula.at(i));
      }
  out.A = acc * dv;
  out.J = out.A + out.B;
  out.grad = project_constraints(raw);
  out.grad_norm = norm(out.grad);
  return out;
}

VectorField DualProblem::grad_J(const VectorField& P) const {
  return eval(P).grad;
}

DualProblem::FiberScale DualProblem::fiber_scale(double A, double B) const {
  if (nl_.kind() != NonlinKind::power)
    throw ConfigError("fiber_scale: closed-form fibering needs the power kind");
  if (!(A > 0.0))
    throw ConeError("fiber_scale: zero direction (A = 0)");
  if (!(B < 0.0))
    throw ConeError("fiber_scale: direction outside the mountain-pass cone");
  const double pp = nl_.p_conj();
  FiberScale fs;
  fs.t_star = std::pow(pp * A / (-2.0 * B), 1.0 / (2.0 - pp));
  fs.m_val = std::pow(fs.t_star, pp) * A + fs.t_star * fs.t_star * B;
  return fs;
}

DualProblem::FiberScale DualProblem::fiber_scale(const VectorField& P) const {
  return fiber_scale(fiber_A(P), fiber_B(P));
}

double DualProblem::z_norm(const VectorField& P) const {
  return lp_norm(P, nl_.p_conj()) + std::sqrt(std::max(0.0, p2_sq_norm(P)));
}

double DualProblem::grad_scale(const VectorField& P) const {
  return std::pow(lp_norm(P, nl_.p_conj()), nl_.p_conj() - 1.0);
}

VectorField DualProblem::project_constraints(const VectorField& w) const {
  return w;
}

double DualProblem::state_distance(const VectorField& a,
                                   const VectorField& b) const {
  VectorField d = a;
  d -= b;
  const double scale = std::max({z_norm(a), z_norm(b), 1e-300});
  return lp_norm(d, nl_.p_conj()) / scale;
}

// --- cavity cases ---------------------------------------------------------

DualMode CavityDualProblem::classify(const CavitySystem& sys, double omega_sq,
                                     double match_tol) {
  if (omega_sq == 0.0) return DualMode::cavity_III;
  return sys.eig_index(omega_sq, match_tol).empty() ? DualMode::cavity_I
                                                    : DualMode::cavity_II;
}

CavityDualProblem::CavityDualProblem(const CavitySystem& sys, Nonlinearity nl,
                                     double omega_sq, DualMode mode,
                                     double match_tol)
    : DualProblem(mode, sys.grid(), std::move(nl)),
      sys_(sys),
      omega_sq_(omega_sq) {
  if (mode == DualMode::fullspace)
    throw ConfigError("CavityDualProblem: fullspace mode is not a cavity case");
  const DualMode expected = classify(sys, omega_sq, match_tol);
  if (expected != mode)
    throw ConfigError("CavityDualProblem: mode " + to_string(mode) +
                      " does not match the spectral classification " +
                      to_string(expected));

  if (mode == DualMode::cavity_II) {
    kernel_ = sys.eig_index(omega_sq, match_tol);
    // eps-c-orthonormal basis of the kernel pullbacks Q phi_k.
    const int dim = kernel_.dimension();
    kernel_cells_.resize(3 * grid_.num_points(), dim);
    std::vector<VectorField> cells;
    for (int k : kernel_.indices)
      cells.push_back(sys_.edges_to_cells(sys_.X_basis().col(k)));
    MatXd gram(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) gram(i, j) = inner(cells[i], cells[j]);
    Eigen::LLT<MatXd> llt(gram);
    if (llt.info() != Eigen::Success)
      throw ConvergenceError("cavity_II: degenerate kernel pullbacks");
    MatXd raw(3 * grid_.num_points(), dim);
    for (int i = 0; i < dim; ++i)
      raw.col(i) = Eigen::Map<const VecXd>(cells[i].data(),
                                           raw.rows());
    kernel_cells_ = llt.matrixL().solve(raw.transpose()).transpose();
  }

  if (mode == DualMode::cavity_III) {
    if (sys.medium().has_cell_media() || sys.medium().eps0 != 1.0)
      throw ConfigError(
          "cavity_III: the static case normalizes the permittivity to the "
          "identity; build the system with eps = I");
    QG_ = sys_.Q() * sys_.G();
    SpMat gram = SpMat(QG_.transpose()) * QG_;
    y_gram_augmented_ = (sys_.bc() == CavityBC::neumann);
    if (y_gram_augmented_) {
      std::vector<Eigen::Triplet<double>> t;
      for (int o = 0; o < gram.outerSize(); ++o)
        for (SpMat::InnerIterator it(gram, o); it; ++it)
          t.emplace_back(it.row(), it.col(), it.value());
      for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        t.emplace_back(gram.rows(), i, 1.0);
        t.emplace_back(i, gram.rows(), 1.0);
      }
      SpMat aug(gram.rows() + 1, gram.cols() + 1);
      aug.setFromTriplets(t.begin(), t.end());
      y_gram_.compute(aug);
    } else {
      y_gram_.compute(gram);
    }
    if (y_gram_.info() != Eigen::Success)
      throw ConvergenceError("cavity_III: Y-pullback Gram factorization failed");
  }
}

Mat3 CavityDualProblem::eps_cell(std::size_t cell) const {
  return sys_.medium().eps_at(cell);
}

VectorField CavityDualProblem::apply_eps(const VectorField& P) const {
  VectorField out(grid_);
  for (std::size_t i = 0; i < grid_.num_points(); ++i)
    out.set(i, eps_cell(i) * P.at(i));
  return out;
}

VecXd CavityDualProblem::load(const VectorField& P) const {
  return grid_.cell_volume() * sys_.cell_load(apply_eps(P));
}

double CavityDualProblem::p2_sq_norm(const VectorField& P) const {
  if (mode_ == DualMode::cavity_III) return 0.0;
  const VecXd b = load(P);
  const VecXd rhs = sys_.G().transpose() * b;
  const VecXd u = sys_.solve_AY(rhs);
  return u.dot(rhs);
}

DualProblem::QuadEval CavityDualProblem::quad(const VectorField& P,
                                              bool need_formula) const {
  QuadEval out;
  const VecXd b = load(P);
  VecXd c = sys_.X_basis().transpose() * b;
  const VecXd& lam = sys_.eigenvalues();

  std::vector<char> in_kernel(c.size(), 0);
  for (int k : kernel_.indices) in_kernel[k] = 1;

  double res_term = 0.0;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    if (in_kernel[k]) continue;
    const double denom =
        (mode_ == DualMode::cavity_III) ? lam(k) : lam(k) - omega_sq_;
    res_term += c(k) * c(k) / denom;
  }

  VecXd u;
  double p2q = 0.0;
  if (mode_ != DualMode::cavity_III) {
    const VecXd rhs = sys_.G().transpose() * b;
    u = sys_.solve_AY(rhs);
    p2q = u.dot(rhs);
    out.B = p2q / (2.0 * omega_sq_) - 0.5 * res_term;
  } else {
    out.B = -0.5 * res_term;
  }

  if (need_formula) {
    VecXd ct(c.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      if (in_kernel[k]) {
        ct(k) = 0.0;
        continue;
      }
      const double denom =
          (mode_ == DualMode::cavity_III) ? lam(k) : lam(k) - omega_sq_;
      ct(k) = c(k) / denom;
    }
    VecXd e = sys_.X_basis() * ct;
    if (mode_ != DualMode::cavity_III) e -= (sys_.G() * u) / omega_sq_;
    out.formula = sys_.edges_to_cells(e);
  } else {
    out.formula = VectorField(grid_);
  }
  return out;
}

VectorField CavityDualProblem::project_constraints(const VectorField& w) const {
  if (mode_ == DualMode::cavity_I) return w;
  if (mode_ == DualMode::cavity_II) {
    VectorField out = w;
    for (int i = 0; i < kernel_cells_.cols(); ++i) {
      VectorField v(grid_);
      Eigen::Map<VecXd>(v.data(), kernel_cells_.rows()) = kernel_cells_.col(i);
      const double a = inner(v, out);
      Eigen::Map<VecXd>(out.data(), kernel_cells_.rows()) -=
          a * kernel_cells_.col(i);
    }
    return out;
  }
  // cavity_III: remove the span of the gradient pullbacks Q G v.
  Eigen::Map<const VecXd> wf(w.data(), static_cast<Eigen::Index>(w.size()));
  VecXd rhs = QG_.transpose() * wf;
  VecXd y;
  if (y_gram_augmented_) {
    VecXd aug = VecXd::Zero(rhs.size() + 1);
    aug.head(rhs.size()) = rhs;
    y = y_gram_.solve(aug).head(rhs.size());
  } else {
    y = y_gram_.solve(rhs);
  }
  VecXd corrected = wf - QG_ * y;
  VectorField out(grid_);
  Eigen::Map<VecXd>(out.data(), corrected.size()) = corrected;
  return out;
}

VecXd CavityDualProblem::formula_edges(const VectorField& P) const {
  const VecXd b = load(P);
  VecXd c = sys_.X_basis().transpose() * b;
  const VecXd& lam = sys_.eigenvalues();
  std::vector<char> in_kernel(c.size(), 0);
  for (int k : kernel_.indices) in_kernel[k] = 1;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    if (in_kernel[k]) {
      c(k) = 0.0;
      continue;
    }
    c(k) /= (mode_ == DualMode::cavity_III) ? lam(k) : lam(k) - omega_sq_;
  }
  VecXd e = sys_.X_basis() * c;
  if (mode_ != DualMode::cavity_III) {
    const VecXd rhs = sys_.G().transpose() * b;
    e -= (sys_.G() * sys_.solve_AY(rhs)) / omega_sq_;
  } else {
    // EL-projection gauge: fit the gradient part of psi(x, P) so the
    // recovered E carries the Y freedom fixed by the tested equations.
    VectorField psi(grid_);
    for (int ix = 0; ix < grid_.n; ++ix)
      for (int iy = 0; iy < grid_.n; ++iy)
        for (int iz = 0; iz < grid_.n; ++iz) {
          const std::size_t i = grid_.point_index(ix, iy, iz);
          const Vec3 x(grid_.point(ix, iy, iz).data());
          psi.set(i, nl_.eval_psi(x, P.at(i)));
        }
    Eigen::Map<const VecXd> pf(psi.data(),
                               static_cast<Eigen::Index>(psi.size()));
    VecXd rhs = QG_.transpose() * (pf - sys_.Q() * e);
    VecXd v;
    if (y_gram_augmented_) {
      VecXd aug = VecXd::Zero(rhs.size() + 1);
      aug.head(rhs.size()) = rhs;
      v = y_gram_.solve(aug).head(rhs.size());
    } else {
      v = y_gram_.solve(rhs);
    }
    e += sys_.G() * v;
  }
  return e;
}

DualSplit CavityDualProblem::split(const VectorField& P) const {
  DualSplit out;
  const VecXd b = load(P);
  out.x_coords = sys_.X_basis().transpose() * b;
  const VecXd rhs = sys_.G().transpose() * b;
  const VecXd u = sys_.solve_AY(rhs);
  out.p2_edge = sys_.G() * u;
  // Edge shadow P^w = M^-1 b; its X part pulled back to cells.
  const VecXd pw = sys_.solve_M(b);
  out.p1_field = sys_.edges_to_cells(pw - out.p2_edge);
  out.p2_field = sys_.edges_to_cells(out.p2_edge);
  // P1 against gradients, relative.
  const VecXd p1 = pw - out.p2_edge;
  const VecXd g1 = sys_.G().transpose() * (sys_.M_eps() * p1);
  const double p1n = std::sqrt(std::max(p1.dot(sys_.M_eps() * p1), 1e-300));
  out.p1_grad_defect = g1.cwiseAbs().maxCoeff() / p1n;
  out.p2_curlfree_defect = 0.0;  // P2 = G u lies in the G-image by construction
  if (mode_ == DualMode::cavity_II) {
    double mx = 0.0;
    for (int k : kernel_.indices)
      mx = std::max(mx, std::abs(out.x_coords(k)));
    out.kernel_defect = mx / std::max(out.x_coords.norm(), 1e-300);
  }
  return out;
}

PrimalRecovery CavityDualProblem::to_primal(const VectorField& P) const {
  PrimalRecovery out;
  out.E_edges = formula_edges(P);
  out.E_formula = sys_.edges_to_cells(out.E_edges);

  out.E_pointwise = VectorField(grid_);
  for (int ix = 0; ix < grid_.n; ++ix)
    for (int iy = 0; iy < grid_.n; ++iy)
      for (int iz = 0; iz < grid_.n; ++iz) {
        const std::size_t i = grid_.point_index(ix, iy, iz);
        const Vec3 x(grid_.point(ix, iy, iz).data());
        out.E_pointwise.set(i, nl_.eval_psi(x, eps_cell(i) * P.at(i)));
      }

  // Components of the formula field.
  const HodgeSplit hs = sys_.hodge_project(out.E_edges);
  out.E1 = sys_.edges_to_cells(hs.f_X);
  out.E2 = sys_.edges_to_cells(hs.f_Y);

  VectorField diff = out.E_pointwise;
  diff -= out.E_formula;
  out.agreement =
      lp_norm(diff, 2.0) / std::max(lp_norm(out.E_formula, 2.0), 1e-300);
  return out;
}

VectorField CavityDualProblem::eigenmode_seed(int k) const {
  if (k < 0 || k >= sys_.dim_x())
    throw DimensionError("eigenmode_seed: index out of range");
  VectorField p = sys_.edges_to_cells(sys_.X_basis().col(k));
  p = project_constraints(p);
  const double s = lp_norm(p, nl_.p_conj());
  if (s > 0.0) p *= 1.0 / s;
  return p;
}

std::unique_ptr<DualProblem> make_cavity_dual(const CavitySystem& sys,
                                              Nonlinearity nl,
                                              double omega_sq) {
  const DualMode mode = CavityDualProblem::classify(sys, omega_sq);
  return std::make_unique<CavityDualProblem>(sys, std::move(nl), omega_sq,
                                             mode);
}

// --- periodic full-space proxy ---------------------------------------------

FullspaceDualProblem::FullspaceDualProblem(const GridSpec& grid,
                                           Nonlinearity nl, double lambda,
                                           double delta_res)
    : DualProblem(DualMode::fullspace, grid, std::move(nl)),
      lambda_(lambda),
      delta_res_(delta_res) {
  if (grid.mode != GridMode::periodic)
    throw ConfigError("FullspaceDualProblem: grid mode must be periodic");
  if (!(lambda > 0.0))
    throw ConfigError("FullspaceDualProblem: lambda must be positive");
  if (!(nl_.p() > 4.0 && nl_.p() < 6.0))
    throw ConfigError("FullspaceDualProblem: full-space window needs 4 < p < 6");
  if (delta_res_ < 0.0) delta_res_ = 1e-6 * lambda_;
  const double gap = symbol_gap(grid, lambda_);
  if (gap < delta_res_)
    throw ResonanceError(
        "FullspaceDualProblem: lambda within delta_res of the symbol set "
        "(gap " + std::to_string(gap) + ")");
}

double FullspaceDualProblem::p2_sq_norm(const VectorField& P) const {
  const SpectralField grad_part = project_gradient(fft(P));
  const double vol = std::pow(grid_.cell_length, 3);
  double acc = 0.0;
  for (std::size_t m = 0; m < grid_.num_points(); ++m)
    acc += grad_part.at(m).squaredNorm();
  return vol * acc;
}

DualProblem::QuadEval FullspaceDualProblem::quad(const VectorField& P,
                                                 bool need_formula) const {
  QuadEval out;
  const SpectralField Phat = fft(P);
  auto [p1, p2] = helmholtz_project(Phat);
  const double vol = std::pow(grid_.cell_length, 3);
  const GridSpec& g = grid_;

  double p2q = 0.0, res_term = 0.0;
  SpectralField formula_hat(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        const double mult =
            1.0 / (wavevector(g, ix, iy, iz).squaredNorm() - lambda_);
        p2q += p2.at(m).squaredNorm();
        res_term += mult * p1.at(m).squaredNorm();
        if (need_formula)
          formula_hat.set(m, mult * p1.at(m) - p2.at(m) / lambda_);
      }
  out.B = vol * (p2q / (2.0 * lambda_) - 0.5 * res_term);
  out.formula = need_formula ? ifft(formula_hat) : VectorField(g);
  return out;
}

DualSplit FullspaceDualProblem::split(const VectorField& P) const {
  DualSplit out;
  auto [p1, p2] = helmholtz_project(fft(P));
  out.p1_field = ifft(p1);
  out.p2_field = ifft(p2);
  out.p1_grad_defect = divergence_defect(p1);
  out.p2_curlfree_defect =
      curlfree_is_gradient_check(p2, 1e-10) ? 0.0 : 1.0;
  return out;
}

PrimalRecovery FullspaceDualProblem::to_primal(const VectorField& P) const {
  PrimalRecovery out;
  auto [p1, p2] = helmholtz_project(fft(P));
  const GridSpec& g = grid_;
  SpectralField e1_hat(g), e2_hat(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        const double mult =
            1.0 / (wavevector(g, ix, iy, iz).squaredNorm() - lambda_);
        e1_hat.set(m, mult * p1.at(m));
        e2_hat.set(m, -p2.at(m) / lambda_);
      }
  out.E1 = ifft(e1_hat);
  out.E2 = ifft(e2_hat);
  out.E_formula = out.E1 + out.E2;

  out.E_pointwise = VectorField(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t i = g.point_index(ix, iy, iz);
        const Vec3 x(g.point(ix, iy, iz).data());
        out.E_pointwise.set(i, nl_.eval_psi(x, P.at(i)));
      }

  VectorField diff = out.E_pointwise;
  diff -= out.E_formula;
  out.agreement =
      lp_norm(diff, 2.0) / std::max(lp_norm(out.E_formula, 2.0), 1e-300);
  return out;
}

double FullspaceDualProblem::state_distance(const VectorField& a,
                                            const VectorField& b) const {
  const double scale = std::max({z_norm(a), z_norm(b), 1e-300});
  const double pp = nl_.p_conj();
  double best = std::numeric_limits<double>::infinity();
  for (int sx = 0; sx < grid_.n; ++sx)
    for (int sy = 0; sy < grid_.n; ++sy)
      for (int sz = 0; sz < grid_.n; ++sz) {
        VectorField d = periodic_shift(b, sx, sy, sz);
        d -= a;
        best = std::min(best, lp_norm(d, pp));
        if (best == 0.0) return 0.0;
      }
  return best / scale;
}

VectorField FullspaceDualProblem::shell_seed(int j) const {
  const GridSpec& g = grid_;
  SpectralField seed(g);
  const double lo = lambda_ + j, hi = lambda_ + j + 1;
  bool any = false;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const Vec3 xi = wavevector(g, ix, iy, iz);
        const double n2 = xi.squaredNorm();
        if (!(n2 > lo && n2 < hi)) continue;
        const Vec3 rot(-xi[1], xi[0], 0.0);
        if (rot.squaredNorm() == 0.0) continue;
        seed.set(g.point_index(ix, iy, iz),
                 Cplx(0.0, 1.0) * rot.normalized().cast<Cplx>());
        any = true;
      }
  if (!any)
    throw ConfigError("shell_seed: empty spectral window (" +
                      std::to_string(lo) + ", " + std::to_string(hi) + ")");
  VectorField p = ifft(seed);
  const double s = lp_norm(p, nl_.p_conj());
  p *= 1.0 / s;
  return p;
}

}  // namespace nlmax
