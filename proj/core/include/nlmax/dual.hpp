// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_DUAL_HPP
#define NLMAX_DUAL_HPP

#include <memory>
#include <optional>
#include <string>

#include "nlmax/cavity.hpp"
#include "nlmax/nonlin.hpp"
#include "nlmax/spectral.hpp"

namespace nlmax {

enum class DualMode { cavity_I, cavity_II, cavity_III, fullspace };

std::string to_string(DualMode m);
DualMode dual_mode_from_string(const std::string& s);

/// Helmholtz split diagnostics of a dual field.
struct DualSplit {
  VecXd x_coords;           // coordinates of P1 in the eigenbasis (cavity)
  VecXd p2_edge;            // P2 = G u (cavity edge field)
  VectorField p1_field;     // P1 pulled to the dual grid
  VectorField p2_field;     // P2 pulled to the dual grid
  double p1_grad_defect = 0;     // eps-pairing of P1 against gradients
  double p2_curlfree_defect = 0; // divergence-free defect of P2's complement
  double kernel_defect = 0;      // case II: pairing with Eig_omega2
};

/// Recovery of the primal field from a dual critical point. The two
/// constructions (pointwise psi and the linear component formula) are
/// computed independently; their relative gap certifies criticality.
struct PrimalRecovery {
  VectorField E_pointwise;
  VectorField E_formula;
  VectorField E1;
  VectorField E2;
  VecXd E_edges;  // cavity only
  double agreement = 0;
};

/// Dual energy functional J on the discrete dual space (cell fields in
/// the cavity, grid fields in the periodic box), with the exact
/// gradient of the discrete functional in the eps-weighted pointwise
/// inner product. Zero gradient is the discrete Euler-Lagrange
/// equation psi(x, eps P) = E(P) with E the mode's resolvent formula.
class DualProblem {
 public:
  virtual ~DualProblem() = default;

  DualMode mode() const { return mode_; }
  const GridSpec& grid() const { return grid_; }
  const Nonlinearity& nonlin() const { return nl_; }

  struct Eval {
    double J = 0;
    double A = 0;       // integral of Psi (coefficient of t^p')
    double B = 0;       // quadratic coefficient of the fibering map
    double grad_norm = 0;
    VectorField grad;   // constraint-projected Riesz gradient
  };

  Eval eval(const VectorField& P) const;
  double J_eval(const VectorField& P) const;
  VectorField grad_J(const VectorField& P) const;
  double fiber_A(const VectorField& P) const;
  double fiber_B(const VectorField& P) const;

  /// Interior maximizer of t -> J(tP) (power nonlinearity): requires
  /// B(P) < 0, otherwise ConeError.
  struct FiberScale {
    double t_star = 0;
    double m_val = 0;
  };
  FiberScale fiber_scale(const VectorField& P) const;
  FiberScale fiber_scale(double A, double B) const;

  /// eps-weighted pointwise inner product on the dual space.
  double inner(const VectorField& a, const VectorField& b) const;
  double norm(const VectorField& a) const { return std::sqrt(inner(a, a)); }
  /// Z-norm |P|_p' + |P2|_2 used for dedup scales and diagnostics.
  double z_norm(const VectorField& P) const;
  /// Natural gradient scale |P|_p'^(p'-1).
  double grad_scale(const VectorField& P) const;

  /// Project a direction onto the mode's constraint tangent space
  /// (identity for cavity_I and fullspace).
  virtual VectorField project_constraints(const VectorField& w) const;

  virtual DualSplit split(const VectorField& P) const = 0;
  virtual PrimalRecovery to_primal(const VectorField& P) const = 0;

  /// Distance between two dual states relative to their Z-norms; the
  /// full-space version minimizes over grid translations.
  virtual double state_distance(const VectorField& a,
                                const VectorField& b) const;

 protected:
  DualProblem(DualMode mode, GridSpec grid, Nonlinearity nl)
      : mode_(mode), grid_(std::move(grid)), nl_(std::move(nl)) {}

  struct QuadEval {
    double B = 0;
    VectorField formula;  // resolvent formula field on the dual grid
  };
  virtual QuadEval quad(const VectorField& P, bool need_formula) const = 0;
  virtual Mat3 eps_cell(std::size_t cell) const = 0;
  virtual double p2_sq_norm(const VectorField& P) const = 0;

  DualMode mode_;
  GridSpec grid_;
  Nonlinearity nl_;
};

/// Cases (I), (II), (III) over a CavitySystem. The dual field lives on
/// the cavity cell grid; its edge-space shadow P^w = M^-1 Q^T (h^3 eps P)
/// supplies the Helmholtz split and the resolvent quadratic form.
class CavityDualProblem : public DualProblem {
 public:
  CavityDualProblem(const CavitySystem& sys, Nonlinearity nl, double omega_sq,
                    DualMode mode, double match_tol = -1.0);

  static DualMode classify(const CavitySystem& sys, double omega_sq,
                           double match_tol = -1.0);

  const CavitySystem& system() const { return sys_; }
  double omega_sq() const { return omega_sq_; }
  const EigIndexSet& kernel() const { return kernel_; }

  VectorField project_constraints(const VectorField& w) const override;
  DualSplit split(const VectorField& P) const override;
  PrimalRecovery to_primal(const VectorField& P) const override;

  /// Edge-space resolvent formula E = (L - w^2)^% P1 - w^-2 P2 for the
  /// state P (pseudo-inverse on the kernel cluster in case II).
  VecXd formula_edges(const VectorField& P) const;

  /// Seed field: cell pullback of eigenmode k, constraint-projected.
  VectorField eigenmode_seed(int k) const;

 protected:
  QuadEval quad(const VectorField& P, bool need_formula) const override;
  Mat3 eps_cell(std::size_t cell) const override;
  double p2_sq_norm(const VectorField& P) const override;

 private:
  VectorField apply_eps(const VectorField& P) const;
  VecXd load(const VectorField& P) const;  // b = Q^T (h^3 eps P)

  const CavitySystem& sys_;
  double omega_sq_;
  EigIndexSet kernel_;          // eigen cluster at omega_sq (case II)
  MatXd kernel_cells_;          // orthonormalized Q phi_k (eps-c product)
  // case III: gradient-pullback Gram for the constraint projector
  SpMat QG_;
  Eigen::SimplicialLDLT<SpMat> y_gram_;
  bool y_gram_augmented_ = false;
};

/// Periodic-box proxy of the full-space problem: quadratic part built
/// from the limiting-absorption multiplier of resolvent_R.
class FullspaceDualProblem : public DualProblem {
 public:
  FullspaceDualProblem(const GridSpec& grid, Nonlinearity nl, double lambda,
                       double delta_res = -1.0);

  double lambda() const { return lambda_; }

  DualSplit split(const VectorField& P) const override;
  PrimalRecovery to_primal(const VectorField& P) const override;
  double state_distance(const VectorField& a,
                        const VectorField& b) const override;

  /// Divergence-free shell seed: coefficients i (-xi2, xi1, 0) restricted
  /// to the window lambda + j < |xi|^2 < lambda + j + 1.
  VectorField shell_seed(int j) const;

 protected:
  QuadEval quad(const VectorField& P, bool need_formula) const override;
  Mat3 eps_cell(std::size_t cell) const override { return Mat3::Identity(); }
  double p2_sq_norm(const VectorField& P) const override;

 private:
  double lambda_;
  double delta_res_;
};

std::unique_ptr<DualProblem> make_cavity_dual(const CavitySystem& sys,
                                              Nonlinearity nl,
                                              double omega_sq);

}  // namespace nlmax

#endif  // NLMAX_DUAL_HPP
