// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_CAVITY_HPP
#define NLMAX_CAVITY_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <string>
#include <vector>

#include "nlmax/field.hpp"

namespace nlmax {

enum class CavityBC { neumann, dirichlet };

std::string to_string(CavityBC bc);
CavityBC cavity_bc_from_string(const std::string& s);

using SpMat = Eigen::SparseMatrix<double>;
using VecXd = Eigen::VectorXd;
using MatXd = Eigen::MatrixXd;

/// Indices of the eigenvalue cluster matched by a spectral parameter.
struct EigIndexSet {
  double lambda = 0;
  std::vector<int> indices;
  int dimension() const { return static_cast<int>(indices.size()); }
  bool empty() const { return indices.empty(); }
};

/// Result of the weighted Hodge decomposition f = f_X + f_Y with
/// f_Y = -G u; components are M_eps-orthogonal.
struct HodgeSplit {
  VecXd f_X;
  VecXd f_Y;
  VecXd potential;  // u, mean-zero gauged in the Neumann case
};

struct LinearSolveResult {
  VecXd E;
  int fredholm_case = 1;  // 1: off-spectrum, 2: on-spectrum, 3: lambda = 0
  int kernel_dim = 0;     // case 2: dim Eig_lambda; case 3: dim of Y freedom
};

/// Staggered edge/face discretization of the curl-curl operator on the
/// box cavity [0,L]^3 with n cells per axis. The incidence structure
/// gives C G = 0 exactly; consistent mass matrices carry full SPD 3x3
/// per-cell permittivity and permeability. The spectrum of
/// L = eps^-1 curl (mu^-1 curl .) on the eps-divergence-free subspace X
/// is computed by a dense symmetric eigensolve, guarded to n <= 16.
class CavitySystem {
 public:
  static CavitySystem build(const GridSpec& grid, CavityBC bc,
                            const Medium& medium);

  const GridSpec& grid() const { return grid_; }
  CavityBC bc() const { return bc_; }
  const Medium& medium() const { return medium_; }
  double h() const { return h_; }

  Eigen::Index num_edges() const { return n_edges_; }
  Eigen::Index num_nodes() const { return n_nodes_; }
  Eigen::Index num_faces() const { return n_faces_; }
  Eigen::Index num_removed_edges() const { return n_removed_; }
  Eigen::Index dim_x() const { return eigenvalues_.size(); }
  Eigen::Index dim_y() const { return grad_rank_; }

  const SpMat& G() const { return G_; }
  const SpMat& C() const { return C_; }
  const SpMat& M_eps() const { return M_eps_; }
  const SpMat& M_mu_inv() const { return M_mu_inv_; }
  const SpMat& K() const { return K_; }
  const SpMat& Q() const { return Q_; }

  /// M_eps-orthonormal eigenbasis of L restricted to X (columns) and
  /// the ascending eigenvalues.
  const MatXd& X_basis() const { return Phi_; }
  const VecXd& eigenvalues() const { return eigenvalues_; }
  double lambda_max() const { return eigenvalues_.size() ? eigenvalues_(eigenvalues_.size()-1) : 0.0; }

  double default_match_tol() const { return 1e-8 * lambda_max(); }

  // --- operations -------------------------------------------------------

  HodgeSplit hodge_project(const VecXd& f) const;

  /// Action of L in X coordinates via the sparse operators (kept
  /// independent of the stored eigenvalues so tests can cross-check).
  VecXd apply_L(const VecXd& x_coords) const;

  EigIndexSet eig_index(double lambda, double match_tol = -1.0) const;

  /// Three-case Fredholm solve of K e - lambda M e = M g. Compatibility
  /// violations raise InfeasibleError carrying the pairing magnitudes.
  LinearSolveResult linear_solve(const VecXd& g, double lambda,
                                 double compat_tol = -1.0) const;

  /// Projection onto X_lambda: the X-part of f minus its Eig_lambda
  /// components; idempotent, eps-orthogonal to gradients and kernels.
  VecXd x_lambda_project(const VecXd& f, double lambda,
                         double match_tol = -1.0) const;

  // --- plumbing shared with the dual solver -----------------------------

  /// X coordinates of (the X-part of) an edge field: Phi^T M_eps f.
  VecXd x_coords(const VecXd& f) const { return Phi_.transpose() * (M_eps_ * f); }

  VecXd solve_M(const VecXd& b) const;      // M_eps^{-1} b
  VecXd solve_AY(const VecXd& rhs) const;   // (G^T M_eps G)^{-1}, gauged

  /// Cell sampling of an edge field (component = mean of the 4 parallel
  /// cell edges), as a cavity-grid VectorField.
  VectorField edges_to_cells(const VecXd& e) const;
  /// Adjoint load: Q^T w for a cell field w (flattened 3 n^3).
  VecXd cell_load(const VectorField& w) const;

  double weak_residual_norm(const VecXd& r) const;  // |r|_{M^-1}
  std::string summary_json() const;
  void export_matrices(const std::string& dir) const;

 private:
  CavitySystem() = default;
  void assemble(const Medium& medium);
  void build_eigensystem();

  GridSpec grid_;
  CavityBC bc_ = CavityBC::neumann;
  Medium medium_;
  int n_ = 0;
  double h_ = 0;
  Eigen::Index n_edges_ = 0, n_nodes_ = 0, n_faces_ = 0, n_removed_ = 0;
  Eigen::Index grad_rank_ = 0;

  std::vector<Eigen::Index> edge_active_;  // full edge index -> active id or -1
  std::vector<Eigen::Index> node_active_;  // full node index -> active id or -1

  SpMat G_, C_, M_eps_, M_mu_inv_, K_, Q_;
  MatXd Phi_;
  VecXd eigenvalues_;

  std::unique_ptr<Eigen::SimplicialLLT<SpMat>> M_llt_;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> AY_ldlt_;  // gauge-augmented
  bool ay_augmented_ = false;

  // tree-cotree bookkeeping used to span ker(G^T)
  std::vector<Eigen::Index> elim_nodes_;      // active node ids in order
  std::vector<Eigen::Index> tree_edge_of_;    // node id -> active edge id
  std::vector<double> tree_sign_of_;          // sign of that edge at the node
  std::vector<std::vector<std::pair<Eigen::Index, double>>> node_edges_;
  std::vector<Eigen::Index> cotree_edges_;
};

}  // namespace nlmax

#endif  // NLMAX_CAVITY_HPP
