// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include "nlmax/cavity.hpp"

#include <lapacke.h>

#include <array>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace nlmax {

std::string to_string(CavityBC bc) {
  return bc == CavityBC::neumann ? "neumann" : "dirichlet";
}

CavityBC cavity_bc_from_string(const std::string& s) {
  if (s == "neumann") return CavityBC::neumann;
  if (s == "dirichlet") return CavityBC::dirichlet;
  throw ConfigError("unknown boundary condition: " + s);
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Enumeration of the staggered mesh entities on an n-cell box.
//   edge (d,i,j,k): along-axis coordinate in [0,n), transverse in [0,n]
//   node (i,j,k):   [0,n]^3
//   face (d,i,j,k): normal coordinate in [0,n], transverse in [0,n)
struct Mesh {
  int n;
  std::array<Eigen::Index, 3> edge_off{}, face_off{};

  explicit Mesh(int n_) : n(n_) {
    Eigen::Index eo = 0, fo = 0;
    for (int d = 0; d < 3; ++d) {
      edge_off[d] = eo;
      face_off[d] = fo;
      eo += static_cast<Eigen::Index>(n) * (n + 1) * (n + 1);
      fo += static_cast<Eigen::Index>(n + 1) * n * n;
    }
  }

  Eigen::Index total_edges() const {
    return 3 * static_cast<Eigen::Index>(n) * (n + 1) * (n + 1);
  }
  Eigen::Index total_nodes() const {
    return static_cast<Eigen::Index>(n + 1) * (n + 1) * (n + 1);
  }
  Eigen::Index total_faces() const {
    return 3 * static_cast<Eigen::Index>(n + 1) * n * n;
  }

  Eigen::Index edge(int d, int i, int j, int k) const {
    // dims: along axis d -> n, others -> n+1
    const int dj = (d == 1) ? n : n + 1;
    const int dk = (d == 2) ? n : n + 1;
    return edge_off[d] + (static_cast<Eigen::Index>(i) * dj + j) * dk + k;
  }
  Eigen::Index edge(int d, const std::array<int, 3>& p) const {
    return edge(d, p[0], p[1], p[2]);
  }
  Eigen::Index node(int i, int j, int k) const {
    return (static_cast<Eigen::Index>(i) * (n + 1) + j) * (n + 1) + k;
  }
  Eigen::Index face(int d, const std::array<int, 3>& p) const {
    const int dj = (d == 1) ? n + 1 : n;
    const int dk = (d == 2) ? n + 1 : n;
    return face_off[d] + (static_cast<Eigen::Index>(p[0]) * dj + p[1]) * dk +
           p[2];
  }

  bool edge_tangential_to_boundary(int d, const std::array<int, 3>& p) const {
    for (int ax = 0; ax < 3; ++ax)
      if (ax != d && (p[ax] == 0 || p[ax] == n)) return true;
    return false;
  }
};

// 1-D hat integrals on [0,h]: int l_a l_b = h/3 (a==b) or h/6.
double hat_pair(int a, int b, double h) { return a == b ? h / 3.0 : h / 6.0; }

}  // namespace

CavitySystem CavitySystem::build(const GridSpec& grid, CavityBC bc,
                                 const Medium& medium) {
  if (grid.mode != GridMode::cavity)
    throw ConfigError("CavitySystem: grid mode must be cavity");
  if (grid.n > 16)
    throw ConfigError(
        "CavitySystem: dense eigensolve guard, n_per_axis must be <= 16");
  CavitySystem sys;
  sys.grid_ = grid;
  sys.bc_ = bc;
  sys.medium_ = medium;
  sys.n_ = grid.n;
  sys.h_ = grid.spacing();
  sys.assemble(medium);
  sys.build_eigensystem();
  return sys;
}

void CavitySystem::assemble(const Medium& medium) {
  const int n = n_;
  const double h = h_;
  const Mesh mesh(n);
  const bool pec = (bc_ == CavityBC::dirichlet);

  // Active edge / node maps.
  edge_active_.assign(mesh.total_edges(), -1);
  node_active_.assign(mesh.total_nodes(), -1);
  Eigen::Index ne = 0;
  for (int d = 0; d < 3; ++d) {
    const int ni = (d == 0) ? n : n + 1;
    const int nj = (d == 1) ? n : n + 1;
    const int nk = (d == 2) ? n : n + 1;
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j < nj; ++j)
        for (int k = 0; k < nk; ++k) {
          const std::array<int, 3> p{i, j, k};
          if (pec && mesh.edge_tangential_to_boundary(d, p)) continue;
          edge_active_[mesh.edge(d, i, j, k)] = ne++;
        }
  }
  n_edges_ = ne;
  n_removed_ = mesh.total_edges() - ne;

  Eigen::Index nn = 0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k <= n; ++k) {
        if (pec && (i == 0 || i == n || j == 0 || j == n || k == 0 || k == n))
          continue;
        node_active_[mesh.node(i, j, k)] = nn++;
      }
  n_nodes_ = nn;
  n_faces_ = mesh.total_faces();

  // Gradient incidence, nodes -> edges.
  std::vector<Triplet> tg;
  for (int d = 0; d < 3; ++d) {
    const int ni = (d == 0) ? n : n + 1;
    const int nj = (d == 1) ? n : n + 1;
    const int nk = (d == 2) ? n : n + 1;
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j < nj; ++j)
        for (int k = 0; k < nk; ++k) {
          const Eigen::Index e = edge_active_[mesh.edge(d, i, j, k)];
          if (e < 0) continue;
          std::array<int, 3> head{i, j, k};
          head[d] += 1;
          const Eigen::Index t = node_active_[mesh.node(i, j, k)];
          const Eigen::Index hd = node_active_[mesh.node(head[0], head[1],
                                                         head[2])];
          if (hd >= 0) tg.emplace_back(e, hd, 1.0 / h);
          if (t >= 0) tg.emplace_back(e, t, -1.0 / h);
        }
  }
  G_.resize(n_edges_, n_nodes_);
  G_.setFromTriplets(tg.begin(), tg.end());

  // Curl incidence, edges -> faces.
  std::vector<Triplet> tc;
  for (int d = 0; d < 3; ++d) {
    const int u = (d + 1) % 3, v = (d + 2) % 3;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          std::array<int, 3> pos{};
          pos[d] = i;
          pos[u] = j;
          pos[v] = k;
          const Eigen::Index f = mesh.face(d, pos);
          auto add = [&](int dir, std::array<int, 3> p, double s) {
            const Eigen::Index e = edge_active_[mesh.edge(dir, p)];
            if (e >= 0) tc.emplace_back(f, e, s / h);
          };
          std::array<int, 3> pu = pos, pv = pos;
          pu[u] += 1;
          pv[v] += 1;
          add(v, pu, 1.0);   // + E_v at pos + e_u
          add(v, pos, -1.0);
          add(u, pv, -1.0);  // - E_u at pos + e_v
          add(u, pos, 1.0);
        }
  }
  C_.resize(n_faces_, n_edges_);
  C_.setFromTriplets(tc.begin(), tc.end());

  // Consistent mass matrices, assembled cell by cell with the material
  // matrix sampled at the cell (constant per cell).
  std::vector<Triplet> tme, tmf, tq;
  for (int cx = 0; cx < n; ++cx)
    for (int cy = 0; cy < n; ++cy)
      for (int cz = 0; cz < n; ++cz) {
        const std::size_t cell = grid_.point_index(cx, cy, cz);
        const Mat3 eps = medium.eps_at(cell);
        const Mat3 mui = medium.mu_at(cell).inverse();
        const std::array<int, 3> corner{cx, cy, cz};

        // Local edges: (d, ou, ov) with offsets on the transverse axes.
        struct LocalEdge {
          int d;
          std::array<int, 3> off;  // off[d] unused
          Eigen::Index id;
        };
        std::array<LocalEdge, 12> le;
        int cnt = 0;
        for (int d = 0; d < 3; ++d) {
          const int u = (d + 1) % 3, v = (d + 2) % 3;
          for (int ou = 0; ou < 2; ++ou)
            for (int ov = 0; ov < 2; ++ov) {
              std::array<int, 3> p = corner, off{};
              p[u] += ou;
              p[v] += ov;
              off[u] = ou;
              off[v] = ov;
              le[cnt++] = {d, off, edge_active_[mesh.edge(d, p)]};
            }
        }
        for (const auto& a : le) {
          if (a.id < 0) continue;
          // cell-center sampling row of Q
          tq.emplace_back(3 * static_cast<Eigen::Index>(cell) + a.d, a.id,
                          0.25);
          for (const auto& b : le) {
            if (b.id < 0) continue;
            double val;
            if (a.d == b.d) {
              const int u = (a.d + 1) % 3, v = (a.d + 2) % 3;
              val = eps(a.d, a.d) * h * hat_pair(a.off[u], b.off[u], h) *
                    hat_pair(a.off[v], b.off[v], h);
            } else {
              const int s = 3 - a.d - b.d;  // axis transverse to both
              val = eps(a.d, b.d) * (h / 2.0) * (h / 2.0) *
                    hat_pair(a.off[s], b.off[s], h);
            }
            if (val != 0.0) tme.emplace_back(a.id, b.id, val);
          }
        }

        // Local faces: (d, od) with offset along the normal axis.
        struct LocalFace {
          int d, od;
          Eigen::Index id;
        };
        std::array<LocalFace, 6> lf;
        cnt = 0;
        for (int d = 0; d < 3; ++d)
          for (int od = 0; od < 2; ++od) {
            std::array<int, 3> p = corner;
            p[d] += od;
            lf[cnt++] = {d, od, mesh.face(d, p)};
          }
        for (const auto& a : lf)
          for (const auto& b : lf) {
            double val;
            if (a.d == b.d)
              val = mui(a.d, a.d) * hat_pair(a.od, b.od, h) * h * h;
            else
              val = mui(a.d, b.d) * (h / 2.0) * (h / 2.0) * h;
            if (val != 0.0) tmf.emplace_back(a.id, b.id, val);
          }
      }
  M_eps_.resize(n_edges_, n_edges_);
  M_eps_.setFromTriplets(tme.begin(), tme.end());
  M_mu_inv_.resize(n_faces_, n_faces_);
  M_mu_inv_.setFromTriplets(tmf.begin(), tmf.end());
  Q_.resize(3 * static_cast<Eigen::Index>(grid_.num_points()), n_edges_);
  Q_.setFromTriplets(tq.begin(), tq.end());

  K_ = C_.transpose() * M_mu_inv_ * C_;
  K_.makeCompressed();

  M_llt_ = std::make_unique<Eigen::SimplicialLLT<SpMat>>();
  M_llt_->compute(M_eps_);
  if (M_llt_->info() != Eigen::Success)
    throw ConfigError("CavitySystem: edge mass matrix is not SPD");

  // Scalar Gram matrix for the Hodge solves. The Neumann variant has
  // the constant in its kernel; a Lagrange row pins the mean.
  SpMat AY = SpMat(G_.transpose()) * M_eps_ * G_;
  ay_augmented_ = (bc_ == CavityBC::neumann);
  if (ay_augmented_) {
    std::vector<Triplet> ta;
    for (int o = 0; o < AY.outerSize(); ++o)
      for (SpMat::InnerIterator it(AY, o); it; ++it)
        ta.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < n_nodes_; ++i) {
      ta.emplace_back(n_nodes_, i, 1.0);
      ta.emplace_back(i, n_nodes_, 1.0);
    }
    SpMat aug(n_nodes_ + 1, n_nodes_ + 1);
    aug.setFromTriplets(ta.begin(), ta.end());
    AY_ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(aug);
  } else {
    AY_ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(AY);
  }
  if (AY_ldlt_->info() != Eigen::Success)
    throw ConfigError("CavitySystem: singular scalar Gram matrix");

  // Tree-cotree structures spanning ker(G^T): per active node one tree
  // edge, eliminated in an order that makes back-substitution exact.
  node_edges_.assign(n_nodes_, {});
  for (int d = 0; d < 3; ++d) {
    const int ni = (d == 0) ? n : n + 1;
    const int nj = (d == 1) ? n : n + 1;
    const int nk = (d == 2) ? n : n + 1;
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j < nj; ++j)
        for (int k = 0; k < nk; ++k) {
          const Eigen::Index e = edge_active_[mesh.edge(d, i, j, k)];
          if (e < 0) continue;
          std::array<int, 3> head{i, j, k};
          head[d] += 1;
          const Eigen::Index t = node_active_[mesh.node(i, j, k)];
          const Eigen::Index hd =
              node_active_[mesh.node(head[0], head[1], head[2])];
          if (hd >= 0) node_edges_[hd].emplace_back(e, 1.0);
          if (t >= 0) node_edges_[t].emplace_back(e, -1.0);
        }
  }

  elim_nodes_.clear();
  tree_edge_of_.assign(n_nodes_, -1);
  tree_sign_of_.assign(n_nodes_, 1.0);
  auto set_tree = [&](Eigen::Index nid, Eigen::Index full_edge) {
    const Eigen::Index e = edge_active_[full_edge];
    if (nid < 0 || e < 0)
      throw ConfigError("CavitySystem: internal tree construction failure");
    elim_nodes_.push_back(nid);
    tree_edge_of_[nid] = e;  // node is the head of its below-edge
  };
  if (pec) {
    for (int k = n - 1; k >= 1; --k)
      for (int i = 1; i <= n - 1; ++i)
        for (int j = 1; j <= n - 1; ++j)
          set_tree(node_active_[mesh.node(i, j, k)], mesh.edge(2, i, j, k - 1));
  } else {
    for (int k = n; k >= 1; --k)
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
          set_tree(node_active_[mesh.node(i, j, k)], mesh.edge(2, i, j, k - 1));
    for (int j = n; j >= 1; --j)
      for (int i = 0; i <= n; ++i)
        set_tree(node_active_[mesh.node(i, j, 0)], mesh.edge(1, i, j - 1, 0));
    for (int i = n; i >= 1; --i)
      set_tree(node_active_[mesh.node(i, 0, 0)], mesh.edge(0, i - 1, 0, 0));
  }
  grad_rank_ = static_cast<Eigen::Index>(elim_nodes_.size());

  std::vector<char> is_tree(n_edges_, 0);
  for (Eigen::Index nid : elim_nodes_) is_tree[tree_edge_of_[nid]] = 1;
  cotree_edges_.clear();
  for (Eigen::Index e = 0; e < n_edges_; ++e)
    if (!is_tree[e]) cotree_edges_.push_back(e);
}

void CavitySystem::build_eigensystem() {
  const Eigen::Index E = n_edges_;
  const Eigen::Index m = static_cast<Eigen::Index>(cotree_edges_.size());

  // Nullspace of G^T, one column per cotree edge, tree values filled by
  // back-substitution over the elimination order.
  SpMat B0(E, m);
  {
    std::vector<Triplet> tb;
    VecXd col = VecXd::Zero(E);
    for (Eigen::Index c = 0; c < m; ++c) {
      col.setZero();
      col[cotree_edges_[c]] = 1.0;
      for (Eigen::Index nid : elim_nodes_) {
        const Eigen::Index te = tree_edge_of_[nid];
        double s = 0.0;
        for (const auto& [e, sg] : node_edges_[nid])
          if (e != te) s += sg * col[e];
        col[te] = -s;  // head sign is +1 by construction
      }
      for (Eigen::Index e = 0; e < E; ++e)
        if (col[e] != 0.0) tb.emplace_back(e, c, col[e]);
    }
    B0.setFromTriplets(tb.begin(), tb.end());
  }

  // W = M^-1 B0 spans X; column scaling keeps the Gram matrix tame.
  MatXd W(E, m);
  const Eigen::Index blk = 512;
  for (Eigen::Index c0 = 0; c0 < m; c0 += blk) {
    const Eigen::Index bs = std::min(blk, m - c0);
    W.middleCols(c0, bs) = M_llt_->solve(MatXd(B0.middleCols(c0, bs)));
  }
  MatXd S = MatXd(B0.transpose() * W);  // = B0^T M^-1 B0
  VecXd dinv = S.diagonal().array().sqrt().inverse();
  W = W * dinv.asDiagonal();
  S = dinv.asDiagonal() * S * dinv.asDiagonal();
  S = 0.5 * (S + S.transpose()).eval();

  MatXd A(m, m);
  for (Eigen::Index c0 = 0; c0 < m; c0 += blk) {
    const Eigen::Index bs = std::min(blk, m - c0);
    A.middleCols(c0, bs).noalias() = W.transpose() * (K_ * W.middleCols(c0, bs));
  }
  A = 0.5 * (A + A.transpose()).eval();

  VecXd w(m);
  const lapack_int info = LAPACKE_dsygvd(
      LAPACK_COL_MAJOR, 1, 'V', 'L', static_cast<lapack_int>(m), A.data(),
      static_cast<lapack_int>(m), S.data(), static_cast<lapack_int>(m),
      w.data());
  if (info != 0)
    throw ConvergenceError("CavitySystem: dsygvd failed with info " +
                           std::to_string(info));

  // Eigenvectors back to edge space, row-blocked in place.
  for (Eigen::Index r0 = 0; r0 < E; r0 += blk) {
    const Eigen::Index bs = std::min(blk, E - r0);
    MatXd rows = W.middleRows(r0, bs);
    W.middleRows(r0, bs).noalias() = rows * A;
  }
  Phi_ = std::move(W);
  eigenvalues_ = std::move(w);
}

HodgeSplit CavitySystem::hodge_project(const VecXd& f) const {
  if (f.size() != n_edges_)
    throw DimensionError("hodge_project: edge vector length mismatch");
  HodgeSplit out;
  out.potential = solve_AY(-(G_.transpose() * (M_eps_ * f)));
  out.f_Y = -(G_ * out.potential);
  out.f_X = f - out.f_Y;
  return out;
}

VecXd CavitySystem::solve_M(const VecXd& b) const { return M_llt_->solve(b); }

VecXd CavitySystem::solve_AY(const VecXd& rhs) const {
  if (!ay_augmented_) return AY_ldlt_->solve(rhs);
  VecXd aug = VecXd::Zero(n_nodes_ + 1);
  aug.head(n_nodes_) = rhs;
  VecXd sol = AY_ldlt_->solve(aug);
  return sol.head(n_nodes_);
}

VecXd CavitySystem::apply_L(const VecXd& x_coords) const {
  if (x_coords.size() != dim_x())
    throw DimensionError("apply_L: X-coordinate length mismatch");
  return Phi_.transpose() * (K_ * (Phi_ * x_coords));
}

EigIndexSet CavitySystem::eig_index(double lambda, double match_tol) const {
  if (match_tol < 0.0) match_tol = default_match_tol();
  EigIndexSet set;
  set.lambda = lambda;
  for (Eigen::Index k = 0; k < eigenvalues_.size(); ++k)
    if (std::abs(eigenvalues_(k) - lambda) <= match_tol)
      set.indices.push_back(static_cast<int>(k));
  return set;
}

LinearSolveResult CavitySystem::linear_solve(const VecXd& g, double lambda,
                                             double compat_tol) const {
  if (g.size() != n_edges_)
    throw DimensionError("linear_solve: edge vector length mismatch");
  const double gnorm = std::sqrt(std::max(0.0, g.dot(M_eps_ * g)));
  if (compat_tol < 0.0) compat_tol = 1e-8 * gnorm;

  const HodgeSplit split = hodge_project(g);
  VecXd c = Phi_.transpose() * (M_eps_ * split.f_X);

  LinearSolveResult res;
  if (lambda == 0.0) {
    res.fredholm_case = 3;
    const double y_norm =
        std::sqrt(std::max(0.0, split.f_Y.dot(M_eps_ * split.f_Y)));
    if (y_norm > compat_tol)
      throw InfeasibleError(
          "linear_solve: lambda = 0 requires a gradient-free right hand "
          "side; |g_2|_eps = " + std::to_string(y_norm),
          {y_norm});
    res.kernel_dim = static_cast<int>(dim_y());
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) /= eigenvalues_(k);
    res.E = Phi_ * c;
    return res;
  }

  const EigIndexSet eig = eig_index(lambda);
  if (!eig.empty()) {
    res.fredholm_case = 2;
    std::vector<double> violations;
    for (int k : eig.indices)
      if (std::abs(c(k)) > compat_tol) violations.push_back(std::abs(c(k)));
    if (!violations.empty())
      throw InfeasibleError(
          "linear_solve: right hand side pairs with Eig_lambda "
          "(Fredholm compatibility violated)",
          violations);
    res.kernel_dim = eig.dimension();
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      const bool kernel = std::find(eig.indices.begin(), eig.indices.end(),
                                    static_cast<int>(k)) != eig.indices.end();
      c(k) = kernel ? 0.0 : c(k) / (eigenvalues_(k) - lambda);
    }
  } else {
    res.fredholm_case = 1;
    for (Eigen::Index k = 0; k < c.size(); ++k)
      c(k) /= (eigenvalues_(k) - lambda);
  }
  // Gradient block of K e - lambda M e = M g forces E_2 = -g_2/lambda.
  res.E = Phi_ * c - split.f_Y / lambda;
  return res;
}

VecXd CavitySystem::x_lambda_project(const VecXd& f, double lambda,
                                     double match_tol) const {
  VecXd c = x_coords(f);
  for (int k : eig_index(lambda, match_tol).indices) c(k) = 0.0;
  return Phi_ * c;
}

VectorField CavitySystem::edges_to_cells(const VecXd& e) const {
  if (e.size() != n_edges_)
    throw DimensionError("edges_to_cells: edge vector length mismatch");
  VecXd cells = Q_ * e;
  VectorField out(grid_);
  Eigen::Map<VecXd>(out.data(), cells.size()) = cells;
  return out;
}

VecXd CavitySystem::cell_load(const VectorField& w) const {
  require_same_grid(w.grid(), grid_, "cell_load");
  Eigen::Map<const VecXd> v(w.data(), static_cast<Eigen::Index>(w.size()));
  return Q_.transpose() * v;
}

double CavitySystem::weak_residual_norm(const VecXd& r) const {
  return std::sqrt(std::max(0.0, r.dot(M_llt_->solve(r))));
}

std::string CavitySystem::summary_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["bc"] = to_string(bc_);
  j["dims"] = {{"n_per_axis", n_},
               {"edges", n_edges_},
               {"nodes", n_nodes_},
               {"faces", n_faces_},
               {"removed_boundary_edges", n_removed_}};
  j["kernel_dims"] = {{"dim_x", dim_x()}, {"dim_y", dim_y()}};
  j["eigenvalues"] = std::vector<double>(
      eigenvalues_.data(), eigenvalues_.data() + eigenvalues_.size());
  return j.dump(2);
}

void CavitySystem::export_matrices(const std::string& dir) const {
  auto dump = [&](const SpMat& M, const std::string& name) {
    std::ofstream out(dir + "/" + name + ".txt");
    if (!out) throw ConfigError("export_matrices: cannot write " + name);
    out << M.rows() << " " << M.cols() << " " << M.nonZeros() << "\n";
    for (int o = 0; o < M.outerSize(); ++o)
      for (SpMat::InnerIterator it(M, o); it; ++it)
        out << it.row() << " " << it.col() << " " << it.value() << "\n";
  };
  dump(G_, "G");
  dump(C_, "C");
  dump(M_eps_, "M_eps");
  dump(M_mu_inv_, "M_mu_inv");
  dump(K_, "K");
  dump(Q_, "Q");
}

}  // namespace nlmax
