// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_PRIMAL_HPP
#define NLMAX_PRIMAL_HPP

#include "nlmax/dual.hpp"

namespace nlmax {

/// Weak residual of curl(mu^-1 curl E) - omega^2 eps E = f(x,E) on the
/// cavity, tested against the full edge space in the dual (M^-1) norm
/// and normalized by the load |f(x,E)|.
double primal_residual_cavity(const CavitySystem& sys, const VecXd& E_edges,
                              const Nonlinearity& nl, double omega_sq);

/// Pointwise residual of curlcurl E - lambda E = f(x,E) on the periodic
/// box (all retained Fourier modes), relative to |f(x,E)|_2.
double primal_residual_fullspace(const VectorField& E, const Nonlinearity& nl,
                                 double lambda);

struct SubboxEntry {
  int i, j, k;
  double integral;
};

struct DivCurlAudit {
  double whole_cell;                 // int P1 . P2 over the full box
  double whole_cell_rel;             // relative to |P1|_2 |P2|_2
  std::vector<SubboxEntry> subboxes; // reported, not asserted
};

/// Div-Curl pairing audit for a full-space dual state: the whole-cell
/// integral vanishes by Fourier orthogonality; the subbox lattice
/// integrals are reported as-is (they need not vanish).
DivCurlAudit div_curl_audit(const FullspaceDualProblem& prob,
                            const VectorField& P, int boxes_per_axis);

}  // namespace nlmax

#endif  // NLMAX_PRIMAL_HPP
