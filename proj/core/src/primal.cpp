// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include "nlmax/primal.hpp"

#include <cmath>

namespace nlmax {

double primal_residual_cavity(const CavitySystem& sys, const VecXd& E_edges,
                              const Nonlinearity& nl, double omega_sq) {
  if (E_edges.size() != sys.num_edges())
    throw DimensionError("primal_residual_cavity: edge vector mismatch");
  const GridSpec& g = sys.grid();
  const double dv = g.cell_volume();

  const VectorField Ecells = sys.edges_to_cells(E_edges);
  VectorField fE(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t i = g.point_index(ix, iy, iz);
        const Vec3 x(g.point(ix, iy, iz).data());
        fE.set(i, nl.eval_f(x, Ecells.at(i)));
      }
  const VecXd load = dv * sys.cell_load(fE);
  const VecXd rho = sys.K() * E_edges -
                    omega_sq * (sys.M_eps() * E_edges) - load;
  const double denom = std::max(sys.weak_residual_norm(load), 1e-300);
  return sys.weak_residual_norm(rho) / denom;
}

double primal_residual_fullspace(const VectorField& E, const Nonlinearity& nl,
                                 double lambda) {
  const GridSpec& g = E.grid();
  VectorField curlcurlE = ifft(curlcurl_apply(fft(E)));
  VectorField resid = curlcurlE;
  VectorField fE(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t i = g.point_index(ix, iy, iz);
        const Vec3 x(g.point(ix, iy, iz).data());
        fE.set(i, nl.eval_f(x, E.at(i)));
        resid.set(i, resid.at(i) - lambda * E.at(i) - fE.at(i));
      }
  return lp_norm(resid, 2.0) / std::max(lp_norm(fE, 2.0), 1e-300);
}

DivCurlAudit div_curl_audit(const FullspaceDualProblem& prob,
                            const VectorField& P, int boxes_per_axis) {
  const GridSpec& g = prob.grid();
  if (boxes_per_axis < 1 || g.n % boxes_per_axis != 0)
    throw ConfigError("div_curl_audit: boxes_per_axis must divide n");
  const DualSplit split = prob.split(P);
  const double dv = g.cell_volume();

  DivCurlAudit out;
  out.whole_cell = inner_l2(split.p1_field, split.p2_field);
  out.whole_cell_rel =
      std::abs(out.whole_cell) /
      std::max(lp_norm(split.p1_field, 2.0) * lp_norm(split.p2_field, 2.0),
               1e-300);

  const int w = g.n / boxes_per_axis;
  for (int bi = 0; bi < boxes_per_axis; ++bi)
    for (int bj = 0; bj < boxes_per_axis; ++bj)
      for (int bk = 0; bk < boxes_per_axis; ++bk) {
        double acc = 0.0;
        for (int ix = bi * w; ix < (bi + 1) * w; ++ix)
          for (int iy = bj * w; iy < (bj + 1) * w; ++iy)
            for (int iz = bk * w; iz < (bk + 1) * w; ++iz) {
              const std::size_t m = g.point_index(ix, iy, iz);
              acc += split.p1_field.at(m).dot(split.p2_field.at(m));
            }
        out.subboxes.push_back({bi, bj, bk, acc * dv});
      }
  return out;
}

}  // namespace nlmax
