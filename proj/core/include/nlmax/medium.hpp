// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_MEDIUM_HPP
#define NLMAX_MEDIUM_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "nlmax/errors.hpp"
#include "nlmax/grid.hpp"

namespace nlmax {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Material data: scalar constants eps0, mu0 and the frequency, plus
/// optional per-cell SPD 3x3 permittivity/permeability for cavity runs.
/// Media violating uniform positive definiteness (smallest eigenvalue
/// below the floor) are rejected at construction, not mid-solve.
struct Medium {
  double eps0 = 1.0;
  double mu0 = 1.0;
  double omega_sq = 0.0;
  double positivity_floor = 1e-8;

  // Per-cell matrices, row-major over the cavity cell grid. Empty in
  // periodic mode (the full-space problem requires constant media).
  std::vector<Mat3> eps_cells;
  std::vector<Mat3> mu_cells;

  Medium() = default;
  Medium(double e0, double m0, double w2) : eps0(e0), mu0(m0), omega_sq(w2) {
    validate_scalars();
  }

  double lambda() const { return omega_sq * eps0 * mu0; }
  bool has_cell_media() const { return !eps_cells.empty(); }

  void validate_scalars() const {
    if (!(eps0 > 0.0) || !(mu0 > 0.0))
      throw ConfigError("Medium: eps0 and mu0 must be positive");
    if (omega_sq < 0.0)
      throw ConfigError("Medium: omega_sq must be nonnegative");
  }

  /// Smallest eigenvalue over all stored matrices (scalars if none).
  double min_eigenvalue() const {
    double lo = std::min(eps0, mu0);
    for (const auto* cells : {&eps_cells, &mu_cells}) {
      for (const Mat3& m : *cells) {
        Eigen::SelfAdjointEigenSolver<Mat3> es(m, Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
      }
    }
    return lo;
  }

  /// Attach per-cell matrices for a cavity grid; checks symmetry and the
  /// positivity floor on every cell.
  void set_cell_media(const GridSpec& grid, std::vector<Mat3> eps,
                      std::vector<Mat3> mu) {
    if (grid.mode != GridMode::cavity)
      throw ConfigError("Medium: per-cell media are cavity-only");
    if (eps.size() != grid.num_points() || mu.size() != grid.num_points())
      throw DimensionError("Medium: cell media sized off the grid");
    for (const auto* cells : {&eps, &mu}) {
      for (const Mat3& m : *cells) {
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * m.norm())
          throw ConfigError("Medium: cell matrix not symmetric");
        Eigen::SelfAdjointEigenSolver<Mat3> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < positivity_floor)
          throw ConfigError("Medium: cell matrix below positivity floor");
      }
    }
    eps_cells = std::move(eps);
    mu_cells = std::move(mu);
  }

  Mat3 eps_at(std::size_t cell) const {
    return has_cell_media() ? eps_cells[cell] : Mat3(eps0 * Mat3::Identity());
  }
  Mat3 mu_at(std::size_t cell) const {
    return has_cell_media() ? mu_cells[cell] : Mat3(mu0 * Mat3::Identity());
  }
};

}  // namespace nlmax

#endif  // NLMAX_MEDIUM_HPP
