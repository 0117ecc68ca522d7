// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include "nlmax/field.hpp"

#include <cmath>
#include <limits>

namespace nlmax {

std::string to_string(GridMode m) {
  return m == GridMode::periodic ? "periodic" : "cavity";
}

GridMode grid_mode_from_string(const std::string& s) {
  if (s == "periodic") return GridMode::periodic;
  if (s == "cavity") return GridMode::cavity;
  throw ConfigError("unknown grid mode: " + s);
}

bool VectorField::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

VectorField& VectorField::operator+=(const VectorField& o) {
  require_same_grid(grid_, o.grid_, "VectorField::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  require_same_grid(grid_, o.grid_, "VectorField::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

double inner_eps(const VectorField& E, const VectorField& F, const Medium& m) {
  require_same_grid(E.grid(), F.grid(), "inner_eps");
  const std::size_t np = E.grid().num_points();
  const double dv = E.grid().cell_volume();
  double acc = 0.0;
  if (m.has_cell_media()) {
    if (m.eps_cells.size() != np)
      throw DimensionError("inner_eps: medium sized off the grid");
    for (std::size_t i = 0; i < np; ++i)
      acc += E.at(i).dot(m.eps_cells[i] * F.at(i));
  } else {
    const double* e = E.data();
    const double* f = F.data();
    for (std::size_t i = 0; i < 3 * np; ++i) acc += e[i] * f[i];
    acc *= m.eps0;
  }
  return acc * dv;
}

double inner_l2(const VectorField& E, const VectorField& F) {
  Medium unit;
  return inner_eps(E, F, unit);
}

double energy_norm_sq(const VectorField& E, const VectorField& curlE,
                      const Medium& m) {
  require_same_grid(E.grid(), curlE.grid(), "energy_norm_sq");
  const std::size_t np = E.grid().num_points();
  const double dv = E.grid().cell_volume();
  double acc = 0.0;
  if (m.has_cell_media()) {
    for (std::size_t i = 0; i < np; ++i) {
      acc += curlE.at(i).dot(m.mu_cells[i].inverse() * curlE.at(i));
      acc += E.at(i).dot(m.eps_cells[i] * E.at(i));
    }
  } else {
    const double* e = E.data();
    const double* c = curlE.data();
    for (std::size_t i = 0; i < 3 * np; ++i)
      acc += c[i] * c[i] / m.mu0 + m.eps0 * e[i] * e[i];
  }
  return acc * dv;
}

double lp_norm(const VectorField& E, double p) {
  if (p < 1.0) throw ConfigError("lp_norm: p must be >= 1");
  const std::size_t np = E.grid().num_points();
  if (std::isinf(p)) {
    double mx = 0.0;
    for (std::size_t i = 0; i < np; ++i) mx = std::max(mx, E.at(i).norm());
    return mx;
  }
  const double dv = E.grid().cell_volume();
  double acc = 0.0;
  for (std::size_t i = 0; i < np; ++i) acc += std::pow(E.at(i).norm(), p);
  return std::pow(acc * dv, 1.0 / p);
}

}  // namespace nlmax
