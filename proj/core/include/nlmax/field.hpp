// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_FIELD_HPP
#define NLMAX_FIELD_HPP

#include <cstddef>
#include <vector>

#include "nlmax/grid.hpp"
#include "nlmax/medium.hpp"

namespace nlmax {

/// Real 3-component vector field sampled on a GridSpec. Storage is
/// row-major with z fastest and the three components interleaved:
/// data[3*((ix*n+iy)*n+iz) + c].
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const GridSpec& grid)
      : grid_(grid), data_(3 * grid.num_points(), 0.0) {}
  VectorField(const GridSpec& grid, std::vector<double> data)
      : grid_(grid), data_(std::move(data)) {
    if (data_.size() != 3 * grid_.num_points())
      throw DimensionError("VectorField: data length != 3*n^3");
  }

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return data_.size(); }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  double& operator()(int ix, int iy, int iz, int c) {
    return data_[3 * grid_.point_index(ix, iy, iz) + c];
  }
  double operator()(int ix, int iy, int iz, int c) const {
    return data_[3 * grid_.point_index(ix, iy, iz) + c];
  }

  Vec3 at(std::size_t point) const {
    return Vec3(data_[3 * point], data_[3 * point + 1], data_[3 * point + 2]);
  }
  void set(std::size_t point, const Vec3& v) {
    data_[3 * point] = v[0];
    data_[3 * point + 1] = v[1];
    data_[3 * point + 2] = v[2];
  }

  bool all_finite() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);

 private:
  GridSpec grid_;
  std::vector<double> data_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// Weighted inner product <E,F>_eps = sum_x eps(x) E(x).F(x) dV.
/// Summation order is fixed (x index ascending), so the product is
/// exactly symmetric in its arguments.
double inner_eps(const VectorField& E, const VectorField& F, const Medium& m);

/// Plain L2 pairing sum_x E.F dV.
double inner_l2(const VectorField& E, const VectorField& F);

/// Energy norm of Eq-(1.3) type: int mu^-1 |curl E|^2 + eps |E|^2 dx.
/// curlE must be the discrete curl of E on the same grid.
double energy_norm_sq(const VectorField& E, const VectorField& curlE,
                      const Medium& m);

/// (sum |E(x)|^p dV)^(1/p) with pointwise Euclidean norm; p = inf
/// (std::numeric_limits::infinity) returns the max pointwise norm.
double lp_norm(const VectorField& E, double p);

}  // namespace nlmax

#endif  // NLMAX_FIELD_HPP
