// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_GRID_HPP
#define NLMAX_GRID_HPP

#include <array>
#include <cstddef>
#include <cmath>
#include <string>

#include "nlmax/errors.hpp"

namespace nlmax {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class GridMode { periodic, cavity };

std::string to_string(GridMode m);
GridMode grid_mode_from_string(const std::string& s);

/// Uniform grid over the cube [0,L)^3 with n points (periodic mode) or
/// n cells (cavity mode) per axis. Point/cell (ix,iy,iz) is stored
/// row-major with z fastest; vector data is component-interleaved.
struct GridSpec {
  int n = 8;
  double cell_length = kTwoPi;
  GridMode mode = GridMode::periodic;

  GridSpec() = default;
  GridSpec(int n_per_axis, double length, GridMode m)
      : n(n_per_axis), cell_length(length), mode(m) {
    validate();
  }

  void validate() const {
    if (n < 4) throw ConfigError("GridSpec: n_per_axis must be >= 4");
    if ((n & (n - 1)) != 0)
      throw ConfigError("GridSpec: n_per_axis must be a power of two");
    if (!(cell_length > 0.0))
      throw ConfigError("GridSpec: cell_length must be positive");
    if (static_cast<std::size_t>(n) * n * n > (std::size_t{1} << 30))
      throw ConfigError("GridSpec: n^3 exceeds the addressable guard");
  }

  double spacing() const { return cell_length / n; }
  double cell_volume() const {
    const double h = spacing();
    return h * h * h;
  }
  std::size_t num_points() const {
    return static_cast<std::size_t>(n) * n * n;
  }

  std::size_t point_index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * n + iy) * n + iz;
  }

  /// Coordinates of point ix,iy,iz: grid nodes in periodic mode,
  /// cell centers in cavity mode.
  std::array<double, 3> point(int ix, int iy, int iz) const {
    const double h = spacing();
    const double off = (mode == GridMode::cavity) ? 0.5 : 0.0;
    return {(ix + off) * h, (iy + off) * h, (iz + off) * h};
  }

  bool operator==(const GridSpec& o) const {
    return n == o.n && cell_length == o.cell_length && mode == o.mode;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b,
                              const char* where) {
  if (a != b)
    throw DimensionError(std::string(where) + ": grids do not match");
}

}  // namespace nlmax

#endif  // NLMAX_GRID_HPP
