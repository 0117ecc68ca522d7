// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "nlmax/field_io.hpp"
#include "nlmax/spectral.hpp"

using namespace nlmax;

namespace {

VectorField constant_field(const GridSpec& g, const Vec3& v) {
  VectorField f(g);
  for (std::size_t i = 0; i < g.num_points(); ++i) f.set(i, v);
  return f;
}

VectorField random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorField f(g);
  for (double& v : f.raw()) v = gauss(rng);
  return f;
}

}  // namespace

TEST_CASE("inner_eps on trivial and constant fields") {
  const GridSpec g(4, 1.0, GridMode::periodic);  // unit-volume cell
  const Medium m(1.0, 1.0, 0.0);

  CHECK(inner_eps(VectorField(g), VectorField(g), m) == 0.0);

  const VectorField e = constant_field(g, Vec3(1, 0, 0));
  CHECK(inner_eps(e, e, m) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("inner_eps with anisotropic permittivity (direct summation oracle)") {
  const GridSpec g(4, 1.0, GridMode::cavity);
  Medium m(1.0, 1.0, 0.0);
  std::vector<Mat3> eps(g.num_points(),
                        Mat3(Vec3(2, 1, 1).asDiagonal())),
      mu(g.num_points(), Mat3::Identity());
  m.set_cell_media(g, eps, mu);

  const VectorField e = constant_field(g, Vec3(1, 0, 0));
  // Oracle: sum_x (diag(2,1,1)(1,0,0)).(1,0,0) dV = 2 * volume = 2.
  CHECK(inner_eps(e, e, m) == doctest::Approx(2.0).epsilon(1e-14));

  // Exact symmetry: identical summation order on both sides.
  const VectorField f = random_field(g, 7);
  CHECK(inner_eps(e, f, m) == inner_eps(f, e, m));
}

TEST_CASE("inner_eps grid mismatch raises") {
  const Medium m(1.0, 1.0, 0.0);
  VectorField a(GridSpec(4, 1.0, GridMode::periodic));
  VectorField b(GridSpec(8, 1.0, GridMode::periodic));
  CHECK_THROWS_AS(inner_eps(a, b, m), DimensionError);
}

TEST_CASE("energy norm: zero, curl-free, and single-mode fields") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  const Medium m(1.0, 1.0, 0.0);

  CHECK(energy_norm_sq(VectorField(g), VectorField(g), m) == 0.0);

  // Gradient field: the curl term vanishes, leaving the L2 mass.
  ScalarSpectralField u(g);
  u.raw()[g.point_index(1, 0, 0)] = Cplx(0.0, -0.5);
  u.raw()[g.point_index(g.n - 1, 0, 0)] = Cplx(0.0, 0.5);  // sin(x1)
  const VectorField gradu = ifft(grad_op(u));
  const VectorField curl_gradu = ifft(curl_op(grad_op(u)));
  const double l2sq = std::pow(lp_norm(gradu, 2.0), 2);
  CHECK(energy_norm_sq(gradu, curl_gradu, m) ==
        doctest::Approx(l2sq).epsilon(1e-12));

  // E = (0,0,cos x1) on the (2pi)^3 box: analytic integration gives
  // int |curl E|^2 + |E|^2 = 2 * (2pi)^3 / 2.
  VectorField e(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz)
        e(ix, iy, iz, 2) = std::cos(g.point(ix, iy, iz)[0]);
  const VectorField curl_e = ifft(curl_op(fft(e)));
  const double box = std::pow(kTwoPi, 3);
  CHECK(energy_norm_sq(e, curl_e, m) == doctest::Approx(box).epsilon(1e-12));
}

TEST_CASE("lp_norm basics") {
  const GridSpec g(4, 1.0, GridMode::periodic);
  CHECK(lp_norm(VectorField(g), 2.0) == 0.0);
  const VectorField e = constant_field(g, Vec3(0, 1, 0));
  CHECK(lp_norm(e, 2.0) == doctest::Approx(1.0).epsilon(1e-14));

  VectorField f = e;
  f(2, 1, 3, 1) = 5.0;
  CHECK(lp_norm(f, std::numeric_limits<double>::infinity()) ==
        doctest::Approx(5.0));
  CHECK_THROWS_AS(lp_norm(e, 0.5), ConfigError);
}

TEST_CASE("norm equivalence against the positivity floor") {
  const GridSpec g(4, 1.0, GridMode::cavity);
  Medium m(1.0, 1.0, 0.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Mat3> eps, mu;
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.num_points(); ++i) {
    Mat3 a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = gauss(rng);
    Mat3 spd = a * a.transpose() + 0.3 * Mat3::Identity();
    Eigen::SelfAdjointEigenSolver<Mat3> es(spd, Eigen::EigenvaluesOnly);
    floor = std::min(floor, es.eigenvalues().minCoeff());
    eps.push_back(spd);
    mu.push_back(Mat3::Identity());
  }
  m.set_cell_media(g, eps, mu);

  const VectorField e = random_field(g, 11);
  const double l2sq = std::pow(lp_norm(e, 2.0), 2);
  CHECK(inner_eps(e, e, m) >= floor * l2sq * (1.0 - 1e-12));
  CHECK(energy_norm_sq(e, VectorField(g), m) >= floor * l2sq * (1.0 - 1e-12));
}

TEST_CASE("medium validation") {
  CHECK_THROWS_AS(Medium(-1.0, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(Medium(1.0, 1.0, -0.5), ConfigError);

  const GridSpec g(4, 1.0, GridMode::cavity);
  Medium m(1.0, 1.0, 0.0);
  std::vector<Mat3> eps(g.num_points(), Mat3::Identity()),
      mu(g.num_points(), Mat3::Identity());
  eps[5](0, 0) = -2.0;  // indefinite cell
  CHECK_THROWS_AS(m.set_cell_media(g, eps, mu), ConfigError);
}

TEST_CASE("field file round trip and sidecar validation") {
  const GridSpec g(4, 2.0, GridMode::periodic);
  const VectorField e = random_field(g, 21);
  const std::string path = "test_field_io.f64";
  write_field(e, path);
  const VectorField back = read_field(path);
  CHECK(back.grid() == g);
  for (std::size_t i = 0; i < e.size(); ++i)
    CHECK(back.data()[i] == e.data()[i]);

  // Corrupt the sidecar: schema error, no partial read.
  {
    std::ofstream bad(path + ".json");
    bad << "{\"n_per_axis\": 4}";
  }
  CHECK_THROWS_AS(read_field(path), ConfigError);
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec(3, 1.0, GridMode::periodic), ConfigError);
  CHECK_THROWS_AS(GridSpec(6, 1.0, GridMode::periodic), ConfigError);
  CHECK_THROWS_AS(GridSpec(8, -1.0, GridMode::periodic), ConfigError);
  const GridSpec g(8, 2.0, GridMode::periodic);
  CHECK(g.cell_volume() == doctest::Approx(std::pow(0.25, 3)));
}
