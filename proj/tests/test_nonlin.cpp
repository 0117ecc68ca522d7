// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "nlmax/nonlin.hpp"

using namespace nlmax;

namespace {

// Adaptive Simpson quadrature, the independent oracle for primitives.
double simpson(const std::function<double(double)>& f, double a, double b,
               int depth = 24, double tol = 1e-12) {
  const double m = 0.5 * (a + b);
  const double whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
  auto half = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
  };
  const double left = half(a, m), right = half(m, b);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, depth - 1, tol / 2) +
         simpson(f, m, b, depth - 1, tol / 2);
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat3> qr(a);
  Mat3 q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

}  // namespace

TEST_CASE("power nonlinearity closed forms") {
  auto nl = Nonlinearity::power(4.0);
  const Vec3 x(0.2, 0.5, 0.9);

  CHECK(nl.eval_f(x, Vec3::Zero()) == Vec3::Zero());
  // p = 4, a = 1, E = (2,0,0): f = |E|^2 E = (8,0,0).
  CHECK((nl.eval_f(x, Vec3(2, 0, 0)) - Vec3(8, 0, 0)).norm() < 1e-14);
  // psi0(8) = 2 (cube root).
  CHECK(nl.psi0(x, 8.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(nl.eval_psi(x, Vec3::Zero()) == Vec3::Zero());

  // F matches the quadrature of f0 along the ray.
  for (double s : {0.3, 1.0, 4.7}) {
    const double oracle =
        simpson([&](double t) { return nl.f0(x, t); }, 0.0, s);
    CHECK(nl.F0(x, s) == doctest::Approx(oracle).epsilon(1e-10));
    const double psi_oracle =
        simpson([&](double t) { return nl.psi0(x, t); }, 0.0, s);
    CHECK(nl.Psi0(x, s) == doctest::Approx(psi_oracle).epsilon(1e-10));
  }
}

TEST_CASE("exponent windows enforced") {
  CHECK_THROWS_AS(Nonlinearity::power(2.0), ConfigError);
  CHECK_THROWS_AS(Nonlinearity::power(6.0), ConfigError);
  CHECK_THROWS_AS(Nonlinearity::power(3.5, Weight::constant(1.0), true),
                  ConfigError);
  CHECK_NOTHROW(Nonlinearity::power(4.5, Weight::constant(1.0), true));
}

TEST_CASE("custom monotone f0 = 2 s^3 against the closed form") {
  auto nl = Nonlinearity::custom(
      4.0, [](const Vec3&, double s) { return 2.0 * s * s * s; },
      [](const Vec3&, double s) { return 6.0 * s * s; });
  const Vec3 x = Vec3::Zero();
  // Bisection/Newton inverse matches (16/2)^(1/3) = 2.
  CHECK(nl.psi0(x, 16.0) == doctest::Approx(2.0).epsilon(1e-12));
  // Psi via adaptive quadrature matches the closed form
  // int_0^z (t/2)^(1/3) dt = (3/4) 2^(-1/3) z^(4/3).
  const double z = 5.0;
  const double closed = 0.75 * std::pow(2.0, -1.0 / 3.0) * std::pow(z, 4.0 / 3.0);
  CHECK(nl.Psi0(x, z) == doctest::Approx(closed).epsilon(1e-9));
}

TEST_CASE("roundtrips over six magnitude decades") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Nonlinearity> kinds;
  for (double p : {3.0, 4.0, 5.0}) kinds.push_back(Nonlinearity::power(p));
  kinds.push_back(Nonlinearity::custom(
      4.0, [](const Vec3&, double s) { return 2.0 * s * s * s; },
      [](const Vec3&, double s) { return 6.0 * s * s; }));
  kinds.push_back(
      Nonlinearity::power(4.0, Weight::cosine(0.3, 2, kTwoPi)));

  for (const auto& nl : kinds)
    for (int dec = -3; dec <= 2; ++dec)
      for (int rep = 0; rep < 4; ++rep) {
        Vec3 v(unit(rng), unit(rng), unit(rng));
        v = v.normalized() * std::pow(10.0, dec) * (0.5 + 0.5 * unit(rng) + 0.6);
        const Vec3 x(0.7, 1.9, 3.4);
        const Vec3 a = nl.eval_psi(x, nl.eval_f(x, v));
        CHECK((a - v).norm() <= 1e-10 * (1.0 + v.norm()));
        const Vec3 b = nl.eval_f(x, nl.eval_psi(x, v));
        CHECK((b - v).norm() <= 1e-10 * (1.0 + v.norm()));
      }
}

TEST_CASE("radial structure: rotation equivariance and oddness") {
  std::mt19937_64 rng(211);
  auto nl = Nonlinearity::power(3.5);
  const Vec3 x(1.0, 2.0, 3.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Mat3 R = random_rotation(rng);
    const Vec3 e(gauss(rng), gauss(rng), gauss(rng));
    CHECK((nl.eval_f(x, Mat3(R) * e) - R * nl.eval_f(x, e)).norm() < 1e-12);
    CHECK((nl.eval_psi(x, Mat3(R) * e) - R * nl.eval_psi(x, e)).norm() < 1e-12);
    CHECK((nl.eval_f(x, Vec3(-e)) + nl.eval_f(x, e)).norm() < 1e-15);
  }
}

TEST_CASE("Young-type duality of the primitives") {
  auto nl = Nonlinearity::power(4.0, Weight::cosine(0.3, 2, kTwoPi));
  const Vec3 x(0.9, 0.1, 2.2);
  for (double s : {0.2, 1.0, 3.7}) {
    const double z = nl.f0(x, s);
    // int_0^{f0(s)} psi0 + int_0^s f0 = s f0(s).
    const double lhs = nl.Psi0(x, z) + nl.F0(x, s);
    CHECK(lhs == doctest::Approx(s * z).epsilon(1e-10));
  }
}

TEST_CASE("assumption validator on the pure power law") {
  auto nl = Nonlinearity::power(4.0);
  SampleSpec spec;
  ValidationReport rep = validate_assumptions(nl, spec);
  CHECK(rep.f0_increasing);
  CHECK(rep.s_inv_f0_increasing);
  // c1 = c2 = (p-2)/(2p) = 1/4 feasible (closed-form integration).
  CHECK(rep.c1_max == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(rep.c2_max == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(rep.a3_feasible);
  CHECK(rep.a3prime_feasible);
  // (A4) holds with c = C = a (p-1).
  CHECK(rep.a4_c == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(rep.a4_C == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(rep.a4_feasible);
  CHECK(nl.constants.set);
}

TEST_CASE("validator flags f0 = s^3 + s") {
  // The upper bound f0(s) s <~ s^p fails near 0 (sampled at 1e-3), and
  // ds f0 / s^(p-2) blows up, so (A4) fails too.
  auto nl = Nonlinearity::custom(
      4.0, [](const Vec3&, double s) { return s * s * s + s; },
      [](const Vec3&, double s) { return 3.0 * s * s + 1.0; });
  SampleSpec spec;
  ValidationReport rep = validate_assumptions(nl, spec);
  CHECK(rep.f0_increasing);
  CHECK(rep.c2_max < 1e-4);
  CHECK_FALSE(rep.a3_feasible);
  CHECK_FALSE(rep.a4_feasible);
}

TEST_CASE("monotonicity gap: sign, zero case, bounded ratio") {
  const GridSpec g(4, kTwoPi, GridMode::periodic);
  auto nl = Nonlinearity::power(4.5, Weight::constant(1.0), true);
  std::mt19937_64 rng(307);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto rand_field = [&] {
    VectorField f(g);
    for (double& v : f.raw()) v = gauss(rng);
    return f;
  };

  const VectorField p = rand_field();
  auto same = monotonicity_gap(p, p, nl);
  CHECK(same.gap == 0.0);
  CHECK(same.bound_ratio == 0.0);

  auto zero = monotonicity_gap(p, VectorField(g), nl);
  CHECK(zero.gap >= 0.0);

  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    auto mg = monotonicity_gap(rand_field(), rand_field(), nl);
    CHECK(mg.gap >= 0.0);
    worst = std::max(worst, mg.bound_ratio);
  }
  // Empirical constant of the Hoelder-type estimate over the sweep.
  CHECK(worst < 10.0);
}

TEST_CASE("weights: floors and off-grid rejection") {
  CHECK_THROWS_AS(Weight::constant(0.0), ConfigError);
  const Weight w = Weight::cosine(0.3, 2, kTwoPi);
  CHECK(w.floor() == doctest::Approx(0.7));
  CHECK(w(Vec3::Zero()) == doctest::Approx(1.3));

  const GridSpec g(4, kTwoPi, GridMode::periodic);
  std::vector<double> vals(g.num_points(), 2.0);
  const Weight ws = Weight::from_samples(g, vals);
  CHECK(ws(Vec3(0, 0, 0)) == 2.0);
  CHECK_THROWS_AS(ws(Vec3(0.1, 0, 0)), DimensionError);
}
