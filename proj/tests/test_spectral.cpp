// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "nlmax/spectral.hpp"

using namespace nlmax;

namespace {

VectorField random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorField f(g);
  for (double& v : f.raw()) v = gauss(rng);
  return f;
}

double spectral_l2(const SpectralField& e) {
  double acc = 0.0;
  for (const Cplx& c : e.raw()) acc += std::norm(c);
  return std::pow(e.grid().cell_length, 3) * acc;
}

double field_linf_diff(const VectorField& a, const VectorField& b) {
  double mx = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    mx = std::max(mx, std::abs(a.data()[i] - b.data()[i]));
  return mx;
}

}  // namespace

TEST_CASE("fft of a constant field concentrates at xi = 0") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  VectorField e(g);
  for (std::size_t i = 0; i < g.num_points(); ++i) e.set(i, Vec3(1, 2, -3));
  const SpectralField ehat = fft(e);
  CHECK((ehat.at(0) - Vec3c(1, 2, -3)).norm() < 1e-13);
  double off = 0.0;
  for (std::size_t m = 1; m < g.num_points(); ++m)
    off = std::max(off, ehat.at(m).norm());
  CHECK(off < 1e-13);
}

TEST_CASE("fft/ifft round trip and Parseval (direct-sum oracle)") {
  const GridSpec g(16, kTwoPi, GridMode::periodic);
  const VectorField e = random_field(g, 5);
  const SpectralField ehat = fft(e);

  const VectorField back = ifft(ehat);
  double scale = lp_norm(e, std::numeric_limits<double>::infinity());
  CHECK(field_linf_diff(e, back) < 1e-12 * scale);

  const double parseval = spectral_l2(ehat);
  const double direct = std::pow(lp_norm(e, 2.0), 2);
  CHECK(parseval == doctest::Approx(direct).epsilon(1e-12));

  CHECK(ehat.hermitian_defect() < 1e-13);
}

TEST_CASE("derivative operators: curl of gradient, div of curl") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  const SpectralField ehat = fft(random_field(g, 9));
  const double scale = std::sqrt(spectral_l2(ehat));

  // div(curl E) = 0 exactly in symbol space.
  ScalarSpectralField dc = div_op(curl_op(ehat));
  double mx = 0.0;
  for (const Cplx& c : dc.raw()) mx = std::max(mx, std::abs(c));
  CHECK(mx < 1e-12 * scale);

  // curl(grad u) = 0.
  ScalarSpectralField u(g);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorField uf = random_field(g, 13);
  // build a real scalar via the x-component of a random field
  ScalarSpectralField uhat(g);
  {
    VectorField tmp(g);
    for (std::size_t i = 0; i < g.num_points(); ++i)
      tmp.set(i, Vec3(uf.at(i)[0], 0, 0));
    SpectralField t = fft(tmp);
    for (std::size_t m = 0; m < g.num_points(); ++m)
      uhat.raw()[m] = t.at(m)[0];
  }
  SpectralField cg = curl_op(grad_op(uhat));
  double mx2 = 0.0;
  for (const Cplx& c : cg.raw()) mx2 = std::max(mx2, std::abs(c));
  CHECK(mx2 < 1e-12 * scale);
}

TEST_CASE("curl of a single mode against a finite-difference oracle") {
  const GridSpec g(16, kTwoPi, GridMode::periodic);
  VectorField e(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz)
        e(ix, iy, iz, 2) = std::cos(g.point(ix, iy, iz)[0]);
  const VectorField curl = ifft(curl_op(fft(e)));

  // Central differences of the continuous field at h -> 0 (Richardson
  // pair h, h/2 to reach ~1e-11 truncation).
  auto analytic_curl_y = [](double x1) { return std::sin(x1); };
  double worst = 0.0;
  for (int ix = 0; ix < g.n; ++ix) {
    const double x1 = g.point(ix, 0, 0)[0];
    const double h = 1e-4;
    auto fd = [&](double hh) {
      return -(std::cos(x1 + hh) - std::cos(x1 - hh)) / (2.0 * hh);
    };
    const double rich = (4.0 * fd(h / 2) - fd(h)) / 3.0;
    CHECK(rich == doctest::Approx(analytic_curl_y(x1)).epsilon(1e-10));
    worst = std::max(worst, std::abs(curl(ix, 3, 5, 1) - rich));
    // remaining components vanish
    worst = std::max(worst, std::abs(curl(ix, 3, 5, 0)));
    worst = std::max(worst, std::abs(curl(ix, 3, 5, 2)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("helmholtz projection: transverse and longitudinal single modes") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  // xi = (0,0,1): coefficient (1,0,0) is transverse.
  SpectralField trans(g);
  trans(0, 0, 1, 0) = Cplx(1, 0);
  auto [t1, t2] = helmholtz_project(trans);
  CHECK((t1.at(g.point_index(0, 0, 1)) - Vec3c(1, 0, 0)).norm() < 1e-15);
  CHECK(t2.at(g.point_index(0, 0, 1)).norm() < 1e-15);

  // coefficient (0,0,1) along xi = (0,0,1) is longitudinal.
  SpectralField lon(g);
  lon(0, 0, 1, 2) = Cplx(1, 0);
  auto [l1, l2] = helmholtz_project(lon);
  CHECK(l1.at(g.point_index(0, 0, 1)).norm() < 1e-15);
  CHECK((l2.at(g.point_index(0, 0, 1)) - Vec3c(0, 0, 1)).norm() < 1e-15);

  // The xi = 0 mode goes to the divergence-free part.
  SpectralField mean(g);
  mean(0, 0, 0, 1) = Cplx(2, 0);
  auto [m1, m2] = helmholtz_project(mean);
  CHECK((m1.at(0) - Vec3c(0, 2, 0)).norm() == 0.0);
  CHECK(m2.at(0).norm() == 0.0);
}

TEST_CASE("helmholtz projection identities on random fields") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  const VectorField e = random_field(g, 17);
  auto [e1, e2] = helmholtz_project(fft(e));
  const double scale = std::pow(lp_norm(e, 2.0), 2);

  // L2 orthogonality via the real-space pairing (Parseval oracle).
  const double ip = inner_l2(ifft(e1), ifft(e2));
  CHECK(std::abs(ip) < 1e-12 * scale);

  // Exact sum decomposition in coefficient space.
  double mx = 0.0;
  for (std::size_t m = 0; m < g.num_points(); ++m)
    mx = std::max(mx,
                  (e1.at(m) + e2.at(m) - fft(e).at(m)).norm());
  CHECK(mx < 1e-13 * std::sqrt(scale));

  CHECK(divergence_defect(e1) < 1e-12);
  CHECK(curlfree_is_gradient_check(e2));
}

TEST_CASE("curlcurl multiplier: identities and operator composition") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  const SpectralField ehat = fft(random_field(g, 23));
  auto [e1, e2] = helmholtz_project(ehat);
  const double scale = std::sqrt(spectral_l2(ehat));

  // On divergence-free fields: |xi|^2 multiplier (minus the Laplacian).
  SpectralField cc = curlcurl_apply(e1);
  double mx = 0.0;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        const Vec3c want =
            wavevector(g, ix, iy, iz).squaredNorm() * e1.at(m);
        mx = std::max(mx, (cc.at(m) - want).norm());
      }
  CHECK(mx < 1e-12 * scale);

  // Gradient fields are annihilated.
  SpectralField cc2 = curlcurl_apply(e2);
  double mx2 = 0.0;
  for (const Cplx& c : cc2.raw()) mx2 = std::max(mx2, std::abs(c));
  CHECK(mx2 < 1e-12 * scale);

  // Composition oracle: curl(curl(.)) equals the multiplier form.
  SpectralField comp = curl_op(curl_op(ehat));
  SpectralField mult = curlcurl_apply(ehat);
  double mx3 = 0.0;
  for (std::size_t m = 0; m < g.num_points(); ++m)
    mx3 = std::max(mx3, (comp.at(m) - mult.at(m)).norm());
  CHECK(mx3 < 1e-12 * scale);
}

TEST_CASE("resolvent multiplier arithmetic on single modes") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  SpectralField mode(g);
  mode(0, 0, 1, 0) = Cplx(1, 0);  // |xi|^2 = 1, transverse

  // lambda = 2: multiplier 1/(1-2) = -1.
  SpectralField r0 = resolvent_R(mode, 2.0, 0.0, 1e-6);
  CHECK(r0.at(g.point_index(0, 0, 1))[0].real() == doctest::Approx(-1.0));

  // Regularized: -1/(1+eps^2)  (complex arithmetic oracle).
  const double eps = 0.3;
  SpectralField re = resolvent_R(mode, 2.0, eps, 0.0);
  const Cplx oracle = (Cplx(1.0, 0.0) / Cplx(1.0 - 2.0, -eps));
  CHECK(re.at(g.point_index(0, 0, 1))[0].real() ==
        doctest::Approx(oracle.real()).epsilon(1e-14));
}

TEST_CASE("resolvent inverts -Laplace - lambda on divergence-free input") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  const SpectralField ghat = project_divfree(fft(random_field(g, 29)));
  const double lambda = 2.5;
  const SpectralField rg = resolvent_R(ghat, lambda, 0.0, 1e-6 * lambda);

  CHECK(divergence_defect(rg) < 1e-10);

  // Apply curlcurl - lambda (== -Laplace - lambda on div-free fields).
  SpectralField lhs = curlcurl_apply(rg);
  double mx = 0.0, scale = std::sqrt(spectral_l2(ghat));
  for (std::size_t m = 0; m < g.num_points(); ++m)
    mx = std::max(mx, (lhs.at(m) - lambda * rg.at(m) - ghat.at(m)).norm());
  CHECK(mx < 1e-12 * scale);

  // Self-adjointness on the divergence-free subspace.
  const SpectralField hhat = project_divfree(fft(random_field(g, 31)));
  const double a = inner_l2(ifft(rg), ifft(hhat));
  const double b = inner_l2(ifft(ghat), ifft(resolvent_R(hhat, lambda, 0.0, 1e-6)));
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("resolvent error paths") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  const SpectralField ghat = project_divfree(fft(random_field(g, 37)));
  CHECK_THROWS_AS(resolvent_R(ghat, 1.0, 0.0, 1e-6), ResonanceError);

  const SpectralField bad = fft(random_field(g, 41));  // has gradient content
  CHECK_THROWS_AS(resolvent_R(bad, 2.5, 0.0, 1e-6), DimensionError);
}

TEST_CASE("limiting absorption: eps -> 0 at observed order >= 1.9") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  const SpectralField ghat = project_divfree(fft(random_field(g, 43)));
  const double lambda = 2.5;
  const VectorField exact = ifft(resolvent_R(ghat, lambda, 0.0, 1e-6));
  double prev = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const double eps = std::pow(10.0, -k);
    VectorField diff = ifft(resolvent_R(ghat, lambda, eps, 0.0));
    diff -= exact;
    const double err = lp_norm(diff, 2.0);
    if (k > 1) CHECK(std::log10(prev / err) >= 1.9);
    prev = err;
  }
}

TEST_CASE("curl-free certificate and potential recovery") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  // A gradient field passes and its potential is recovered.
  ScalarSpectralField u(g);
  std::mt19937_64 rng(47);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorField seed = random_field(g, 47);
  SpectralField shat = fft(seed);
  for (std::size_t m = 0; m < g.num_points(); ++m) u.raw()[m] = shat.at(m)[0];
  u.raw()[0] = 0.0;  // mean-free potential
  const SpectralField grad = grad_op(u);
  ScalarSpectralField rec(g);
  CHECK(curlfree_is_gradient_check(grad, 1e-10, &rec));
  double mx = 0.0;
  for (std::size_t m = 1; m < g.num_points(); ++m)
    mx = std::max(mx, std::abs(rec.raw()[m] - u.raw()[m]));
  CHECK(mx < 1e-10);

  // A transverse single mode fails.
  SpectralField trans(g);
  trans(0, 0, 1, 0) = Cplx(1, 0);
  CHECK_FALSE(curlfree_is_gradient_check(trans));

  // The gradient component of any field passes (projection composition).
  const SpectralField e2 = project_gradient(fft(random_field(g, 53)));
  CHECK(curlfree_is_gradient_check(e2));
}

TEST_CASE("periodic shift is exact index rolling") {
  const GridSpec g(8, kTwoPi, GridMode::periodic);
  const VectorField e = random_field(g, 59);
  const VectorField s = periodic_shift(e, 3, 0, 5);
  CHECK(s(3, 0, 5, 1) == e(0, 0, 0, 1));
  const VectorField back = periodic_shift(s, -3, 0, -5);
  CHECK(field_linf_diff(e, back) == 0.0);
}
