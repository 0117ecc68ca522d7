// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include "nlmax/nonlin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlmax {

namespace {

constexpr double kPsiRelTol = 1e-12;
constexpr double kQuadRelTol = 1e-10;
constexpr double kGrowthGuard = 4.0;
constexpr int kMaxInvertIters = 200;

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1,1].
constexpr double kKronrodX[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kKronrodW[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kGaussW[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

struct GkResult {
  double value;
  double error;
};

template <typename Fn>
GkResult gk15(Fn&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double k = 0.0, g = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double v = f(c + h * kKronrodX[i]);
    k += kKronrodW[i] * v;
    if (i % 2 == 1) g += kGaussW[i / 2] * v;
  }
  return {h * k, std::abs(h * (k - g))};
}

template <typename Fn>
double adaptive_quad(Fn&& f, double a, double b, double rel_tol) {
  struct Seg {
    double a, b, value, error;
  };
  GkResult whole = gk15(f, a, b);
  std::vector<Seg> segs{{a, b, whole.value, whole.error}};
  for (int round = 0; round < 60; ++round) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].value;
      err += segs[i].error;
      if (segs[i].error > segs[worst].error) worst = i;
    }
    if (err <= rel_tol * std::max(std::abs(total), 1e-300)) return total;
    Seg s = segs[worst];
    const double m = 0.5 * (s.a + s.b);
    GkResult left = gk15(f, s.a, m), right = gk15(f, m, s.b);
    segs[worst] = {s.a, m, left.value, left.error};
    segs.push_back({m, s.b, right.value, right.error});
  }
  throw ConvergenceError("adaptive_quad: tolerance not reached");
}

}  // namespace

Weight Weight::constant(double value) {
  if (!(value > 0.0)) throw ConfigError("Weight: constant must be positive");
  Weight w;
  w.eval_ = [value](const Vec3&) { return value; };
  w.floor_ = value;
  w.describe_ = "constant";
  return w;
}

Weight Weight::cosine(double amp, int q, double period_box) {
  if (!(amp >= 0.0 && amp < 1.0))
    throw ConfigError("Weight: cosine amplitude must be in [0,1)");
  if (q < 1 || !(period_box > 0.0))
    throw ConfigError("Weight: cosine preset needs q >= 1 and a box length");
  Weight w;
  const double k = kTwoPi * q / period_box;
  w.eval_ = [amp, k](const Vec3& x) {
    return 1.0 + amp * std::cos(k * x[0]) * std::cos(k * x[1]) *
                     std::cos(k * x[2]);
  };
  w.floor_ = 1.0 - amp;
  w.describe_ = "cosine_preset";
  return w;
}

Weight Weight::from_samples(const GridSpec& grid, std::vector<double> values) {
  if (values.size() != grid.num_points())
    throw DimensionError("Weight: sample count != n^3");
  double lo = values.empty() ? 0.0 : values[0];
  for (double v : values) lo = std::min(lo, v);
  if (!(lo > 0.0)) throw ConfigError("Weight: sampled weight must be positive");
  Weight w;
  w.floor_ = lo;
  w.describe_ = "field";
  w.eval_ = [grid, vals = std::move(values)](const Vec3& x) {
    const double h = grid.spacing();
    const double off = (grid.mode == GridMode::cavity) ? 0.5 : 0.0;
    auto idx = [&](double xi) {
      const double raw = xi / h - off;
      const int i = static_cast<int>(std::lround(raw));
      if (std::abs(raw - i) > 1e-9)
        throw DimensionError("Weight: off-grid evaluation of sampled weight");
      return ((i % grid.n) + grid.n) % grid.n;
    };
    return vals[grid.point_index(idx(x[0]), idx(x[1]), idx(x[2]))];
  };
  return w;
}

double Weight::operator()(const Vec3& x) const { return eval_(x); }

Nonlinearity Nonlinearity::power(double p, Weight a, bool fullspace) {
  if (fullspace ? !(p > 4.0 && p < 6.0) : !(p > 2.0 && p < 6.0))
    throw ConfigError(fullspace
                          ? "Nonlinearity: full-space use requires 4 < p < 6"
                          : "Nonlinearity: bounded use requires 2 < p < 6");
  Nonlinearity nl;
  nl.kind_ = NonlinKind::power;
  nl.p_ = p;
  nl.pprime_ = p / (p - 1.0);
  nl.a_ = std::move(a);
  return nl;
}

Nonlinearity Nonlinearity::custom(double p, ScalarFn f0, ScalarFn df0,
                                  bool fullspace) {
  if (fullspace ? !(p > 4.0 && p < 6.0) : !(p > 2.0 && p < 6.0))
    throw ConfigError("Nonlinearity: exponent outside the admissible window");
  if (!f0 || !df0)
    throw ConfigError("Nonlinearity: custom kind needs f0 and its derivative");
  Nonlinearity nl;
  nl.kind_ = NonlinKind::custom_monotone;
  nl.p_ = p;
  nl.pprime_ = p / (p - 1.0);
  nl.custom_f0_ = std::move(f0);
  nl.custom_df0_ = std::move(df0);
  return nl;
}

double Nonlinearity::f0(const Vec3& x, double s) const {
  if (s <= 0.0) return 0.0;
  if (kind_ == NonlinKind::power) return a_(x) * std::pow(s, p_ - 1.0);
  return custom_f0_(x, s);
}

double Nonlinearity::df0(const Vec3& x, double s) const {
  if (s <= 0.0) return 0.0;
  if (kind_ == NonlinKind::power)
    return a_(x) * (p_ - 1.0) * std::pow(s, p_ - 2.0);
  return custom_df0_(x, s);
}

double Nonlinearity::F0(const Vec3& x, double s) const {
  if (s <= 0.0) return 0.0;
  if (kind_ == NonlinKind::power) return a_(x) * std::pow(s, p_) / p_;
  return adaptive_quad([&](double t) { return f0(x, t); }, 0.0, s,
                       kQuadRelTol);
}

double Nonlinearity::psi0(const Vec3& x, double z) const {
  if (z <= 0.0) return 0.0;
  if (kind_ == NonlinKind::power)
    return std::pow(z / a_(x), 1.0 / (p_ - 1.0));

  // Bracket [0, hi] with f0(hi) >= z, then safeguarded Newton.
  double hi = std::pow(std::max(1.0, z), 1.0 / (p_ - 1.0)) * kGrowthGuard;
  int grow = 0;
  while (custom_f0_(x, hi) < z) {
    hi *= 2.0;
    if (++grow > 200)
      throw ConvergenceError("psi0: f0 never reaches the target value");
  }
  double lo = 0.0, s = 0.5 * hi;
  for (int it = 0; it < kMaxInvertIters; ++it) {
    const double val = custom_f0_(x, s) - z;
    if (val > 0.0)
      hi = s;
    else
      lo = s;
    const double d = custom_df0_(x, s);
    double next = (d > 0.0) ? s - val / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= kPsiRelTol * std::max(1.0, std::abs(next))) {
      return next;
    }
    s = next;
  }
  std::ostringstream oss;
  oss << "psi0: inversion stalled in bracket [" << lo << ", " << hi
      << "] for z=" << z;
  throw ConvergenceError(oss.str());
}

double Nonlinearity::Psi0(const Vec3& x, double z) const {
  if (z <= 0.0) return 0.0;
  if (kind_ == NonlinKind::power) {
    const double ap = std::pow(a_(x), 1.0 - pprime_);
    return ap * std::pow(z, pprime_) / pprime_;
  }
  return adaptive_quad([&](double t) { return psi0(x, t); }, 0.0, z,
                       kQuadRelTol);
}

Vec3 Nonlinearity::eval_f(const Vec3& x, const Vec3& E) const {
  const double s = E.norm();
  if (s == 0.0) return Vec3::Zero();
  return (f0(x, s) / s) * E;
}

double Nonlinearity::eval_F(const Vec3& x, const Vec3& E) const {
  return F0(x, E.norm());
}

Vec3 Nonlinearity::eval_psi(const Vec3& x, const Vec3& P) const {
  const double z = P.norm();
  if (z == 0.0) return Vec3::Zero();
  return (psi0(x, z) / z) * P;
}

double Nonlinearity::eval_Psi(const Vec3& x, const Vec3& P) const {
  return Psi0(x, P.norm());
}

ValidationReport validate_assumptions(Nonlinearity& nl,
                                      const SampleSpec& spec) {
  ValidationReport rep;
  std::vector<double> svals;
  const double decades = std::log10(spec.s_hi / spec.s_lo);
  const int count = std::max(2, static_cast<int>(decades * spec.per_decade));
  for (int i = 0; i <= count; ++i)
    svals.push_back(spec.s_lo * std::pow(spec.s_hi / spec.s_lo,
                                         static_cast<double>(i) / count));

  const double p = nl.p();
  const double pp = nl.p_conj();
  rep.f0_increasing = rep.s_inv_f0_increasing = true;
  rep.c1_max = rep.psi_c1_max = std::numeric_limits<double>::infinity();
  rep.a4_c = std::numeric_limits<double>::infinity();
  rep.a4_C = 0.0;

  for (const Vec3& x : spec.x_samples) {
    double prev_f0 = 0.0, prev_ratio = 0.0;
    for (std::size_t i = 0; i < svals.size(); ++i) {
      const double s = svals[i];
      const double f = nl.f0(x, s);
      const double d = nl.df0(x, s);
      if (i > 0 && f < prev_f0) rep.f0_increasing = false;
      if (i > 0 && f / s < prev_ratio) rep.s_inv_f0_increasing = false;
      prev_f0 = f;
      prev_ratio = f / s;

      const double margin = 0.5 * f * s - nl.F0(x, s);
      rep.c1_max = std::min(rep.c1_max, margin / std::pow(s, p));
      rep.a4_c = std::min(rep.a4_c, d / std::pow(s, p - 2.0));
      rep.a4_C = std::max(rep.a4_C, d / std::pow(s, p - 2.0));
    }
  }
  // With c1 fixed at its extremal value, the largest feasible c2 obeys
  // c1 s^p >= c2 f0 s on the sample.
  rep.c2_max = std::numeric_limits<double>::infinity();
  for (const Vec3& x : spec.x_samples)
    for (double s : svals) {
      const double f = nl.f0(x, s);
      if (f > 0.0)
        rep.c2_max = std::min(rep.c2_max, rep.c1_max * std::pow(s, p) / (f * s));
    }
  rep.a3_feasible = rep.f0_increasing && rep.s_inv_f0_increasing &&
                    rep.c1_max > 1e-14 && rep.c2_max > 1e-14;

  // Dual side: int_0^z psi0 - z psi0(z)/2 >= c1' z^p' >= c2' psi0(z) z.
  rep.psi_c2_max = std::numeric_limits<double>::infinity();
  for (const Vec3& x : spec.x_samples)
    for (double s : svals) {
      const double z = nl.f0(x, s);
      if (!(z > 0.0)) continue;
      const double margin = nl.Psi0(x, z) - 0.5 * nl.psi0(x, z) * z;
      rep.psi_c1_max = std::min(rep.psi_c1_max, margin / std::pow(z, pp));
    }
  for (const Vec3& x : spec.x_samples)
    for (double s : svals) {
      const double z = nl.f0(x, s);
      if (!(z > 0.0)) continue;
      rep.psi_c2_max =
          std::min(rep.psi_c2_max,
                   rep.psi_c1_max * std::pow(z, pp) / (nl.psi0(x, z) * z));
    }
  rep.a3prime_feasible = rep.psi_c1_max > 1e-14 && rep.psi_c2_max > 1e-14;

  rep.a4_feasible = rep.a4_c > 1e-14 && std::isfinite(rep.a4_C) &&
                    rep.a4_C < 1e14;

  nl.constants = {rep.c1_max, rep.c2_max, rep.a4_c, rep.a4_C, true};
  return rep;
}

MonotonicityGap monotonicity_gap(const VectorField& P, const VectorField& Q,
                                 const Nonlinearity& nl) {
  require_same_grid(P.grid(), Q.grid(), "monotonicity_gap");
  const GridSpec& g = P.grid();
  const double dv = g.cell_volume();
  double gap = 0.0;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        const Vec3 x(g.point(ix, iy, iz).data());
        const Vec3 dpq = P.at(m) - Q.at(m);
        gap += (nl.eval_psi(x, P.at(m)) - nl.eval_psi(x, Q.at(m))).dot(dpq);
      }
  gap *= dv;

  MonotonicityGap out;
  out.gap = gap;
  const double pp = nl.p_conj();
  VectorField diff = P;
  diff -= Q;
  const double num = lp_norm(diff, pp);
  const double denom = std::sqrt(std::max(gap, 0.0)) *
                       std::pow(lp_norm(P, pp) + lp_norm(Q, pp),
                                0.5 * (2.0 - pp));
  out.bound_ratio = (num == 0.0) ? 0.0 : num / std::max(denom, 1e-300);
  return out;
}

}  // namespace nlmax
