// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_NONLIN_HPP
#define NLMAX_NONLIN_HPP

#include <functional>
#include <string>
#include <vector>

#include "nlmax/field.hpp"

namespace nlmax {

/// Scalar weight a(x): constant, a cosine-perturbed periodic preset, or
/// a sampled scalar field bound to one grid.
class Weight {
 public:
  static Weight constant(double value);
  /// a(x) = 1 + amp * prod_i cos(2 pi q x_i / period_box). With q
  /// dividing n this is invariant under grid shifts of n/q points.
  static Weight cosine(double amp, int q, double period_box);
  static Weight from_samples(const GridSpec& grid,
                             std::vector<double> values);

  double operator()(const Vec3& x) const;
  double floor() const { return floor_; }
  std::string describe() const { return describe_; }

 private:
  Weight() = default;
  std::function<double(const Vec3&)> eval_;
  double floor_ = 1.0;
  std::string describe_;
};

enum class NonlinKind { power, custom_monotone };

/// Radial nonlinearity f(x,E) = f0(x,|E|) |E|^-1 E together with its
/// primitive F, the inverse psi = f^-1 and the dual primitive Psi.
/// The power kind f0 = a(x) s^(p-1) has closed forms throughout; the
/// custom kind inverts f0 by safeguarded Newton/bisection and
/// integrates psi0 by adaptive Gauss-Kronrod quadrature.
class Nonlinearity {
 public:
  using ScalarFn = std::function<double(const Vec3&, double)>;

  static Nonlinearity power(double p, Weight a = Weight::constant(1.0),
                            bool fullspace = false);
  static Nonlinearity custom(double p, ScalarFn f0, ScalarFn df0,
                             bool fullspace = false);

  NonlinKind kind() const { return kind_; }
  double p() const { return p_; }
  double p_conj() const { return pprime_; }
  const Weight& weight() const { return a_; }

  double f0(const Vec3& x, double s) const;
  double df0(const Vec3& x, double s) const;
  double F0(const Vec3& x, double s) const;
  double psi0(const Vec3& x, double z) const;
  double Psi0(const Vec3& x, double z) const;

  Vec3 eval_f(const Vec3& x, const Vec3& E) const;
  double eval_F(const Vec3& x, const Vec3& E) const;
  Vec3 eval_psi(const Vec3& x, const Vec3& P) const;
  double eval_Psi(const Vec3& x, const Vec3& P) const;

  // Validator outputs, filled by validate_assumptions.
  struct Constants {
    double c1 = 0, c2 = 0, c = 0, C = 0;
    bool set = false;
  };
  Constants constants;

 private:
  Nonlinearity() = default;
  NonlinKind kind_ = NonlinKind::power;
  double p_ = 4.0;
  double pprime_ = 4.0 / 3.0;
  Weight a_ = Weight::constant(1.0);
  ScalarFn custom_f0_, custom_df0_;
};

/// Grid of sample magnitudes/locations for the assumption checks.
struct SampleSpec {
  double s_lo = 1e-3;
  double s_hi = 1e3;
  int per_decade = 8;
  std::vector<Vec3> x_samples = {Vec3::Zero()};
};

struct ValidationReport {
  bool f0_increasing = false;
  bool s_inv_f0_increasing = false;
  double c1_max = 0;  // largest feasible c1 in (A3) on the sample
  double c2_max = 0;  // largest feasible c2 given c1_max
  bool a3_feasible = false;
  double psi_c1_max = 0;  // dual-side constants for the psi estimate
  double psi_c2_max = 0;
  bool a3prime_feasible = false;
  double a4_c = 0;  // extremal bounds of ds f0 / s^(p-2)
  double a4_C = 0;
  bool a4_feasible = false;
  bool passed(bool require_a4) const {
    return f0_increasing && s_inv_f0_increasing && a3_feasible &&
           a3prime_feasible && (!require_a4 || a4_feasible);
  }
};

/// Sampling-based check of (A3), the psi-side estimate and (A4). The
/// result is a report: sampling cannot certify the inequalities for
/// all s, so nothing here throws.
ValidationReport validate_assumptions(Nonlinearity& nl,
                                      const SampleSpec& spec);

/// gap = int (psi(x,P)-psi(x,Q)).(P-Q) dx >= 0 by monotonicity;
/// bound_ratio = |P-Q|_p' / (gap^(1/2) (|P|_p'+|Q|_p')^((2-p')/2)).
struct MonotonicityGap {
  double gap = 0;
  double bound_ratio = 0;
};
MonotonicityGap monotonicity_gap(const VectorField& P, const VectorField& Q,
                                 const Nonlinearity& nl);

}  // namespace nlmax

#endif  // NLMAX_NONLIN_HPP
