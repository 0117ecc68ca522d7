// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_SPECTRAL_HPP
#define NLMAX_SPECTRAL_HPP

#include <complex>
#include <utility>
#include <vector>

#include "nlmax/field.hpp"

namespace nlmax {

using Cplx = std::complex<double>;
using Vec3c = Eigen::Vector3cd;

/// Fourier side of a VectorField on a periodic grid. Coefficient m
/// (FFT index order, z fastest, components interleaved) multiplies
/// exp(i xi_m . x) with xi_m = (2 pi / L) * wrap(m) and
/// wrap(i) = i for i < n/2, i - n otherwise. A field coming from real
/// data satisfies coeff(-m) = conj(coeff(m)) up to roundoff.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const GridSpec& grid)
      : grid_(grid), coeffs_(3 * grid.num_points(), Cplx(0, 0)) {}

  const GridSpec& grid() const { return grid_; }
  std::vector<Cplx>& raw() { return coeffs_; }
  const std::vector<Cplx>& raw() const { return coeffs_; }

  Vec3c at(std::size_t m) const {
    return Vec3c(coeffs_[3 * m], coeffs_[3 * m + 1], coeffs_[3 * m + 2]);
  }
  void set(std::size_t m, const Vec3c& v) {
    coeffs_[3 * m] = v[0];
    coeffs_[3 * m + 1] = v[1];
    coeffs_[3 * m + 2] = v[2];
  }
  Cplx& operator()(int ix, int iy, int iz, int c) {
    return coeffs_[3 * grid_.point_index(ix, iy, iz) + c];
  }

  /// max_m |coeff(-m) - conj(coeff(m))| / max_m |coeff(m)|.
  double hermitian_defect() const;

 private:
  GridSpec grid_;
  std::vector<Cplx> coeffs_;
};

/// Scalar-valued Fourier data (divergence, potentials).
class ScalarSpectralField {
 public:
  ScalarSpectralField() = default;
  explicit ScalarSpectralField(const GridSpec& grid)
      : grid_(grid), coeffs_(grid.num_points(), Cplx(0, 0)) {}
  const GridSpec& grid() const { return grid_; }
  std::vector<Cplx>& raw() { return coeffs_; }
  const std::vector<Cplx>& raw() const { return coeffs_; }

 private:
  GridSpec grid_;
  std::vector<Cplx> coeffs_;
};

/// Signed integer frequency for FFT index i on an n-grid.
inline int freq_wrap(int i, int n) { return i < n / 2 ? i : i - n; }

/// Wavevector of coefficient (ix,iy,iz).
Vec3 wavevector(const GridSpec& grid, int ix, int iy, int iz);

SpectralField fft(const VectorField& E);
VectorField ifft(const SpectralField& Ehat);

SpectralField curl_op(const SpectralField& E);
ScalarSpectralField div_op(const SpectralField& E);
SpectralField grad_op(const ScalarSpectralField& u);

/// Helmholtz projection: first = divergence-free part (gets the xi=0
/// mode), second = gradient part. Exact: sum of parts == input.
std::pair<SpectralField, SpectralField> helmholtz_project(
    const SpectralField& E);

/// Convenience wrappers returning one projector at a time.
SpectralField project_divfree(const SpectralField& E);
SpectralField project_gradient(const SpectralField& E);

/// curl(curl(.)) as the multiplier |xi|^2 I - xi xi^T; equals -Laplace
/// on divergence-free fields and zero on gradient fields.
SpectralField curlcurl_apply(const SpectralField& E);

/// Relative divergence defect max_m |xi . E(m)| / (|xi| |E(m)|).
double divergence_defect(const SpectralField& E);

/// Limiting-absorption resolvent: coefficient-wise multiplication by
/// Re[(|xi|^2 - lambda - i eps_reg)^-1]. Input must be divergence-free
/// (checked against div_tol). With eps_reg = 0 the multiplier is exact
/// and lambda must keep distance delta_res from every |xi|^2.
SpectralField resolvent_R(const SpectralField& g, double lambda,
                          double eps_reg, double delta_res,
                          double div_tol = 1e-8);

/// Distance from lambda to the discrete symbol set {|xi|^2}.
double symbol_gap(const GridSpec& grid, double lambda);

/// True iff |xi x E(m)| <= tol |E(m)| for every m != 0, which on the
/// periodic box certifies E = grad u. The recovered potential (mean
/// zero) is written to *potential when requested.
bool curlfree_is_gradient_check(const SpectralField& E, double tol = 1e-10,
                                ScalarSpectralField* potential = nullptr);

/// Cyclic shift E(x) -> E(x - s h) by whole grid steps (periodic mode).
VectorField periodic_shift(const VectorField& E, int sx, int sy, int sz);

}  // namespace nlmax

#endif  // NLMAX_SPECTRAL_HPP
