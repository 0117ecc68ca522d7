// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include "nlmax/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace nlmax {

namespace {

// One forward and one backward plan per grid size, FFTW_ESTIMATE so
// planning is cheap and runs are reproducible. Plan creation is not
// thread-safe; execution on distinct buffers is.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

PlanPair& plans_for(int n) {
  static std::mutex mtx;
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const std::size_t np = static_cast<std::size_t>(n) * n * n;
  std::vector<Cplx> buf(3 * np);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  int dims[3] = {n, n, n};
  PlanPair pp;
  pp.fwd = fftw_plan_many_dft(3, dims, 3, p, nullptr, 3, 1, p, nullptr, 3, 1,
                              FFTW_FORWARD, FFTW_ESTIMATE);
  pp.bwd = fftw_plan_many_dft(3, dims, 3, p, nullptr, 3, 1, p, nullptr, 3, 1,
                              FFTW_BACKWARD, FFTW_ESTIMATE);
  return cache.emplace(n, pp).first->second;
}

void execute(fftw_plan plan, std::vector<Cplx>& buf) {
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace

Vec3 wavevector(const GridSpec& grid, int ix, int iy, int iz) {
  const double s = kTwoPi / grid.cell_length;
  return Vec3(s * freq_wrap(ix, grid.n), s * freq_wrap(iy, grid.n),
              s * freq_wrap(iz, grid.n));
}

double SpectralField::hermitian_defect() const {
  const int n = grid_.n;
  double mx = 0.0, scale = 0.0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const std::size_t m = grid_.point_index(ix, iy, iz);
        const std::size_t mm = grid_.point_index((n - ix) % n, (n - iy) % n,
                                                 (n - iz) % n);
        scale = std::max(scale, at(m).norm());
        mx = std::max(mx, (at(mm) - at(m).conjugate()).norm());
      }
  return scale > 0.0 ? mx / scale : 0.0;
}

SpectralField fft(const VectorField& E) {
  const GridSpec& g = E.grid();
  SpectralField out(g);
  auto& buf = out.raw();
  for (std::size_t i = 0; i < E.size(); ++i) buf[i] = Cplx(E.data()[i], 0.0);
  execute(plans_for(g.n).fwd, buf);
  const double scale = 1.0 / static_cast<double>(g.num_points());
  for (auto& c : buf) c *= scale;
  return out;
}

VectorField ifft(const SpectralField& Ehat) {
  const GridSpec& g = Ehat.grid();
  std::vector<Cplx> buf = Ehat.raw();
  execute(plans_for(g.n).bwd, buf);
  VectorField out(g);
  for (std::size_t i = 0; i < buf.size(); ++i) out.data()[i] = buf[i].real();
  return out;
}

namespace {

template <typename Fn>
SpectralField map_modes(const SpectralField& E, Fn&& fn) {
  const GridSpec& g = E.grid();
  SpectralField out(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        out.set(m, fn(wavevector(g, ix, iy, iz), E.at(m)));
      }
  return out;
}

}  // namespace

SpectralField curl_op(const SpectralField& E) {
  const Cplx i1(0.0, 1.0);
  return map_modes(E, [&](const Vec3& xi, const Vec3c& v) -> Vec3c {
    return i1 * Vec3c(xi.cast<Cplx>()).cross(v);
  });
}

ScalarSpectralField div_op(const SpectralField& E) {
  const GridSpec& g = E.grid();
  ScalarSpectralField out(g);
  const Cplx i1(0.0, 1.0);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        const Vec3 xi = wavevector(g, ix, iy, iz);
        out.raw()[m] = i1 * (xi[0] * E.at(m)[0] + xi[1] * E.at(m)[1] +
                             xi[2] * E.at(m)[2]);
      }
  return out;
}

SpectralField grad_op(const ScalarSpectralField& u) {
  const GridSpec& g = u.grid();
  SpectralField out(g);
  const Cplx i1(0.0, 1.0);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        const Vec3 xi = wavevector(g, ix, iy, iz);
        out.set(m, i1 * u.raw()[m] * xi.cast<Cplx>());
      }
  return out;
}

std::pair<SpectralField, SpectralField> helmholtz_project(
    const SpectralField& E) {
  const GridSpec& g = E.grid();
  SpectralField e1(g), e2(g);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        const Vec3 xi = wavevector(g, ix, iy, iz);
        const double n2 = xi.squaredNorm();
        const Vec3c v = E.at(m);
        if (n2 == 0.0) {
          // Constants are both curl- and divergence-free; assigning the
          // mean to the divergence-free part keeps P_X + P_Y = id exact.
          e1.set(m, v);
          e2.set(m, Vec3c::Zero());
        } else {
          const Cplx a = (xi[0] * v[0] + xi[1] * v[1] + xi[2] * v[2]) / n2;
          const Vec3c grad_part = a * xi.cast<Cplx>();
          e2.set(m, grad_part);
          e1.set(m, v - grad_part);
        }
      }
  return {std::move(e1), std::move(e2)};
}

SpectralField project_divfree(const SpectralField& E) {
  return helmholtz_project(E).first;
}

SpectralField project_gradient(const SpectralField& E) {
  return helmholtz_project(E).second;
}

SpectralField curlcurl_apply(const SpectralField& E) {
  return map_modes(E, [](const Vec3& xi, const Vec3c& v) -> Vec3c {
    const Cplx a = xi[0] * v[0] + xi[1] * v[1] + xi[2] * v[2];
    return xi.squaredNorm() * v - a * xi.cast<Cplx>();
  });
}

double divergence_defect(const SpectralField& E) {
  const GridSpec& g = E.grid();
  double mx = 0.0;
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        const Vec3 xi = wavevector(g, ix, iy, iz);
        const double nv = E.at(m).norm();
        if (xi.squaredNorm() == 0.0 || nv == 0.0) continue;
        const Cplx a =
            xi[0] * E.at(m)[0] + xi[1] * E.at(m)[1] + xi[2] * E.at(m)[2];
        mx = std::max(mx, std::abs(a) / (xi.norm() * nv));
      }
  return mx;
}

SpectralField resolvent_R(const SpectralField& g, double lambda,
                          double eps_reg, double delta_res, double div_tol) {
  if (divergence_defect(g) > div_tol)
    throw DimensionError("resolvent_R: input is not divergence-free");
  if (eps_reg == 0.0) {
    const double gap = symbol_gap(g.grid(), lambda);
    if (gap < delta_res)
      throw ResonanceError(
          "resolvent_R: lambda within delta_res of the symbol set (gap " +
          std::to_string(gap) + ")");
  }
  return map_modes(g, [&](const Vec3& xi, const Vec3c& v) -> Vec3c {
    const double d = xi.squaredNorm() - lambda;
    return (d / (d * d + eps_reg * eps_reg)) * v;
  });
}

double symbol_gap(const GridSpec& grid, double lambda) {
  double gap = std::numeric_limits<double>::infinity();
  for (int ix = 0; ix < grid.n; ++ix)
    for (int iy = 0; iy < grid.n; ++iy)
      for (int iz = 0; iz < grid.n; ++iz) {
        const double n2 = wavevector(grid, ix, iy, iz).squaredNorm();
        gap = std::min(gap, std::abs(n2 - lambda));
      }
  return gap;
}

bool curlfree_is_gradient_check(const SpectralField& E, double tol,
                                ScalarSpectralField* potential) {
  const GridSpec& g = E.grid();
  if (potential) *potential = ScalarSpectralField(g);
  bool ok = true;
  const Cplx i1(0.0, 1.0);
  for (int ix = 0; ix < g.n; ++ix)
    for (int iy = 0; iy < g.n; ++iy)
      for (int iz = 0; iz < g.n; ++iz) {
        const std::size_t m = g.point_index(ix, iy, iz);
        const Vec3 xi = wavevector(g, ix, iy, iz);
        if (xi.squaredNorm() == 0.0) continue;
        const Vec3c v = E.at(m);
        const double nv = v.norm();
        if (nv > 0.0 &&
            Vec3c(xi.cast<Cplx>()).cross(v).norm() > tol * nv)
          ok = false;
        if (potential) {
          const Cplx a = xi[0] * v[0] + xi[1] * v[1] + xi[2] * v[2];
          potential->raw()[m] = -i1 * a / xi.squaredNorm();
        }
      }
  return ok;
}

VectorField periodic_shift(const VectorField& E, int sx, int sy, int sz) {
  const GridSpec& g = E.grid();
  const int n = g.n;
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  VectorField out(g);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz)
        for (int c = 0; c < 3; ++c)
          out(ix, iy, iz, c) = E(wrap(ix - sx), wrap(iy - sy), wrap(iz - sz), c);
  return out;
}

}  // namespace nlmax
