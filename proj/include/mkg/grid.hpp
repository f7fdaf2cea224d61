#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mkg/conventions.hpp"
#include "mkg/errors.hpp"

namespace mkg {

using RArray = Eigen::ArrayXd;
using CArray = Eigen::ArrayXcd;

// Uniform periodic box [-L, L)^3 with n points per axis.
struct GridSpec {
  double L = 16.0;
  int n = 64;
  double cfl_safety = 0.9;

  double h() const { return 2.0 * L / n; }
  double dt() const { return cfl_safety * h() / std::sqrt(3.0); }
  std::int64_t size() const { return std::int64_t(n) * n * n; }
  double cell_volume() const { return h() * h() * h(); }

  std::int64_t idx(int ix, int iy, int iz) const {
    return (std::int64_t(ix) * n + iy) * n + iz;
  }
  double coord(int i) const { return -L + h() * i; }
  Eigen::Vector3d point(int ix, int iy, int iz) const {
    return {coord(ix), coord(iy), coord(iz)};
  }

  void validate() const {
    if (n < 4 || n % 2 != 0) throw ParameterOutOfRange("grid n must be even and >= 4");
    if (L <= 0) throw ParameterOutOfRange("grid L must be positive");
    if (cfl_safety <= 0 || cfl_safety > 1) throw ParameterOutOfRange("cfl_safety in (0,1]");
  }
};

// worker count: MKG_THREADS caps it, default is hardware concurrency (<= 8)
int worker_count();

// deterministic parallel partition over [0, count): each worker owns a
// contiguous chunk and writes only its own outputs, so results are
// independent of the thread count
void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& body);

// pairwise tree sum, fixed order: deterministic across runs and thread counts
double pairwise_sum(const double* data, std::int64_t count);
double pairwise_sum(const RArray& a);

// k simultaneous reductions over [0, count): points are grouped into fixed
// 4096-point tiles summed sequentially, tiles combined pairwise, so the
// result does not depend on the thread count
Eigen::VectorXd deterministic_grid_sum(
    std::int64_t count, int k, const std::function<void(std::int64_t, double*)>& add_point);

// central differences on the periodic grid, axis in {0,1,2}
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> central_diff(
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& u, const GridSpec& g, int axis) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(u.size());
  const int n = g.n;
  const double inv2h = 1.0 / (2.0 * g.h());
  const std::int64_t stride = axis == 0 ? std::int64_t(n) * n : (axis == 1 ? n : 1);
  parallel_for(g.size(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      int c = axis == 0 ? int(i / (std::int64_t(n) * n))
                        : (axis == 1 ? int((i / n) % n) : int(i % n));
      const std::int64_t up = (c + 1 < n) ? i + stride : i + stride - std::int64_t(n) * stride;
      const std::int64_t dn = (c > 0) ? i - stride : i - stride + std::int64_t(n) * stride;
      out[i] = (u[up] - u[dn]) * inv2h;
    }
  });
  return out;
}

// 7-point Laplacian on the periodic grid
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> laplacian(
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& u, const GridSpec& g) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> out(u.size());
  const int n = g.n;
  const double invh2 = 1.0 / (g.h() * g.h());
  const std::int64_t sx = std::int64_t(n) * n, sy = n, sz = 1;
  parallel_for(g.size(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const int ix = int(i / sx), iy = int((i / sy) % n), iz = int(i % n);
      const std::int64_t xp = ix + 1 < n ? i + sx : i + sx - n * sx;
      const std::int64_t xm = ix > 0 ? i - sx : i - sx + n * sx;
      const std::int64_t yp = iy + 1 < n ? i + sy : i + sy - n * sy;
      const std::int64_t ym = iy > 0 ? i - sy : i - sy + n * sy;
      const std::int64_t zp = iz + 1 < n ? i + sz : i + sz - n * sz;
      const std::int64_t zm = iz > 0 ? i - sz : i - sz + n * sz;
      out[i] = (u[xp] + u[xm] + u[yp] + u[ym] + u[zp] + u[zm] - Scalar(6.0) * u[i]) * invh2;
    }
  });
  return out;
}

// discrete L2 norm over the box, sqrt(h^3 sum |u|^2), deterministic reduction
double l2_norm(const RArray& u, const GridSpec& g);
double l2_norm(const CArray& u, const GridSpec& g);

// forward/backward 3D FFT (in-place on a flattened n^3 complex array)
void fft3(CArray& u, const GridSpec& g, bool inverse);

// solve Lap psi = source on the periodic box with the spectral symbol -|k|^2;
// the source mean is removed first (solvability), psi has zero mean
RArray poisson_solve_periodic(const RArray& source, const GridSpec& g);

// spectral first derivative, axis in {0,1,2} (used for constraint checks that
// must be consistent with the spectral Poisson construction)
RArray spectral_diff(const RArray& u, const GridSpec& g, int axis);

// spectral Laplacian with the full -|k|^2 symbol, the exact inverse of
// poisson_solve_periodic away from the mean mode
RArray spectral_laplacian(const RArray& u, const GridSpec& g);

}  // namespace mkg
