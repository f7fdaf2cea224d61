#include "mkg/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <unsupported/Eigen/FFT>

namespace mkg {

int worker_count() {
  static const int cached = [] {
    int hw = int(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int w = std::min(hw, 8);
    if (const char* env = std::getenv("MKG_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) w = v;
    }
    return w;
  }();
  return cached;
}

void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& body) {
  const int w = worker_count();
  if (w <= 1 || count < 4096) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w);
  const std::int64_t chunk = (count + w - 1) / w;
  for (int t = 0; t < w; ++t) {
    const std::int64_t b = std::min<std::int64_t>(t * chunk, count);
    const std::int64_t e = std::min<std::int64_t>(b + chunk, count);
    if (b >= e) break;
    pool.emplace_back([&, b, e] { body(b, e); });
  }
  for (auto& th : pool) th.join();
}

double pairwise_sum(const double* data, std::int64_t count) {
  if (count == 0) return 0.0;
  if (count <= 32) {
    double s = 0.0;
    for (std::int64_t i = 0; i < count; ++i) s += data[i];
    return s;
  }
  const std::int64_t half = count / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

double pairwise_sum(const RArray& a) { return pairwise_sum(a.data(), a.size()); }

Eigen::VectorXd deterministic_grid_sum(
    std::int64_t count, int k, const std::function<void(std::int64_t, double*)>& add_point) {
  constexpr std::int64_t kTile = 4096;
  const std::int64_t tiles = (count + kTile - 1) / kTile;
  Eigen::MatrixXd partial = Eigen::MatrixXd::Zero(tiles, k);
  parallel_for(tiles, [&](std::int64_t tb, std::int64_t te) {
    std::vector<double> acc(k);
    for (std::int64_t t = tb; t < te; ++t) {
      std::fill(acc.begin(), acc.end(), 0.0);
      const std::int64_t b = t * kTile, e = std::min(count, b + kTile);
      for (std::int64_t i = b; i < e; ++i) add_point(i, acc.data());
      for (int j = 0; j < k; ++j) partial(t, j) = acc[j];
    }
  });
  Eigen::VectorXd out(k);
  for (int j = 0; j < k; ++j) {
    RArray col = partial.col(j).array();
    out[j] = pairwise_sum(col);
  }
  return out;
}

double l2_norm(const RArray& u, const GridSpec& g) {
  RArray sq = u.square();
  return std::sqrt(g.cell_volume() * pairwise_sum(sq));
}

double l2_norm(const CArray& u, const GridSpec& g) {
  RArray sq = u.abs2();
  return std::sqrt(g.cell_volume() * pairwise_sum(sq));
}

namespace {

// batched 1D transforms along each axis in turn
void fft3_axis(CArray& u, int n, int axis, bool inverse) {
  Eigen::FFT<double> fft;
  const std::int64_t sx = std::int64_t(n) * n;
  std::vector<Complex> line(n), out(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      // gather the line
      std::int64_t base;
      std::int64_t stride;
      if (axis == 0) {
        base = std::int64_t(a) * n + b;
        stride = sx;
      } else if (axis == 1) {
        base = std::int64_t(a) * sx + b;
        stride = n;
      } else {
        base = std::int64_t(a) * sx + std::int64_t(b) * n;
        stride = 1;
      }
      for (int k = 0; k < n; ++k) line[k] = u[base + stride * k];
      if (inverse)
        fft.inv(out, line);
      else
        fft.fwd(out, line);
      for (int k = 0; k < n; ++k) u[base + stride * k] = out[k];
    }
  }
}

}  // namespace

void fft3(CArray& u, const GridSpec& g, bool inverse) {
  if (u.size() != g.size()) throw GridMismatch("fft3 size");
  for (int axis = 0; axis < 3; ++axis) fft3_axis(u, g.n, axis, inverse);
}

namespace {

inline double wavenumber(int k, int n, double L) {
  const int kk = (k <= n / 2) ? k : k - n;
  return M_PI / L * kk;  // 2*pi/(2L) * kk
}

}  // namespace

RArray poisson_solve_periodic(const RArray& source, const GridSpec& g) {
  if (source.size() != g.size()) throw GridMismatch("poisson source size");
  CArray u = source.cast<Complex>();
  fft3(u, g, false);
  const int n = g.n;
  for (int ix = 0; ix < n; ++ix) {
    const double kx = wavenumber(ix, n, g.L);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = wavenumber(iy, n, g.L);
      for (int iz = 0; iz < n; ++iz) {
        const double kz = wavenumber(iz, n, g.L);
        const double k2 = kx * kx + ky * ky + kz * kz;
        const std::int64_t i = g.idx(ix, iy, iz);
        u[i] = (k2 == 0.0) ? Complex(0.0) : u[i] / (-k2);
      }
    }
  }
  fft3(u, g, true);
  RArray out = u.real();
  if (!out.allFinite()) throw ConstraintSolveFailure("periodic Poisson solve produced non-finite values");
  return out;
}

RArray spectral_laplacian(const RArray& u, const GridSpec& g) {
  CArray f = u.cast<Complex>();
  fft3(f, g, false);
  const int n = g.n;
  for (int ix = 0; ix < n; ++ix) {
    const double kx = wavenumber(ix, n, g.L);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = wavenumber(iy, n, g.L);
      for (int iz = 0; iz < n; ++iz) {
        const double kz = wavenumber(iz, n, g.L);
        f[g.idx(ix, iy, iz)] *= -(kx * kx + ky * ky + kz * kz);
      }
    }
  }
  fft3(f, g, true);
  return f.real();
}

RArray spectral_diff(const RArray& u, const GridSpec& g, int axis) {
  CArray f = u.cast<Complex>();
  fft3(f, g, false);
  const int n = g.n;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const int kidx = axis == 0 ? ix : (axis == 1 ? iy : iz);
        double k = wavenumber(kidx, n, g.L);
        if (2 * kidx == n) k = 0.0;  // derivative of the Nyquist mode
        f[g.idx(ix, iy, iz)] *= Complex(0.0, k);
      }
  fft3(f, g, true);
  return f.real();
}

}  // namespace mkg
