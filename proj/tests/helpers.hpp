#pragma once

#include <random>

#include "mkg/grid.hpp"
#include "mkg/soliton.hpp"

namespace mkg_test {

using namespace mkg;

// smooth random complex field: a few seeded gaussian bumps
inline CArray smooth_random_field(const GridSpec& grid, std::mt19937_64& rng,
                                  double spread = 4.0) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  struct Bump {
    Eigen::Vector3d c;
    double w;
    Complex amp;
  };
  std::vector<Bump> bumps;
  for (int b = 0; b < 5; ++b)
    bumps.push_back({spread * Eigen::Vector3d(unif(rng), unif(rng), unif(rng)),
                     1.2 + 1.5 * std::abs(unif(rng)), Complex(unif(rng), unif(rng))});
  CArray out = CArray::Zero(grid.size());
  const int n = grid.n;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const Eigen::Vector3d x = grid.point(ix, iy, iz);
        Complex acc = 0;
        for (const auto& b : bumps)
          acc += b.amp * std::exp(-(x - b.c).squaredNorm() / (b.w * b.w));
        out[grid.idx(ix, iy, iz)] = acc;
      }
  return out;
}

// real L2 pairing of complex fields over the grid
inline double pair_l2(const CArray& a, const CArray& b, const GridSpec& grid) {
  RArray prod(a.size());
  for (std::int64_t i = 0; i < a.size(); ++i) prod[i] = re_pair(a[i], b[i]);
  return pairwise_sum(prod) * grid.cell_volume();
}

// Gram-Schmidt projection of (v, w) onto the kernel of the 8 orthogonality
// functionals G_a(v,w) = <e^{-iT} d_a phi_S, w> - <e^{-iT} d_a psi_S, v>
inline void project_orthogonal(CArray& v, CArray& w, const SolitonParams& lam,
                               const ProfileFamily& fam, const GridSpec& grid) {
  const std::int64_t N = grid.size();
  std::vector<std::pair<CArray, CArray>> reps;  // (v-part, w-part) representers
  const int n = grid.n;
  for (int a = 0; a < 8; ++a) reps.emplace_back(CArray(N), CArray(N));
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const std::int64_t i = grid.idx(ix, iy, iz);
        const Eigen::Vector3d x = grid.point(ix, iy, iz);
        const auto d = d_lambda_soliton(x, lam, fam);
        const Complex rot = std::polar(1.0, -theta_phase(x, lam));
        for (int a = 0; a < 8; ++a) {
          reps[a].first[i] = -rot * d[a].psi;
          reps[a].second[i] = rot * d[a].phi;
        }
      }
  // orthonormalize the representers in the product L2 metric
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < a; ++b) {
      const double c = pair_l2(reps[a].first, reps[b].first, grid) +
                       pair_l2(reps[a].second, reps[b].second, grid);
      reps[a].first -= c * reps[b].first;
      reps[a].second -= c * reps[b].second;
    }
    const double nrm = std::sqrt(pair_l2(reps[a].first, reps[a].first, grid) +
                                 pair_l2(reps[a].second, reps[a].second, grid));
    reps[a].first /= nrm;
    reps[a].second /= nrm;
  }
  for (int a = 0; a < 8; ++a) {
    const double c =
        pair_l2(v, reps[a].first, grid) + pair_l2(w, reps[a].second, grid);
    v -= c * reps[a].first;
    w -= c * reps[a].second;
  }
}

inline double h1_norm_sq(const CArray& v, const GridSpec& grid) {
  double acc = l2_norm(v, grid);
  acc *= acc;
  for (int ax = 0; ax < 3; ++ax) {
    const double g = l2_norm(CArray(central_diff(v, grid, ax)), grid);
    acc += g * g;
  }
  return acc;
}

}  // namespace mkg_test
