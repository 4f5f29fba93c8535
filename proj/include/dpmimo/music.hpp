// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Dual-polarized MUSIC spike localization: grid search for the deepest
// local minima of the noise-subspace pseudo-spectrum
//   eta(xi) = || U_noi^H (I_2 (x) a(xi)) ||_F^2.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpmimo/errors.hpp"
#include "dpmimo/geometry.hpp"
#include "dpmimo/linalg.hpp"

namespace dpmimo {

struct MusicResult {
  std::vector<double> aoas;        // sorted ascending, size r_hat
  bool padded = false;             // fewer minima than r_hat: grid fallback
  std::vector<double> spectrum;    // eta over the grid (diagnostics)
  std::vector<double> grid;
};

// r_hat is the assumed number of discrete paths; overestimating it is safe
// for the downstream fit (extra coefficients shrink to zero), so the
// default is deliberately generous.
inline MusicResult music_aoas(const Mat& sigma, int r_hat = 4,
                              int grid_size = 0) {
  if (sigma.rows() != sigma.cols() || sigma.rows() % 2 != 0)
    throw InvariantViolation("music: covariance must be 2M x 2M");
  const int m = static_cast<int>(sigma.rows()) / 2;
  if (r_hat < 1) throw ConfigError("music.r_hat", "must be >= 1");
  if (2 * r_hat >= 2 * m)
    throw ConfigError("music.r_hat",
                      "signal subspace 2*r_hat must be smaller than 2M");
  const int g = grid_size > 0 ? grid_size : 16 * m;
  if (g < 4 * m)
    throw ConfigError("music.grid_size", "must be >= 4M for reliable minima");

  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(sigma));
  if (es.info() != Eigen::Success)
    throw NumericalError("music: eigendecomposition failed");
  // Eigen sorts ascending: the first 2M - 2 r_hat columns span the noise
  // subspace.
  const int noise_dim = 2 * m - 2 * r_hat;
  const Mat u_top = es.eigenvectors().block(0, 0, m, noise_dim);
  const Mat u_bot = es.eigenvectors().block(m, 0, m, noise_dim);

  MusicResult res;
  res.grid.resize(g);
  res.spectrum.resize(g);
  const ArrayGeometry geom = ArrayGeometry::ul(m);
  for (int i = 0; i < g; ++i) {
    const double xi = -1.0 + 2.0 * i / (g - 1);
    res.grid[i] = xi;
    const Vec a = array_response(xi, geom);
    res.spectrum[i] =
        (u_top.adjoint() * a).squaredNorm() + (u_bot.adjoint() * a).squaredNorm();
  }

  // Strict interior minima plus decreasing boundaries.
  std::vector<int> cand;
  if (res.spectrum[0] < res.spectrum[1]) cand.push_back(0);
  for (int i = 1; i + 1 < g; ++i)
    if (res.spectrum[i] < res.spectrum[i - 1] &&
        res.spectrum[i] < res.spectrum[i + 1])
      cand.push_back(i);
  if (res.spectrum[g - 1] < res.spectrum[g - 2]) cand.push_back(g - 1);

  auto deeper = [&](int lhs, int rhs) {
    if (res.spectrum[lhs] != res.spectrum[rhs])
      return res.spectrum[lhs] < res.spectrum[rhs];
    const double al = std::abs(res.grid[lhs]), ar = std::abs(res.grid[rhs]);
    if (al != ar) return al < ar;  // ties: prefer broadside
    return lhs < rhs;
  };
  std::sort(cand.begin(), cand.end(), deeper);
  if (static_cast<int>(cand.size()) > r_hat) cand.resize(r_hat);

  if (static_cast<int>(cand.size()) < r_hat) {
    // Not enough local minima (merged spikes / heavy noise): pad with the
    // lowest remaining grid values and mark the result as degraded.
    res.padded = true;
    std::vector<char> taken(g, 0);
    for (int i : cand) taken[i] = 1;
    std::vector<int> rest;
    rest.reserve(g);
    for (int i = 0; i < g; ++i)
      if (!taken[i]) rest.push_back(i);
    std::sort(rest.begin(), rest.end(), deeper);
    for (int i : rest) {
      if (static_cast<int>(cand.size()) == r_hat) break;
      cand.push_back(i);
    }
  }

  res.aoas.reserve(cand.size());
  for (int i : cand) res.aoas.push_back(res.grid[i]);
  std::sort(res.aoas.begin(), res.aoas.end());
  return res;
}

}  // namespace dpmimo
