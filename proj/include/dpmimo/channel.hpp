// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Covariance synthesis from an ASF and gaussian channel/pilot simulation.
// Channels live in C^{2M} with the H-polarization antennas stacked on top
// of the V ones.

#pragma once

#include <cmath>

#include "dpmimo/asf.hpp"
#include "dpmimo/density.hpp"
#include "dpmimo/geometry.hpp"
#include "dpmimo/linalg.hpp"
#include "dpmimo/rng.hpp"

namespace dpmimo {

// Sigma = sum_spikes C_i (x) a(xi_i) a(xi_i)^H + sum_atoms C'_i (x) S_i,
// with S_i the Toeplitz Fourier-moment block of the density.
inline Mat synth_covariance(const DpAsf& asf, const ArrayGeometry& g) {
  g.validate();
  asf.validate();
  Mat sigma = Mat::Zero(g.dim(), g.dim());
  for (const auto& s : asf.spikes)
    sigma += kron2x2(s.coeff, steering_outer(s.xi, g));
  for (const auto& at : asf.atoms)
    sigma += kron2x2(at.coeff, atom_toeplitz(at.density, g.m, g.nu));
  return hermitize(sigma);
}

// Draws h ~ CN(0, Sigma) via the eigen factor of Sigma. Covariances here
// are rank deficient by construction (spikes), so a Cholesky factor does
// not exist; eigenvalues in [-tol, 0) are clipped, anything lower throws.
class ChannelSampler {
 public:
  explicit ChannelSampler(const Mat& sigma, double tol = 1e-8)
      : factor_(psd_factor(sigma, tol)), dim_(static_cast<int>(sigma.rows())) {}

  int dim() const noexcept { return dim_; }
  int rank() const noexcept { return factor_.rank; }

  Vec draw(Rng& rng) const {
    Vec g(factor_.rank);
    for (int i = 0; i < factor_.rank; ++i) g(i) = rng.complex_normal();
    return factor_.l * g;
  }

  // dim x n matrix of independent draws (column = one realization).
  Mat draw_many(int n, Rng& rng) const {
    Mat h(dim_, n);
    for (int c = 0; c < n; ++c) h.col(c) = draw(rng);
    return h;
  }

 private:
  PsdFactor factor_;
  int dim_;
};

// Convenience: synthesize the covariance and draw n channels from it.
inline Mat sample_channels(const DpAsf& asf, const ArrayGeometry& g, int n,
                           Rng& rng) {
  if (n < 1) throw ConfigError("sample_channels.n", "must be >= 1");
  ChannelSampler sampler(synth_covariance(asf, g));
  return sampler.draw_many(n, rng);
}

// Uplink pilot observations y_t = sqrt(P) h_t + sqrt(N0) w_t for each
// column of `channels`.
inline Mat simulate_ul_pilots(const Mat& channels, double p, double n0,
                              Rng& rng) {
  if (!(p > 0.0)) throw ConfigError("ul_pilots.p", "must be > 0");
  if (!(n0 >= 0.0)) throw ConfigError("ul_pilots.n0", "must be >= 0");
  Mat y(channels.rows(), channels.cols());
  const double sp = std::sqrt(p), sn = std::sqrt(n0);
  for (Eigen::Index c = 0; c < channels.cols(); ++c)
    for (Eigen::Index r = 0; r < channels.rows(); ++r)
      y(r, c) = sp * channels(r, c) + sn * rng.complex_normal();
  return y;
}

}  // namespace dpmimo
