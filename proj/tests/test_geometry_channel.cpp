// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Array responses and dual-polarized covariance synthesis / sampling.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "dpmimo/asf.hpp"
#include "dpmimo/asf_random.hpp"
#include "dpmimo/channel.hpp"
#include "dpmimo/density.hpp"
#include "dpmimo/errors.hpp"
#include "dpmimo/geometry.hpp"
#include "dpmimo/linalg.hpp"
#include "dpmimo/rng.hpp"
#include "testutil.hpp"

using namespace dpmimo;

TEST_CASE("array response: first entry one, unit magnitudes") {
  const ArrayGeometry g{8, 1.0};
  const Vec a = array_response(0.37, g);
  REQUIRE(a.size() == 8);
  REQUIRE(a(0) == cx(1.0, 0.0));
  for (int i = 0; i < 8; ++i) REQUIRE(std::abs(std::abs(a(i)) - 1.0) < 1e-14);
}

TEST_CASE("array response: xi=0.5, M=3, nu=2 gives alternating signs") {
  // exp(j pi * 2 * m * 0.5) = exp(j pi m) = (-1)^m.
  const Vec a = array_response(0.5, ArrayGeometry{3, 2.0});
  REQUIRE(std::abs(a(0) - cx(1, 0)) < 1e-14);
  REQUIRE(std::abs(a(1) - cx(-1, 0)) < 1e-14);
  REQUIRE(std::abs(a(2) - cx(1, 0)) < 1e-14);
}

TEST_CASE("array response: broadside is all ones for any nu") {
  for (double nu : {1.0, 1.1, 2.5}) {
    const Vec a = array_response(0.0, ArrayGeometry{5, nu});
    for (int i = 0; i < 5; ++i) REQUIRE(std::abs(a(i) - cx(1, 0)) < 1e-15);
  }
}

TEST_CASE("array response: domain validation") {
  REQUIRE_THROWS_AS(array_response(1.5, ArrayGeometry{4, 1.0}), DomainError);
  REQUIRE_THROWS_AS(array_response(-1.0001, ArrayGeometry{4, 1.0}),
                    DomainError);
  REQUIRE_THROWS_AS(array_response(0.0, ArrayGeometry{0, 1.0}), ConfigError);
  REQUIRE_THROWS_AS(array_response(0.0, ArrayGeometry{4, 0.0}), ConfigError);
}

TEST_CASE("steering outer product is rank-one Hermitian PSD") {
  const Mat s = steering_outer(0.3, ArrayGeometry{6, 1.0});
  REQUIRE(is_hermitian(s));
  REQUIRE(numerical_rank(s) == 1);
  REQUIRE(min_eigenvalue(s) > -1e-12);
  REQUIRE(std::abs(s.trace().real() - 6.0) < 1e-12);  // |a_m| = 1
}

TEST_CASE("synth covariance: single broadside spike gives I2 kron ones") {
  DpAsf asf;
  asf.spikes.push_back({0.0, Mat2::Identity()});
  const Mat sigma = synth_covariance(asf, ArrayGeometry{4, 1.0});
  REQUIRE(sigma.rows() == 8);
  const Mat ones = Mat::Constant(4, 4, cx(1.0, 0.0));
  REQUIRE((sigma.topLeftCorner(4, 4) - ones).norm() < 1e-14);
  REQUIRE((sigma.bottomRightCorner(4, 4) - ones).norm() < 1e-14);
  REQUIRE(sigma.topRightCorner(4, 4).norm() < 1e-14);
}

TEST_CASE("synth covariance: flat half-power density gives identity") {
  // gamma_H = gamma_V = 1/2 * rect[-1,1], zero cross-polar coupling:
  // s_k = integral of e^{j pi k xi} / 2 over [-1,1] = delta_k0.
  DpAsf asf;
  DpAtom atom;
  atom.density = DensityAtom::rectangular(-1.0, 1.0, /*normalized=*/false);
  atom.coeff = 0.5 * Mat2::Identity();
  asf.atoms.push_back(atom);
  const Mat sigma = synth_covariance(asf, ArrayGeometry{5, 1.0});
  REQUIRE((sigma - Mat::Identity(10, 10)).norm() < 1e-12);
}

TEST_CASE("synth covariance: narrow band atom matches quadrature oracle") {
  DpAsf asf;
  DpAtom atom;
  atom.density = DensityAtom::rectangular(0.1, 0.3, /*normalized=*/false);
  atom.coeff << cx(1, 0), cx(0, 0), cx(0, 0), cx(0, 0);  // H-only
  asf.atoms.push_back(atom);
  const ArrayGeometry g{2, 1.0};
  const Mat sigma = synth_covariance(asf, g);
  // Entry (m, m') of the H block is the Fourier moment at pi (m - m').
  const cx expect01 = testutil::quad(
      [](double xi) { return std::polar(1.0, -M_PI * xi); }, 0.1, 0.3);
  REQUIRE(std::abs(sigma(0, 1) - expect01) < 1e-10);
  REQUIRE(std::abs(sigma(0, 0) - cx(0.2, 0.0)) < 1e-12);
  REQUIRE(sigma.bottomRightCorner(2, 2).norm() < 1e-14);
}

TEST_CASE("synth covariance: trace equals M times total ASF power") {
  Rng rng(101);
  AsfGenConfig cfg;
  cfg.alpha = 0.5;
  cfg.beta = 0.3;
  for (int trial = 0; trial < 20; ++trial) {
    Rng r = rng.child(static_cast<unsigned>(trial));
    const DpAsf asf = generate_random_asf(cfg, r);
    const int m = 4 + static_cast<int>(r.uniform_index(8));
    const Mat sigma = synth_covariance(asf, ArrayGeometry{m, 1.0});
    REQUIRE(std::abs(sigma.trace().real() - m * asf.total_power()) <
            1e-8 * m * asf.total_power());
    REQUIRE(is_hermitian(sigma));
    REQUIRE(min_eigenvalue(sigma) > -1e-10 * sigma.trace().real());
  }
}

TEST_CASE("channel sampler: empirical covariance converges") {
  Rng coeff_rng(5);
  DpAsf asf;
  asf.spikes.push_back({-0.4, testutil::random_psd2(coeff_rng)});
  asf.spikes.push_back({0.2, Mat2::Identity()});
  const ArrayGeometry g{4, 1.0};
  const Mat sigma = synth_covariance(asf, g);
  Rng rng(6);
  const Mat h = sample_channels(asf, g, 10000, rng);
  const Mat emp = (h * h.adjoint()) / 10000.0;
  REQUIRE(rel_frobenius_error(sigma, emp) < 0.15);
  // Mean should vanish.
  REQUIRE(h.rowwise().mean().norm() < 0.1 * std::sqrt(sigma.trace().real()));
}

TEST_CASE("channel sampler: rank matches covariance rank") {
  DpAsf asf;
  asf.spikes.push_back({0.1, Mat2::Identity()});  // rank 2 block
  const Mat sigma = synth_covariance(asf, ArrayGeometry{6, 1.0});
  ChannelSampler s(sigma);
  REQUIRE(s.dim() == 12);
  REQUIRE(s.rank() == numerical_rank(sigma));
  REQUIRE(s.rank() == 2);
}

TEST_CASE("ul pilots: noiseless observations scale the channel") {
  Rng rng(9);
  Mat h(4, 3);
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 4; ++r) h(r, c) = rng.complex_normal();
  Rng noise(10);
  const Mat y = simulate_ul_pilots(h, 4.0, 0.0, noise);
  REQUIRE((y - 2.0 * h).norm() < 1e-14);
}

TEST_CASE("ul pilots: noise power matches N0") {
  Rng rng(12);
  const Mat h = Mat::Zero(8, 4000);
  const double n0 = 0.25;
  const Mat y = simulate_ul_pilots(h, 1.0, n0, rng);
  const double emp = y.squaredNorm() / (8.0 * 4000.0);
  REQUIRE(std::abs(emp - n0) < 0.01);
  REQUIRE_THROWS_AS(simulate_ul_pilots(h, 0.0, 0.1, rng), ConfigError);
  REQUIRE_THROWS_AS(simulate_ul_pilots(h, 1.0, -0.1, rng), ConfigError);
}
