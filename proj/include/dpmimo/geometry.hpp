// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Uniform linear array geometry and steering vectors in angle-cosine
// coordinates xi = sin(theta) in [-1, 1].

#pragma once

#include <cmath>

#include "dpmimo/errors.hpp"
#include "dpmimo/linalg.hpp"

namespace dpmimo {

// Half-wavelength ULA with `m` elements per polarization. `nu` is the ratio
// of the operating carrier to the reference (uplink) carrier: nu = 1 on the
// uplink, nu = f_dl / f_ul on the downlink.
struct ArrayGeometry {
  int m = 0;
  double nu = 1.0;

  int dim() const noexcept { return 2 * m; }

  void validate() const {
    if (m < 1) throw ConfigError("geometry.m", "must be >= 1");
    if (!(nu > 0.0)) throw ConfigError("geometry.nu", "must be > 0");
  }

  static ArrayGeometry ul(int m) { return {m, 1.0}; }
  static ArrayGeometry dl(int m, double nu) { return {m, nu}; }
};

// a(xi)_m = exp(j pi nu m xi), m = 0..M-1. Unit-magnitude entries, first
// entry exactly 1.
inline Vec array_response(double xi, const ArrayGeometry& g) {
  g.validate();
  if (!(xi >= -1.0 && xi <= 1.0))
    throw DomainError("array_response: xi must lie in [-1, 1]");
  Vec a(g.m);
  const double phase = M_PI * g.nu * xi;
  for (int m = 0; m < g.m; ++m) a(m) = std::polar(1.0, phase * m);
  return a;
}

// Rank-one per-polarization response A(xi) = a(xi) a(xi)^H.
inline Mat steering_outer(double xi, const ArrayGeometry& g) {
  const Vec a = array_response(xi, g);
  return a * a.adjoint();
}

}  // namespace dpmimo
