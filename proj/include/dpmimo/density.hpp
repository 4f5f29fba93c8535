// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Scalar angular density atoms on [-1, 1] and their Fourier moments
// integral psi(xi) exp(j w xi) dxi, which generate the Toeplitz covariance
// blocks. Rectangles use the closed form; gaussians use composite Simpson
// quadrature with a refinement check.

#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "dpmimo/errors.hpp"
#include "dpmimo/linalg.hpp"

namespace dpmimo {

struct DensityAtom {
  enum class Kind { kRectangular, kGaussian };

  Kind kind = Kind::kRectangular;
  double a = 0.0, b = 0.0;          // rectangular support [a, b]
  double center = 0.0, width = 0.0; // gaussian mean and std deviation
  bool normalized = true;           // scale to unit mass on [-1, 1]

  static DensityAtom rectangular(double a, double b, bool normalized = true) {
    DensityAtom d;
    d.kind = Kind::kRectangular;
    d.a = a;
    d.b = b;
    d.normalized = normalized;
    d.validate();
    return d;
  }

  static DensityAtom gaussian(double center, double width,
                              bool normalized = true) {
    DensityAtom d;
    d.kind = Kind::kGaussian;
    d.center = center;
    d.width = width;
    d.normalized = normalized;
    d.validate();
    return d;
  }

  void validate() const {
    if (kind == Kind::kRectangular) {
      if (!(a >= -1.0 && b <= 1.0 && a < b))
        throw DomainError("rectangular atom: need -1 <= a < b <= 1, got [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
    } else {
      if (!(center >= -1.0 && center <= 1.0))
        throw DomainError("gaussian atom: center must lie in [-1, 1]");
      if (!(width > 0.0))
        throw DomainError("gaussian atom: width must be > 0");
    }
  }

  std::string describe() const {
    std::ostringstream os;
    if (kind == Kind::kRectangular)
      os << "rectangular[" << a << ", " << b << "]";
    else
      os << "gaussian(center=" << center << ", width=" << width << ")";
    return os.str();
  }

  // Raw (unnormalized) mass on [-1, 1].
  double raw_mass() const {
    if (kind == Kind::kRectangular) return b - a;
    const double s = width * M_SQRT2;
    return width * std::sqrt(M_PI_2) *
           (std::erf((1.0 - center) / s) - std::erf((-1.0 - center) / s));
  }

  double mass() const { return normalized ? 1.0 : raw_mass(); }

  // Density value at xi (0 outside [-1, 1] and outside the support).
  double operator()(double xi) const {
    if (xi < -1.0 || xi > 1.0) return 0.0;
    double v = 0.0;
    if (kind == Kind::kRectangular) {
      v = (xi >= a && xi <= b) ? 1.0 : 0.0;
    } else {
      const double t = (xi - center) / width;
      v = std::exp(-0.5 * t * t);
    }
    return normalized ? v / raw_mass() : v;
  }
};

namespace detail {

// Composite Simpson for f(x) e^{jwx} over [lo, hi] with `n` subintervals
// (n even).
template <typename F>
cx simpson_oscillatory(F&& f, double lo, double hi, double w, int n) {
  const double h = (hi - lo) / n;
  auto g = [&](double x) { return f(x) * std::polar(1.0, w * x); };
  cx acc = g(lo) + g(hi);
  for (int i = 1; i < n; ++i)
    acc += (i % 2 ? 4.0 : 2.0) * g(lo + i * h);
  return acc * (h / 3.0);
}

}  // namespace detail

// Fourier moment integral psi(xi) exp(j omega xi) dxi over [-1, 1].
inline cx atom_fourier(const DensityAtom& atom, double omega) {
  atom.validate();
  if (atom.kind == DensityAtom::Kind::kRectangular) {
    const double height = atom.normalized ? 1.0 / (atom.b - atom.a) : 1.0;
    if (omega == 0.0) return cx(height * (atom.b - atom.a), 0.0);
    const cx jw(0.0, omega);
    return height * (std::exp(jw * atom.b) - std::exp(jw * atom.a)) / jw;
  }
  // Gaussian, truncated to [-1, 1]: quadrature with panel doubling. The
  // integration window is clipped to +-10 sigma around the center; the
  // excluded tail is below double precision.
  const double lo = std::max(-1.0, atom.center - 10.0 * atom.width);
  const double hi = std::min(1.0, atom.center + 10.0 * atom.width);
  auto f = [&](double x) { return atom(x); };
  // Resolve both the gaussian scale and the oscillation.
  int n = 64;
  const double cycles = std::abs(omega) * (hi - lo) / (2.0 * M_PI);
  while (n < 16.0 * (cycles + 1.0) && n < (1 << 14)) n *= 2;
  cx prev = detail::simpson_oscillatory(f, lo, hi, omega, n);
  for (int iter = 0; iter < 12; ++iter) {
    n *= 2;
    const cx cur = detail::simpson_oscillatory(f, lo, hi, omega, n);
    if (std::abs(cur - prev) <= 1e-11 * (std::abs(cur) + 1e-12)) return cur;
    prev = cur;
  }
  throw NumericalError("atom_fourier: quadrature did not converge for " +
                       atom.describe() + " at omega=" + std::to_string(omega));
}

// M x M Toeplitz block S with S(m, m') = integral psi(xi) e^{j pi nu (m-m') xi}.
// psi real implies S Hermitian (s_{-k} = conj(s_k)).
inline Mat atom_toeplitz(const DensityAtom& atom, int m, double nu) {
  if (m < 1) throw DomainError("atom_toeplitz: m must be >= 1");
  if (!(nu > 0.0)) throw DomainError("atom_toeplitz: nu must be > 0");
  Vec moments(m);
  for (int k = 0; k < m; ++k)
    moments(k) = atom_fourier(atom, M_PI * nu * k);
  Mat s(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      const int k = r - c;
      s(r, c) = k >= 0 ? moments(k) : std::conj(moments(-k));
    }
  return s;
}

}  // namespace dpmimo
