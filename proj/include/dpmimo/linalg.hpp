// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Small dense linear-algebra helpers on top of Eigen: Hermitian hygiene,
// PSD projections/factorizations and the unitary DFT matrix.

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "dpmimo/errors.hpp"

namespace dpmimo {

using cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Mat2 = Eigen::Matrix2cd;
using RealVec = Eigen::VectorXd;
using RealMat = Eigen::MatrixXd;

inline Mat hermitize(const Mat& a) { return 0.5 * (a + a.adjoint()); }

inline Mat2 hermitize2(const Mat2& a) { return 0.5 * (a + a.adjoint()); }

inline double hermitian_deviation(const Mat& a) {
  return (a - a.adjoint()).norm();
}

inline bool is_hermitian(const Mat& a, double tol = 1e-10) {
  const double scale = std::max(1.0, a.norm());
  return hermitian_deviation(a) <= tol * scale;
}

inline double min_eigenvalue(const Mat& hermitian) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(hermitian),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Eigenvalues of a Hermitian 2x2 [[a, c],[conj(c), b]]:
//   (a+b)/2 +- sqrt(((a-b)/2)^2 + |c|^2).
inline void eig2x2_hermitian(const Mat2& h, double& lo, double& hi) {
  const double a = h(0, 0).real();
  const double b = h(1, 1).real();
  const double mean = 0.5 * (a + b);
  const double disc = std::hypot(0.5 * (a - b), std::abs(h(0, 1)));
  lo = mean - disc;
  hi = mean + disc;
}

// Closed-form projection of a Hermitian 2x2 matrix onto the PSD cone
// (clips the negative eigenvalue). Idempotent and non-expansive.
inline Mat2 project_psd_2x2(const Mat2& m) {
  const Mat2 h = hermitize2(m);
  double lo, hi;
  eig2x2_hermitian(h, lo, hi);
  if (lo >= 0.0) return h;
  if (hi <= 0.0) return Mat2::Zero();
  // Eigenvector for `hi`: (h - lo*I) has rank 1 and equals (hi-lo) u u^H.
  Mat2 shifted = h - lo * Mat2::Identity();
  // Pick the larger column for numerical stability.
  Eigen::Vector2cd u = shifted.col(0).norm() >= shifted.col(1).norm()
                           ? Eigen::Vector2cd(shifted.col(0))
                           : Eigen::Vector2cd(shifted.col(1));
  const double n = u.norm();
  if (n == 0.0) return Mat2::Zero();
  u /= n;
  return hi * (u * u.adjoint());
}

// Factor a Hermitian PSD matrix as L L^H via eigendecomposition, clipping
// eigenvalues in [-tol_abs, 0) to zero. Eigenvalues below -tol_abs mean the
// input is not a covariance and raise InvariantViolation. tol is relative
// to the largest eigenvalue (floored at 1).
struct PsdFactor {
  Mat l;          // dim x rank
  int rank = 0;
  double min_eig = 0.0;
};

inline PsdFactor psd_factor(const Mat& sigma, double tol = 1e-8) {
  if (sigma.rows() != sigma.cols())
    throw InvariantViolation("psd_factor: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(sigma));
  if (es.info() != Eigen::Success)
    throw NumericalError("psd_factor: eigendecomposition failed");
  const RealVec& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev(ev.size() - 1));
  const double floor = -tol * scale;
  PsdFactor out;
  out.min_eig = ev(0);
  if (ev(0) < floor)
    throw InvariantViolation(
        "psd_factor: matrix is not PSD within tolerance (min eigenvalue " +
        std::to_string(ev(0)) + ")");
  // Anything inside [-tol, tol] (relative) is numerical zero: negatives are
  // clipped, and positive noise must not inflate the rank.
  const double cutoff = tol * scale;
  int rank = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > cutoff) ++rank;
  out.l.resize(sigma.rows(), rank);
  int c = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > cutoff)
      out.l.col(c++) = es.eigenvectors().col(i) * std::sqrt(ev(i));
  }
  out.rank = rank;
  return out;
}

// Unitary DFT matrix, F(m, n) = exp(+j 2 pi m n / size) / sqrt(size).
inline Mat dft_matrix(int size) {
  if (size < 1) throw DomainError("dft_matrix: size must be >= 1");
  Mat f(size, size);
  const double w = 2.0 * M_PI / static_cast<double>(size);
  const double s = 1.0 / std::sqrt(static_cast<double>(size));
  for (int m = 0; m < size; ++m)
    for (int n = 0; n < size; ++n) {
      // Reduce the phase index mod size before multiplying to keep the
      // argument small (exactness of e.g. F(2,2) for size 4 matters in tests).
      const long long idx = (1LL * m * n) % size;
      f(m, n) = s * std::polar(1.0, w * static_cast<double>(idx));
    }
  return f;
}

// Kronecker product of a 2x2 polarization block with an M x M spatial
// block; the layout [H; V] stacks antennas within each polarization.
inline Mat kron2x2(const Mat2& c, const Mat& s) {
  const Eigen::Index m = s.rows();
  Mat out(2 * m, 2 * m);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      out.block(p * m, q * m, m, m) = c(p, q) * s;
  return out;
}

// Numerical rank: count of singular values above tol * largest.
inline int numerical_rank(const Mat& a, double rel_tol = 1e-8) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const RealVec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

inline double rel_frobenius_error(const Mat& truth, const Mat& est) {
  const double denom = truth.norm();
  if (denom == 0.0)
    throw DomainError("rel_frobenius_error: reference matrix has zero norm");
  return (est - truth).norm() / denom;
}

}  // namespace dpmimo
