// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Structured covariance fit: least squares over 2x2-PSD coefficient blocks
//
//   min_{W_i >= 0}  || Sigma_hat - sum_i W_i (x) S_i ||_F^2
//
// solved by projected gradient descent in coefficient space. Blocks are
// stored in the orthonormal real coordinates (w00, w11, sqrt2 Re w01,
// sqrt2 Im w01) so that Euclidean geometry matches the matrix trace inner
// product; the whole iteration then reduces to one (B x B) * (B x 4) GEMM
// plus B closed-form 2x2 cone projections. Step size 1/lambda_max(Gram)
// equals the inverse Lipschitz constant, so descent is monotone.

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "dpmimo/basis.hpp"
#include "dpmimo/cov_estimate.hpp"
#include "dpmimo/errors.hpp"
#include "dpmimo/linalg.hpp"

namespace dpmimo {

struct PsdLsConfig {
  int max_iters = 10000;
  double rel_tol = 1e-8;                       // relative objective change
  std::vector<double>* objective_log = nullptr;  // optional trace (tests)
};

struct PsdLsResult {
  std::vector<Mat2> coeffs;   // aligned with the basis, spikes first
  CovEstimate fitted;
  double objective = 0.0;
  double initial_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double pg_residual = 0.0;   // ||W - proj(W - tau g)|| / tau at exit
};

// Raised when the iteration cap is hit before the tolerance; carries the
// best (= last, by monotonicity) iterate so callers can keep going with a
// flagged result.
class PsdLsNonConvergence : public NumericalError {
 public:
  PsdLsNonConvergence(const std::string& what, PsdLsResult best)
      : NumericalError(what), best_(std::move(best)) {}
  const PsdLsResult& best() const noexcept { return best_; }

 private:
  PsdLsResult best_;
};

namespace detail {

inline Eigen::Vector4d flatten_block(const Mat2& w) {
  return {w(0, 0).real(), w(1, 1).real(), M_SQRT2 * w(0, 1).real(),
          M_SQRT2 * w(0, 1).imag()};
}

inline Mat2 unflatten_block(const Eigen::Vector4d& f) {
  Mat2 w;
  const cx off(f(2) * M_SQRT1_2, f(3) * M_SQRT1_2);
  w << cx(f(0), 0.0), off, std::conj(off), cx(f(1), 0.0);
  return w;
}

}  // namespace detail

inline CovEstimate reconstruct_cov(
    const std::vector<Mat2>& coeffs, const BasisSet& basis,
    CovProvenance provenance = CovProvenance::kStructured) {
  if (coeffs.size() != static_cast<std::size_t>(basis.size()))
    throw InvariantViolation("reconstruct_cov: coefficient/basis size mismatch");
  Mat sigma = Mat::Zero(basis.geom.dim(), basis.geom.dim());
  for (int i = 0; i < basis.size(); ++i)
    sigma += kron2x2(coeffs[i], basis.matrices[i]);
  CovEstimate est;
  est.sigma = hermitize(sigma);
  est.provenance = provenance;
  est.coeffs = coeffs;
  est.aoas = basis.spike_aoas;
  return est;
}

inline PsdLsResult psd_ls(const CovEstimate& target, const BasisSet& basis,
                          const PsdLsConfig& cfg = {}) {
  target.validate();
  if (basis.size() == 0)
    throw ConfigError("psd_ls.basis", "basis must be non-empty");
  if (basis.geom.dim() != target.dim())
    throw InvariantViolation("psd_ls: basis dimension " +
                             std::to_string(basis.geom.dim()) +
                             " != target dimension " +
                             std::to_string(target.dim()));
  if (cfg.max_iters < 1)
    throw ConfigError("psd_ls.max_iters", "must be >= 1");

  const int b = basis.size();
  const int m = basis.geom.m;
  const Mat sigma = hermitize(target.sigma);

  // Gram(i, j) = tr(S_i S_j); real for Hermitian blocks.
  RealMat gram(b, b);
  for (int i = 0; i < b; ++i)
    for (int j = i; j < b; ++j) {
      const double v =
          basis.matrices[i].cwiseProduct(basis.matrices[j].conjugate())
              .sum()
              .real();
      gram(i, j) = v;
      gram(j, i) = v;
    }

  // Data terms C_i(p, q) = tr(S_i Sigma_pq) (Hermitian since Sigma is).
  RealMat cf(b, 4);
  for (int i = 0; i < b; ++i) {
    Mat2 ci;
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q)
        ci(p, q) = basis.matrices[i]
                       .cwiseProduct(sigma.block(p * m, q * m, m, m).transpose())
                       .sum();
    cf.row(i) = detail::flatten_block(hermitize2(ci)).transpose();
  }

  Eigen::SelfAdjointEigenSolver<RealMat> ges(gram, Eigen::EigenvaluesOnly);
  const double lmax = ges.eigenvalues()(b - 1);
  if (!(lmax > 0.0))
    throw InvariantViolation("psd_ls: basis Gram matrix is identically zero");
  const double tau = 1.0 / lmax;

  const double c0 = sigma.squaredNorm();
  RealMat wf = RealMat::Zero(b, 4);

  auto project_rows = [&](RealMat& x) {
    for (int i = 0; i < b; ++i) {
      const Eigen::Vector4d row = x.row(i).transpose();
      x.row(i) =
          detail::flatten_block(project_psd_2x2(detail::unflatten_block(row)))
              .transpose();
    }
  };

  PsdLsResult res;
  res.initial_objective = c0;
  double f_prev = std::numeric_limits<double>::infinity();
  double f_cur = c0;
  RealMat gw(b, 4);
  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    gw.noalias() = gram * wf;
    f_cur = c0 - 2.0 * cf.cwiseProduct(wf).sum() + wf.cwiseProduct(gw).sum();
    if (cfg.objective_log) cfg.objective_log->push_back(f_cur);
    if (iter > 0 && std::abs(f_prev - f_cur) <=
                        cfg.rel_tol * std::max(std::abs(f_prev), 1e-30)) {
      res.converged = true;
      break;
    }
    f_prev = f_cur;
    wf -= tau * (gw - cf);
    project_rows(wf);
  }
  res.iterations = iter;

  // Projected-gradient residual at the exit point (first-order optimality).
  gw.noalias() = gram * wf;
  if (!res.converged) {
    // The cap was hit right after an update; refresh f for the final iterate.
    f_cur = c0 - 2.0 * cf.cwiseProduct(wf).sum() + wf.cwiseProduct(gw).sum();
  }
  res.objective = f_cur;
  RealMat step = wf - tau * (gw - cf);
  project_rows(step);
  res.pg_residual = (wf - step).norm() / tau;

  res.coeffs.resize(b);
  for (int i = 0; i < b; ++i)
    res.coeffs[i] = detail::unflatten_block(wf.row(i).transpose());
  res.fitted = reconstruct_cov(res.coeffs, basis);

  if (!res.converged)
    throw PsdLsNonConvergence(
        "psd_ls: no convergence after " + std::to_string(cfg.max_iters) +
            " iterations (pg residual " + std::to_string(res.pg_residual) +
            ")",
        res);
  return res;
}

}  // namespace dpmimo
