// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Downlink training and beamforming in the reduced beam space: orthogonal
// pilots, MMSE effective-channel estimation, zero-forcing with unit-norm
// columns and uniform power, and the closed-form sum-rate of the result.

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dpmimo/errors.hpp"
#include "dpmimo/linalg.hpp"
#include "dpmimo/rng.hpp"

namespace dpmimo {

struct LinkConfig {
  int t = 64;        // coherence block length (symbols)
  int t_dl = 8;      // downlink training length
  double p_dl = 1.0; // total transmit power (also pilot row norm^2)
  double n0 = 0.1;   // noise variance

  void validate() const {
    if (t < 1) throw ConfigError("link.t", "must be >= 1");
    if (t_dl < 1) throw ConfigError("link.t_dl", "must be >= 1");
    if (t_dl > t) throw ConfigError("link.t_dl", "must be <= t");
    if (!(p_dl > 0.0)) throw ConfigError("link.p_dl", "must be > 0");
    if (!(n0 >= 0.0)) throw ConfigError("link.n0", "must be >= 0");
  }

  double prelog() const {
    return 1.0 - static_cast<double>(t_dl) / static_cast<double>(t);
  }
};

// T_dl x M' pilot matrix with orthogonal rows, Psi Psi^H = p_dl * I. Drawn
// once per coherence block via QR of a gaussian matrix.
inline Mat gen_pilot_matrix(int t_dl, int m_prime, double p_dl, Rng& rng) {
  if (t_dl < 1) throw ConfigError("pilots.t_dl", "must be >= 1");
  if (!(p_dl > 0.0)) throw ConfigError("pilots.p_dl", "must be > 0");
  if (t_dl > m_prime)
    throw ConfigError("pilots.t_dl",
                      "cannot exceed the beam-space dimension M' (" +
                          std::to_string(m_prime) + ")");
  Mat g(m_prime, t_dl);
  for (Eigen::Index c = 0; c < g.cols(); ++c)
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      g(r, c) = rng.complex_normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(m_prime, t_dl);
  return std::sqrt(p_dl) * q.adjoint();
}

// One user's training observation y = Psi (B h) + n, n ~ CN(0, n0 I).
inline Vec dl_training(const Vec& h, const Mat& b, const Mat& psi, double n0,
                       Rng& rng) {
  if (b.cols() != h.size())
    throw InvariantViolation("dl_training: precoder/channel size mismatch");
  if (psi.cols() != b.rows())
    throw InvariantViolation("dl_training: pilot/precoder size mismatch");
  if (!(n0 >= 0.0)) throw ConfigError("link.n0", "must be >= 0");
  Vec y = psi * (b * h);
  const double sn = std::sqrt(n0);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sn * rng.complex_normal();
  return y;
}

// MMSE channel estimator for the pilot model y = Psi B h + n with prior
// h ~ CN(0, Sigma). The gain Sigma B^H Psi^H (Psi B Sigma B^H Psi^H +
// n0 I)^{-1} is precomputed once per (Psi, B, Sigma, n0); a pseudo-inverse
// fallback covers the noiseless rank-deficient corner.
class MmseEstimator {
 public:
  MmseEstimator(const Mat& sigma, const Mat& b, const Mat& psi, double n0) {
    if (sigma.rows() != sigma.cols() || sigma.rows() != b.cols())
      throw InvariantViolation("mmse: covariance/precoder size mismatch");
    if (psi.cols() != b.rows())
      throw InvariantViolation("mmse: pilot/precoder size mismatch");
    if (!(n0 >= 0.0)) throw ConfigError("link.n0", "must be >= 0");
    const Mat pb = psi * b;                       // T_dl x 2M
    const Mat cross = hermitize(sigma) * pb.adjoint();  // 2M x T_dl
    Mat a = pb * cross;
    a += n0 * Mat::Identity(a.rows(), a.cols());
    a = hermitize(a);
    Eigen::LLT<Mat> llt(a);
    if (llt.info() == Eigen::Success) {
      gain_ = llt.solve(cross.adjoint()).adjoint();
    } else {
      used_pinv_ = true;
      gain_ = cross * a.completeOrthogonalDecomposition().pseudoInverse();
    }
  }

  const Mat& gain() const noexcept { return gain_; }
  bool used_pseudo_inverse() const noexcept { return used_pinv_; }

  Vec estimate(const Vec& y) const {
    if (y.size() != gain_.cols())
      throw InvariantViolation("mmse: observation length mismatch");
    return gain_ * y;
  }

 private:
  Mat gain_;
  bool used_pinv_ = false;
};

// Zero forcing on the estimated effective channels (columns of h_eff_hat,
// M' x K'). Columns of v are unit norm.
struct ZfResult {
  Mat v;
  RealVec inv_col_norms;  // diag(J)^{1/2} = 1 / ||P_col||
  double cond = 0.0;
};

inline ZfResult zf_beamformer(const Mat& h_eff_hat, double cond_cap = 1e8) {
  if (h_eff_hat.cols() < 1)
    throw ConfigError("zf", "need at least one user column");
  if (h_eff_hat.rows() < h_eff_hat.cols())
    throw IllConditionedError(
        "zf: more users than beam dimensions", std::numeric_limits<double>::infinity());
  Eigen::JacobiSVD<Mat> svd(h_eff_hat);
  const RealVec& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? sv(0) / smin
                                 : std::numeric_limits<double>::infinity();
  if (!(cond < cond_cap))
    throw IllConditionedError("zf: estimated channel matrix is "
                              "ill-conditioned",
                              cond);
  const Mat gram = h_eff_hat.adjoint() * h_eff_hat;
  Mat p = gram.ldlt().solve(h_eff_hat.adjoint()).adjoint();  // H (H^H H)^-1
  ZfResult res;
  res.cond = cond;
  res.inv_col_norms.resize(p.cols());
  res.v.resize(p.rows(), p.cols());
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    const double n = p.col(c).norm();
    res.inv_col_norms(c) = 1.0 / n;
    res.v.col(c) = p.col(c) / n;
  }
  return res;
}

struct TrialResult {
  double sum_rate = 0.0;
  RealVec sinr;         // per served user
  Mat b_coeffs;         // K' x K' effective gains including power scaling
  double prelog = 0.0;
};

// Closed-form rates for true channels h_true (2M x K') under precoding
// B^H V with uniform per-user power p_dl / K'.
inline TrialResult evaluate_trial(const Mat& h_true, const Mat& b,
                                  const Mat& v, const LinkConfig& cfg) {
  cfg.validate();
  const Eigen::Index kprime = h_true.cols();
  if (v.cols() != kprime)
    throw InvariantViolation("evaluate_trial: user count mismatch");
  if (b.cols() != h_true.rows() || v.rows() != b.rows())
    throw InvariantViolation("evaluate_trial: precoder shape mismatch");
  const double pk = cfg.p_dl / static_cast<double>(kprime);
  TrialResult res;
  res.prelog = cfg.prelog();
  res.b_coeffs = std::sqrt(pk) * ((b * h_true).adjoint() * v);
  res.sinr.resize(kprime);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < kprime; ++k) {
    double interf = 0.0;
    for (Eigen::Index l = 0; l < kprime; ++l)
      if (l != k) interf += std::norm(res.b_coeffs(k, l));
    res.sinr(k) = std::norm(res.b_coeffs(k, k)) / (cfg.n0 + interf);
    sum += std::log2(1.0 + res.sinr(k));
  }
  res.sum_rate = res.prelog * sum;
  return res;
}

// Mean over users of ||B (h - h_hat)||^2 / ||B h||^2.
inline double effective_error(const Mat& h_true, const Mat& h_est,
                              const Mat& b) {
  if (h_true.rows() != h_est.rows() || h_true.cols() != h_est.cols())
    throw InvariantViolation("effective_error: shape mismatch");
  double acc = 0.0;
  int counted = 0;
  for (Eigen::Index c = 0; c < h_true.cols(); ++c) {
    const double denom = (b * h_true.col(c)).squaredNorm();
    if (denom <= 0.0) continue;
    acc += (b * (h_true.col(c) - h_est.col(c))).squaredNorm() / denom;
    ++counted;
  }
  return counted ? acc / counted : 0.0;
}

// Optional symbol-level sanity check: empirical interference+noise power
// per user versus the analytic value used in the SINR. Returns the largest
// relative gap.
inline double validate_inp_mc(const Mat& b_coeffs, double n0, int n_symbols,
                              Rng& rng) {
  if (n_symbols < 1) throw ConfigError("mc_symbols", "must be >= 1");
  const Eigen::Index kprime = b_coeffs.rows();
  RealVec emp = RealVec::Zero(kprime);
  Vec s(kprime);
  const double sn = std::sqrt(n0);
  for (int t = 0; t < n_symbols; ++t) {
    for (Eigen::Index l = 0; l < kprime; ++l) s(l) = rng.complex_normal();
    for (Eigen::Index k = 0; k < kprime; ++k) {
      cx r = sn * rng.complex_normal();
      for (Eigen::Index l = 0; l < kprime; ++l)
        if (l != k) r += b_coeffs(k, l) * s(l);
      emp(k) += std::norm(r);
    }
  }
  emp /= static_cast<double>(n_symbols);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < kprime; ++k) {
    double analytic = n0;
    for (Eigen::Index l = 0; l < kprime; ++l)
      if (l != k) analytic += std::norm(b_coeffs(k, l));
    if (analytic <= 0.0) continue;
    worst = std::max(worst, std::abs(emp(k) - analytic) / analytic);
  }
  return worst;
}

}  // namespace dpmimo
