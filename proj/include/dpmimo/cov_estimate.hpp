// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Covariance estimates with provenance. The power-normalized sample
// covariance subtracts the known noise floor and may be indefinite; it is
// handed to the structured fit as-is.

#pragma once

#include <string>
#include <vector>

#include "dpmimo/errors.hpp"
#include "dpmimo/linalg.hpp"

namespace dpmimo {

enum class CovProvenance { kTrue, kSample, kStructured, kTransformed };

inline const char* to_string(CovProvenance p) {
  switch (p) {
    case CovProvenance::kTrue: return "true";
    case CovProvenance::kSample: return "sample";
    case CovProvenance::kStructured: return "structured";
    case CovProvenance::kTransformed: return "transformed";
  }
  return "?";
}

struct CovEstimate {
  Mat sigma;
  CovProvenance provenance = CovProvenance::kSample;
  // For structured/transformed estimates: basis coefficients (spikes first)
  // and the spike angles the basis was built from.
  std::vector<Mat2> coeffs;
  std::vector<double> aoas;
  bool flagged = false;  // degraded-quality marker (padded MUSIC, cap hit)

  int dim() const { return static_cast<int>(sigma.rows()); }

  void validate() const {
    if (sigma.rows() != sigma.cols())
      throw InvariantViolation("cov estimate: matrix must be square");
    if (sigma.rows() % 2 != 0)
      throw InvariantViolation("cov estimate: dimension must be even (2M)");
  }
};

// Sigma_hat = (1/(N P)) sum_t y_t y_t^H - (N0/P) I. Unbiased for the true
// covariance under the pilot model; indefinite outputs are deliberate.
inline CovEstimate sample_covariance(const Mat& obs, double p, double n0) {
  if (obs.cols() < 1)
    throw ConfigError("sample_covariance.n", "need at least one observation");
  if (!(p > 0.0)) throw ConfigError("sample_covariance.p", "must be > 0");
  if (!(n0 >= 0.0)) throw ConfigError("sample_covariance.n0", "must be >= 0");
  const double n = static_cast<double>(obs.cols());
  Mat s = (obs * obs.adjoint()) / (n * p);
  s -= (n0 / p) * Mat::Identity(obs.rows(), obs.rows());
  CovEstimate est;
  est.sigma = hermitize(s);
  est.provenance = CovProvenance::kSample;
  est.validate();
  return est;
}

}  // namespace dpmimo
