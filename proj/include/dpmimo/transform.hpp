// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// UL->DL covariance transform: keep the fitted coefficients, rebuild the
// basis at the downlink carrier ratio nu. With nu = 1 this goes through the
// identical code path as the uplink reconstruction, so the result is
// bit-for-bit equal to it.

#pragma once

#include <vector>

#include "dpmimo/basis.hpp"
#include "dpmimo/cov_estimate.hpp"
#include "dpmimo/errors.hpp"
#include "dpmimo/psd_ls.hpp"

namespace dpmimo {

inline CovEstimate transform_to_dl(
    const std::vector<Mat2>& coeffs, const BasisSet& ul_basis, double nu,
    const std::vector<Mat>* cached_dl_atoms = nullptr) {
  if (!(nu > 0.0)) throw ConfigError("transform.nu", "must be > 0");
  if (coeffs.size() != static_cast<std::size_t>(ul_basis.size()))
    throw InvariantViolation(
        "transform_to_dl: coefficient/basis size mismatch");
  const ArrayGeometry dl_geom = ArrayGeometry::dl(ul_basis.geom.m, nu);
  const BasisSet dl_basis = build_basis(ul_basis.spike_aoas,
                                        ul_basis.dictionary, dl_geom,
                                        cached_dl_atoms);
  return reconstruct_cov(coeffs, dl_basis, CovProvenance::kTransformed);
}

}  // namespace dpmimo
