// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Virtual (DFT) beam-domain statistics and the user/beam bipartite graph.
// Beam n of a polarization points at the angle xi = 2n/M wrapped to
// [-1, 1); beams 0..M-1 are H-polarized, M..2M-1 V-polarized.

#pragma once

#include <vector>

#include "dpmimo/errors.hpp"
#include "dpmimo/linalg.hpp"

namespace dpmimo {

struct BeamVariances {
  RealVec lambda_h;
  RealVec lambda_v;
  int clipped = 0;  // number of (slightly) negative diagonals clipped

  RealVec stacked() const {
    RealVec s(lambda_h.size() + lambda_v.size());
    s << lambda_h, lambda_v;
    return s;
  }

  double total_power() const { return lambda_h.sum() + lambda_v.sum(); }
};

inline double beam_angle(int beam, int m) {
  if (m < 1) throw DomainError("beam_angle: m must be >= 1");
  if (beam < 0 || beam >= 2 * m)
    throw DomainError("beam_angle: beam index out of range");
  double xi = 2.0 * (beam % m) / m;
  if (xi >= 1.0) xi -= 2.0;
  return xi;
}

// Per-beam variances: the diagonal of F^H Sigma_pp F for each polarization
// block. Small negative diagonals (numerical) are clipped to zero and
// counted.
inline BeamVariances beam_variances(const Mat& sigma_dl) {
  if (sigma_dl.rows() != sigma_dl.cols() || sigma_dl.rows() % 2 != 0)
    throw InvariantViolation("beam_variances: covariance must be 2M x 2M");
  const int m = static_cast<int>(sigma_dl.rows()) / 2;
  const Mat f = dft_matrix(m);
  BeamVariances bv;
  bv.lambda_h =
      (f.adjoint() * sigma_dl.topLeftCorner(m, m) * f).diagonal().real();
  bv.lambda_v =
      (f.adjoint() * sigma_dl.bottomRightCorner(m, m) * f).diagonal().real();
  for (RealVec* v : {&bv.lambda_h, &bv.lambda_v})
    for (int i = 0; i < m; ++i)
      if ((*v)(i) < 0.0) {
        (*v)(i) = 0.0;
        ++bv.clipped;
      }
  return bv;
}

struct BeamGraph {
  RealMat weights;            // 2M x K raw beam variances
  Eigen::MatrixXi adjacency;  // 1 iff weight >= epsilon
  double epsilon = 0.0;

  int n_beams() const { return static_cast<int>(weights.rows()); }
  int n_users() const { return static_cast<int>(weights.cols()); }

  void validate() const {
    if (weights.rows() != adjacency.rows() ||
        weights.cols() != adjacency.cols())
      throw InvariantViolation("beam graph: weight/adjacency shape mismatch");
    if (weights.rows() % 2 != 0)
      throw InvariantViolation("beam graph: beam count must be 2M");
  }
};

inline double default_epsilon(const std::vector<BeamVariances>& users) {
  double mx = 0.0;
  for (const auto& u : users) mx = std::max(mx, u.stacked().maxCoeff());
  return 1e-3 * mx;
}

inline double default_p0(const std::vector<BeamVariances>& users) {
  double mx = 0.0;
  for (const auto& u : users) mx = std::max(mx, u.total_power());
  return 0.05 * mx;
}

inline double default_delta(int m) {
  if (m < 1) throw DomainError("default_delta: m must be >= 1");
  return 1.0 / (4.0 * m);
}

inline BeamGraph build_graph(const std::vector<BeamVariances>& users,
                             double epsilon) {
  if (users.empty()) throw ConfigError("graph.users", "need at least one user");
  if (!(epsilon > 0.0)) throw ConfigError("graph.epsilon", "must be > 0");
  const Eigen::Index nb = users.front().stacked().size();
  BeamGraph g;
  g.epsilon = epsilon;
  g.weights.resize(nb, static_cast<Eigen::Index>(users.size()));
  g.adjacency.resize(nb, static_cast<Eigen::Index>(users.size()));
  for (std::size_t k = 0; k < users.size(); ++k) {
    const RealVec s = users[k].stacked();
    if (s.size() != nb)
      throw InvariantViolation("build_graph: users disagree on beam count");
    for (Eigen::Index mIdx = 0; mIdx < nb; ++mIdx) {
      // Sub-threshold variances are zeroed: stored weights are {0} or >= eps.
      const bool edge = s(mIdx) >= epsilon;
      g.adjacency(mIdx, static_cast<Eigen::Index>(k)) = edge ? 1 : 0;
      g.weights(mIdx, static_cast<Eigen::Index>(k)) = edge ? s(mIdx) : 0.0;
    }
  }
  g.validate();
  return g;
}

}  // namespace dpmimo
