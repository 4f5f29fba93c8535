// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Active channel sparsification: solve the beam-selection MILP and turn
// the surviving beams into a reduced-dimension DFT precoder B (M' x 2M).

#pragma once

#include <vector>

#include "dpmimo/beams.hpp"
#include "dpmimo/errors.hpp"
#include "dpmimo/linalg.hpp"
#include "dpmimo/milp.hpp"

namespace dpmimo {

struct AcsSolution {
  std::vector<int> beams;  // active beam indices (sorted ascending)
  std::vector<int> users;  // served user indices (sorted ascending)
  MilpSolution milp;

  int m_prime() const { return static_cast<int>(beams.size()); }
  int k_served() const { return static_cast<int>(users.size()); }
};

inline AcsSolution sparsify(const BeamGraph& graph, int t_dl, double p0,
                            double delta, const SolveLimits& limits = {}) {
  const MilpInstance inst = MilpInstance::from_graph(graph, t_dl, p0, delta);
  AcsSolution sol;
  sol.milp = solve_milp(inst, limits);
  for (int m = 0; m < inst.n_beams(); ++m)
    if (sol.milp.assignment.x(m)) sol.beams.push_back(m);
  for (int k = 0; k < inst.n_users(); ++k)
    if (sol.milp.assignment.y(k)) sol.users.push_back(k);
  return sol;
}

// Rows of B are the conjugate-transposed DFT beams kept by the selection:
// effective channels become B h with dimension M' = |beams|. Beam indices
// 0..M-1 address the H block, M..2M-1 the V block of the stacked channel.
inline Mat beam_precoder(const std::vector<int>& beams, int m) {
  if (beams.empty())
    throw DomainError("precoder: active beam set is empty");
  const Mat f = dft_matrix(m);
  Mat b = Mat::Zero(static_cast<Eigen::Index>(beams.size()), 2 * m);
  for (std::size_t i = 0; i < beams.size(); ++i) {
    const int idx = beams[i];
    if (idx < 0 || idx >= 2 * m)
      throw DomainError("precoder: beam index out of range");
    const int pol = idx / m;     // 0 = H, 1 = V
    const int col = idx % m;
    b.row(static_cast<Eigen::Index>(i)).segment(pol * m, m) =
        f.col(col).adjoint();
  }
  return b;
}

inline Mat build_precoder(const AcsSolution& sol, int m) {
  return beam_precoder(sol.beams, m);
}

// The no-sparsification baseline keeps every beam of both polarizations.
inline Mat full_beam_precoder(int m) {
  std::vector<int> all(2 * m);
  for (int i = 0; i < 2 * m; ++i) all[i] = i;
  return beam_precoder(all, m);
}

}  // namespace dpmimo
