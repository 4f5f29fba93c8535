// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Shared test oracles. Everything here is implemented independently of the
// library code it checks: quadrature is adaptive Simpson (the library uses
// fixed composite panels), matching and the beam-selection optimum are
// exhaustive recursions.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "dpmimo/linalg.hpp"
#include "dpmimo/milp.hpp"
#include "dpmimo/rng.hpp"

namespace testutil {

using dpmimo::cx;
using dpmimo::Mat;
using dpmimo::Mat2;

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature for complex-valued integrands.

namespace detail {

inline cx simpson_panel(double a, double b, cx fa, cx fm, cx fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline cx adaptive(const std::function<cx(double)>& f, double a, double b,
                   cx fa, cx fm, cx fb, cx whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const cx flm = f(lm), frm = f(rm);
  const cx left = simpson_panel(a, m, fa, flm, fm);
  const cx right = simpson_panel(m, b, fm, frm, fb);
  const cx delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline cx quad(const std::function<cx(double)>& f, double a, double b,
               double tol = 1e-12) {
  if (a == b) return {0.0, 0.0};
  // Split into a few seed panels so oscillatory integrands cannot fool the
  // first refinement test.
  const int seeds = 64;
  cx acc{0.0, 0.0};
  for (int i = 0; i < seeds; ++i) {
    const double lo = a + (b - a) * i / seeds;
    const double hi = a + (b - a) * (i + 1) / seeds;
    const double mid = 0.5 * (lo + hi);
    const cx flo = f(lo), fmid = f(mid), fhi = f(hi);
    const cx whole = detail::simpson_panel(lo, hi, flo, fmid, fhi);
    acc += detail::adaptive(f, lo, hi, flo, fmid, fhi, whole, tol / seeds, 40);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Exhaustive maximum bipartite matching (recursion over left vertices).

inline int brute_matching(const std::vector<std::vector<int>>& adj, int n_right) {
  std::vector<char> used(static_cast<std::size_t>(n_right), 0);
  std::function<int(std::size_t)> go = [&](std::size_t i) -> int {
    if (i == adj.size()) return 0;
    int best = go(i + 1);  // leave vertex i unmatched
    for (int v : adj[i]) {
      if (used[static_cast<std::size_t>(v)]) continue;
      used[static_cast<std::size_t>(v)] = 1;
      best = std::max(best, 1 + go(i + 1));
      used[static_cast<std::size_t>(v)] = 0;
    }
    return best;
  };
  return go(0);
}

// ---------------------------------------------------------------------------
// Exhaustive beam-selection optimum: enumerate every binary (x, y) pattern,
// keep feasible ones, score by (matching, active beams) lexicographically.

struct BruteMilpResult {
  int matching = 0;
  int beams = 0;
  double objective = 0.0;
  bool feasible_found = false;
};

inline BruteMilpResult brute_milp(const dpmimo::MilpInstance& inst) {
  const int nb = inst.n_beams(), nu = inst.n_users();
  BruteMilpResult best;
  for (unsigned xm = 0; xm < (1u << nb); ++xm) {
    for (unsigned yk = 0; yk < (1u << nu); ++yk) {
      bool ok = true;
      // A beam needs at least one selected neighboring user.
      for (int m = 0; m < nb && ok; ++m) {
        if (!(xm >> m & 1u)) continue;
        bool has = false;
        for (int k = 0; k < nu; ++k)
          if ((yk >> k & 1u) && inst.adjacency(m, k)) has = true;
        ok = has;
      }
      // Selected users: pilot budget and power floor.
      for (int k = 0; k < nu && ok; ++k) {
        if (!(yk >> k & 1u)) continue;
        int deg = 0;
        double pow = 0.0;
        for (int m = 0; m < nb; ++m)
          if ((xm >> m & 1u) && inst.adjacency(m, k)) {
            ++deg;
            pow += inst.weights(m, k);
          }
        ok = deg <= inst.t_dl && pow >= inst.p0 - 1e-12;
      }
      if (!ok) continue;
      std::vector<std::vector<int>> adj;
      for (int m = 0; m < nb; ++m) {
        if (!(xm >> m & 1u)) continue;
        std::vector<int> row;
        for (int k = 0; k < nu; ++k)
          if ((yk >> k & 1u) && inst.adjacency(m, k)) row.push_back(k);
        adj.push_back(std::move(row));
      }
      const int match = adj.empty() ? 0 : brute_matching(adj, nu);
      int beams = 0;
      for (int m = 0; m < nb; ++m) beams += xm >> m & 1u;
      if (!best.feasible_found || match > best.matching ||
          (match == best.matching && beams > best.beams)) {
        best.feasible_found = true;
        best.matching = match;
        best.beams = beams;
        best.objective = match + inst.delta * beams;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Random fixtures.

inline Mat2 random_psd2(dpmimo::Rng& rng) {
  Mat2 g;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      g(r, c) = rng.complex_normal();
  return g * g.adjoint();
}

inline Mat2 random_hermitian2(dpmimo::Rng& rng) {
  Mat2 h;
  h(0, 0) = cx(rng.normal(), 0.0);
  h(1, 1) = cx(rng.normal(), 0.0);
  h(0, 1) = rng.complex_normal();
  h(1, 0) = std::conj(h(0, 1));
  return h;
}

// Random beam-selection instance with edge probability `p_edge`; weights
// uniform on [0.1, 1]. Every user gets at least one edge so power floors
// and degrees exercise nontrivially.
inline dpmimo::MilpInstance random_instance(dpmimo::Rng& rng, int nb, int nu,
                                            int t_dl, double p0_frac,
                                            double p_edge = 0.5) {
  dpmimo::MilpInstance inst;
  inst.weights = dpmimo::RealMat::Zero(nb, nu);
  inst.adjacency = Eigen::MatrixXi::Zero(nb, nu);
  double max_user_power = 0.0;
  for (int k = 0; k < nu; ++k) {
    double total = 0.0;
    for (int m = 0; m < nb; ++m) {
      if (rng.uniform() < p_edge) {
        inst.adjacency(m, k) = 1;
        inst.weights(m, k) = rng.uniform(0.1, 1.0);
        total += inst.weights(m, k);
      }
    }
    if (total == 0.0) {  // guarantee one edge
      const int m = static_cast<int>(rng.uniform_index(nb));
      inst.adjacency(m, k) = 1;
      inst.weights(m, k) = rng.uniform(0.1, 1.0);
      total = inst.weights(m, k);
    }
    max_user_power = std::max(max_user_power, total);
  }
  inst.t_dl = t_dl;
  inst.p0 = p0_frac * max_user_power;
  inst.delta = 1.0 / (4.0 * nb);  // same admissible range as the library
  inst.epsilon = 0.05;
  inst.validate();
  return inst;
}

// Figure-transcription fixture: two users of degree three over six beams,
// disjoint neighborhoods {1,2,3} and {4,5,6} (1-based). Weights and the
// power floor make the middle beam of each user the one the optimizer must
// drop at T_dl = 2, reproducing the crossed-out beams 2 and 5.
inline dpmimo::MilpInstance fig4_instance() {
  dpmimo::MilpInstance inst;
  inst.weights = dpmimo::RealMat::Zero(6, 2);
  inst.adjacency = Eigen::MatrixXi::Zero(6, 2);
  const double w0[3] = {0.50, 0.05, 0.40};  // user 1 on beams 1,2,3
  const double w1[3] = {0.45, 0.05, 0.50};  // user 2 on beams 4,5,6
  for (int i = 0; i < 3; ++i) {
    inst.adjacency(i, 0) = 1;
    inst.weights(i, 0) = w0[i];
    inst.adjacency(3 + i, 1) = 1;
    inst.weights(3 + i, 1) = w1[i];
  }
  inst.t_dl = 2;
  inst.p0 = 0.6;  // needs each user's two heavy beams
  inst.delta = 1.0 / 12.0;
  inst.epsilon = 0.01;
  inst.validate();
  return inst;
}

}  // namespace testutil
