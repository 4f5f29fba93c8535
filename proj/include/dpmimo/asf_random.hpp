// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Random ASF generator used by the Monte-Carlo experiments. Draws two
// discrete paths shared by both polarizations plus two rectangular
// scatterers per polarization; the V-polarization supports are the H
// supports shifted by +0.1 (then clipped and renormalized), which models
// correlated but not identical H/V angular spreads.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "dpmimo/asf.hpp"
#include "dpmimo/errors.hpp"
#include "dpmimo/rng.hpp"

namespace dpmimo {

enum class AsfGenMode { kUniform, kFourScatterer };

// The four fixed scatterer supports of the clustered mode.
inline const std::array<std::pair<double, double>, 4>& scatterer_intervals() {
  static const std::array<std::pair<double, double>, 4> kIntervals = {
      std::pair<double, double>{-0.80, -0.60},
      std::pair<double, double>{-0.45, -0.25},
      std::pair<double, double>{0.10, 0.30},
      std::pair<double, double>{0.50, 0.70}};
  return kIntervals;
}

struct AsfGenConfig {
  double alpha = 0.5;  // continuous power fraction per polarization
  double beta = 0.5;   // H/V coupling magnitude
  AsfGenMode mode = AsfGenMode::kUniform;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw ConfigError("asf_gen.alpha", "must lie in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0))
      throw ConfigError("asf_gen.beta", "must lie in [0, 1]");
  }
};

namespace detail {

using Interval = std::pair<double, double>;

inline double clipped_length(const Interval& iv) {
  return std::max(0.0, std::min(1.0, iv.second) - std::max(-1.0, iv.first));
}

inline Interval clip_interval(const Interval& iv) {
  return {std::max(-1.0, iv.first), std::min(1.0, iv.second)};
}

}  // namespace detail

// Both polarizations carry unit power: alpha in the continuous part and
// (1 - alpha)/2 in each of the two spikes.
inline DpAsf generate_random_asf(const AsfGenConfig& cfg, Rng& rng) {
  cfg.validate();
  using detail::Interval;

  std::vector<Interval> h_supports;
  if (cfg.mode == AsfGenMode::kUniform) {
    for (int i = 0; i < 2; ++i) {
      const double len = rng.uniform(0.1, 0.4);
      const double c = rng.uniform(-1.0 + 0.5 * len, 1.0 - 0.5 * len);
      h_supports.push_back({c - 0.5 * len, c + 0.5 * len});
    }
  } else {
    const auto& fixed = scatterer_intervals();
    // Unordered distinct pair, uniform over the 6 possibilities.
    const int pair_idx = static_cast<int>(rng.uniform_index(6));
    static const int kPairs[6][2] = {{0, 1}, {0, 2}, {0, 3},
                                     {1, 2}, {1, 3}, {2, 3}};
    h_supports.push_back(fixed[kPairs[pair_idx][0]]);
    h_supports.push_back(fixed[kPairs[pair_idx][1]]);
  }

  const double xi1 = rng.uniform(-1.0, 1.0);
  const double xi2 = rng.uniform(-1.0, 1.0);

  std::vector<Interval> v_supports;
  double v_len = 0.0;
  for (const auto& iv : h_supports) {
    Interval shifted{iv.first + 0.1, iv.second + 0.1};
    if (detail::clipped_length(shifted) > 0.0) {
      v_supports.push_back(detail::clip_interval(shifted));
      v_len += detail::clipped_length(shifted);
    }
  }
  if (v_len <= 1e-12) {
    // Degenerate clip (both supports pushed past +1); fall back to the H
    // supports so the V power budget stays representable.
    v_supports = h_supports;
    v_len = 0.0;
    for (const auto& iv : h_supports) v_len += iv.second - iv.first;
  }

  double h_len = 0.0;
  for (const auto& iv : h_supports) h_len += iv.second - iv.first;

  DpAsf asf;
  const double spike_w = 0.5 * (1.0 - cfg.alpha);
  if (spike_w > 0.0) {
    Mat2 c;
    c << spike_w, cfg.beta * spike_w, cfg.beta * spike_w, spike_w;
    asf.spikes.push_back({xi1, c});
    asf.spikes.push_back({xi2, c});
  }

  if (cfg.alpha > 0.0) {
    const double h_height = cfg.alpha / h_len;
    const double v_height = cfg.alpha / v_len;

    // Partition [-1, 1] by all support endpoints and emit one constant
    // block per cell where either polarization is active. Overlapping
    // supports stack (the midpoint membership count).
    std::vector<double> cuts;
    for (const auto& iv : h_supports) {
      cuts.push_back(iv.first);
      cuts.push_back(iv.second);
    }
    for (const auto& iv : v_supports) {
      cuts.push_back(iv.first);
      cuts.push_back(iv.second);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = cuts[i], hi = cuts[i + 1];
      if (hi - lo <= 1e-15) continue;
      const double mid = 0.5 * (lo + hi);
      int nh = 0, nv = 0;
      for (const auto& iv : h_supports)
        if (mid >= iv.first && mid <= iv.second) ++nh;
      for (const auto& iv : v_supports)
        if (mid >= iv.first && mid <= iv.second) ++nv;
      if (nh == 0 && nv == 0) continue;
      const double gh = nh * h_height;
      const double gv = nv * v_height;
      Mat2 c;
      const double rho = cfg.beta * std::sqrt(gh * gv);
      c << gh, rho, rho, gv;
      asf.atoms.push_back({DensityAtom::rectangular(lo, hi, false), c});
    }
  }

  asf.validate();
  return asf;
}

}  // namespace dpmimo
