// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Structured covariance basis: rank-one spike blocks a(xi) a(xi)^H followed
// by Toeplitz density-atom blocks. The same (angles, dictionary) pair can
// be instantiated at any carrier ratio nu, which is what makes the UL->DL
// transform a basis swap.

#pragma once

#include <vector>

#include "dpmimo/density.hpp"
#include "dpmimo/errors.hpp"
#include "dpmimo/geometry.hpp"
#include "dpmimo/linalg.hpp"

namespace dpmimo {

struct BasisSet {
  ArrayGeometry geom;
  std::vector<double> spike_aoas;       // r-hat estimated angles
  std::vector<DensityAtom> dictionary;  // fixed density dictionary
  std::vector<Mat> matrices;            // spikes first, then atoms

  int n_spikes() const { return static_cast<int>(spike_aoas.size()); }
  int size() const { return static_cast<int>(matrices.size()); }
};

// Equal-width contiguous rectangles covering [-1, 1], unit mass each.
inline std::vector<DensityAtom> default_dictionary(int n) {
  if (n < 1) throw ConfigError("dictionary.n", "must be >= 1");
  std::vector<DensityAtom> dict;
  dict.reserve(n);
  const double w = 2.0 / n;
  for (int i = 0; i < n; ++i) {
    const double lo = -1.0 + i * w;
    const double hi = (i + 1 == n) ? 1.0 : -1.0 + (i + 1) * w;
    dict.push_back(DensityAtom::rectangular(lo, hi, true));
  }
  return dict;
}

namespace detail {

// The dictionary must cover [-1, 1]: rectangles by support union, gaussians
// by center spacing relative to their width.
inline void check_dictionary_coverage(const std::vector<DensityAtom>& dict) {
  if (dict.empty())
    throw ConfigError("dictionary", "must contain at least one atom");
  std::vector<std::pair<double, double>> spans;
  spans.reserve(dict.size());
  for (const auto& d : dict) {
    if (d.kind == DensityAtom::Kind::kRectangular)
      spans.push_back({d.a, d.b});
    else
      spans.push_back({d.center - 2.0 * d.width, d.center + 2.0 * d.width});
  }
  std::sort(spans.begin(), spans.end());
  double reach = -1.0;
  for (const auto& s : spans) {
    if (s.first > reach + 1e-9)
      throw ConfigError("dictionary",
                        "atoms leave a coverage gap near xi=" +
                            std::to_string(reach));
    reach = std::max(reach, s.second);
  }
  if (reach < 1.0 - 1e-9)
    throw ConfigError("dictionary", "atoms do not reach xi=1");
}

}  // namespace detail

// Toeplitz blocks for a dictionary at the given geometry; reusable across
// fits because the dictionary is fixed while spike angles change.
inline std::vector<Mat> dictionary_matrices(
    const std::vector<DensityAtom>& dict, const ArrayGeometry& g) {
  g.validate();
  std::vector<Mat> out;
  out.reserve(dict.size());
  for (const auto& d : dict) out.push_back(atom_toeplitz(d, g.m, g.nu));
  return out;
}

inline BasisSet build_basis(const std::vector<double>& aoas,
                            const std::vector<DensityAtom>& dict,
                            const ArrayGeometry& g,
                            const std::vector<Mat>* cached_atoms = nullptr) {
  g.validate();
  detail::check_dictionary_coverage(dict);
  for (double xi : aoas)
    if (!(xi >= -1.0 && xi <= 1.0))
      throw DomainError("build_basis: spike angle outside [-1, 1]");
  if (cached_atoms && cached_atoms->size() != dict.size())
    throw InvariantViolation("build_basis: cache size != dictionary size");

  BasisSet basis;
  basis.geom = g;
  basis.spike_aoas = aoas;
  basis.dictionary = dict;
  basis.matrices.reserve(aoas.size() + dict.size());
  for (double xi : aoas) basis.matrices.push_back(steering_outer(xi, g));
  if (cached_atoms) {
    basis.matrices.insert(basis.matrices.end(), cached_atoms->begin(),
                          cached_atoms->end());
  } else {
    for (const auto& d : dict)
      basis.matrices.push_back(atom_toeplitz(d, g.m, g.nu));
  }
  return basis;
}

}  // namespace dpmimo
