// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Dual-polarized angular scattering function (ASF): a 2x2 PSD matrix-valued
// measure on [-1, 1] composed of discrete spikes and continuous density
// atoms. The diagonal entries are the H/V angular power densities, the
// off-diagonal the cross-polarization coupling.

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpmimo/density.hpp"
#include "dpmimo/errors.hpp"
#include "dpmimo/linalg.hpp"

namespace dpmimo {

struct DpSpike {
  double xi = 0.0;
  Mat2 coeff = Mat2::Zero();
};

struct DpAtom {
  DensityAtom density;
  Mat2 coeff = Mat2::Zero();
};

namespace detail {

inline void check_coeff_psd(const Mat2& c, const std::string& what,
                            double tol) {
  const double scale = std::max(1.0, c.norm());
  if ((c - c.adjoint()).norm() > tol * scale)
    throw InvariantViolation(what + ": coefficient block is not Hermitian");
  double lo, hi;
  eig2x2_hermitian(hermitize2(c), lo, hi);
  if (lo < -tol * scale)
    throw InvariantViolation(what + ": coefficient block is not PSD (min eig " +
                             std::to_string(lo) + ")");
}

inline nlohmann::json complex_to_json(const cx& z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

inline cx complex_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(path, "expected complex value as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline nlohmann::json mat2_to_json(const Mat2& c) {
  return nlohmann::json::array({complex_to_json(c(0, 0)),
                                complex_to_json(c(0, 1)),
                                complex_to_json(c(1, 0)),
                                complex_to_json(c(1, 1))});
}

inline Mat2 mat2_from_json(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4)
    throw ConfigError(path, "expected 4 complex entries (row major)");
  Mat2 c;
  c(0, 0) = complex_from_json(j[0], path + "[0]");
  c(0, 1) = complex_from_json(j[1], path + "[1]");
  c(1, 0) = complex_from_json(j[2], path + "[2]");
  c(1, 1) = complex_from_json(j[3], path + "[3]");
  return c;
}

}  // namespace detail

struct DpAsf {
  std::vector<DpSpike> spikes;
  std::vector<DpAtom> atoms;

  void validate(double tol = 1e-9) const {
    for (std::size_t i = 0; i < spikes.size(); ++i) {
      if (!(spikes[i].xi >= -1.0 && spikes[i].xi <= 1.0))
        throw InvariantViolation("asf spike " + std::to_string(i) +
                                 ": xi outside [-1, 1]");
      detail::check_coeff_psd(spikes[i].coeff,
                              "asf spike " + std::to_string(i), tol);
    }
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      atoms[i].density.validate();
      detail::check_coeff_psd(atoms[i].coeff, "asf atom " + std::to_string(i),
                              tol);
    }
  }

  // Continuous part Gamma_c(xi); spikes are excluded.
  Mat2 continuous_density(double xi) const {
    Mat2 g = Mat2::Zero();
    for (const auto& at : atoms) g += at.coeff * at.density(xi);
    return g;
  }

  double h_power() const { return polarization_power(0); }
  double v_power() const { return polarization_power(1); }
  double total_power() const { return h_power() + v_power(); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["spikes"] = nlohmann::json::array();
    for (const auto& s : spikes)
      j["spikes"].push_back({{"xi", s.xi}, {"C", detail::mat2_to_json(s.coeff)}});
    j["atoms"] = nlohmann::json::array();
    for (const auto& at : atoms) {
      nlohmann::json ja;
      if (at.density.kind == DensityAtom::Kind::kRectangular) {
        ja["kind"] = "rectangular";
        ja["a"] = at.density.a;
        ja["b"] = at.density.b;
      } else {
        ja["kind"] = "gaussian";
        ja["center"] = at.density.center;
        ja["width"] = at.density.width;
      }
      ja["normalized"] = at.density.normalized;
      ja["C"] = detail::mat2_to_json(at.coeff);
      j["atoms"].push_back(ja);
    }
    return j;
  }

  static DpAsf from_json(const nlohmann::json& j) {
    DpAsf asf;
    if (!j.is_object()) throw ConfigError("asf", "expected a JSON object");
    if (j.contains("spikes")) {
      if (!j["spikes"].is_array())
        throw ConfigError("asf.spikes", "expected an array");
      for (std::size_t i = 0; i < j["spikes"].size(); ++i) {
        const auto& js = j["spikes"][i];
        const std::string path = "asf.spikes[" + std::to_string(i) + "]";
        if (!js.contains("xi") || !js["xi"].is_number())
          throw ConfigError(path + ".xi", "missing or not a number");
        if (!js.contains("C"))
          throw ConfigError(path + ".C", "missing coefficient block");
        asf.spikes.push_back(
            {js["xi"].get<double>(),
             detail::mat2_from_json(js["C"], path + ".C")});
      }
    }
    if (j.contains("atoms")) {
      if (!j["atoms"].is_array())
        throw ConfigError("asf.atoms", "expected an array");
      for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
        const auto& ja = j["atoms"][i];
        const std::string path = "asf.atoms[" + std::to_string(i) + "]";
        if (!ja.contains("kind") || !ja["kind"].is_string())
          throw ConfigError(path + ".kind", "missing or not a string");
        const std::string kind = ja["kind"].get<std::string>();
        const bool normalized =
            ja.contains("normalized") ? ja["normalized"].get<bool>() : true;
        DensityAtom d;
        if (kind == "rectangular") {
          if (!ja.contains("a") || !ja.contains("b"))
            throw ConfigError(path, "rectangular atom needs fields a and b");
          d = DensityAtom::rectangular(ja["a"].get<double>(),
                                       ja["b"].get<double>(), normalized);
        } else if (kind == "gaussian") {
          if (!ja.contains("center") || !ja.contains("width"))
            throw ConfigError(path,
                              "gaussian atom needs fields center and width");
          d = DensityAtom::gaussian(ja["center"].get<double>(),
                                    ja["width"].get<double>(), normalized);
        } else {
          throw ConfigError(path + ".kind",
                            "unknown kind '" + kind +
                                "' (expected rectangular or gaussian)");
        }
        if (!ja.contains("C"))
          throw ConfigError(path + ".C", "missing coefficient block");
        asf.atoms.push_back({d, detail::mat2_from_json(ja["C"], path + ".C")});
      }
    }
    asf.validate();
    return asf;
  }

 private:
  double polarization_power(int p) const {
    double acc = 0.0;
    for (const auto& s : spikes) acc += s.coeff(p, p).real();
    for (const auto& at : atoms)
      acc += at.coeff(p, p).real() * at.density.mass();
    return acc;
  }
};

}  // namespace dpmimo
