// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Monte-Carlo experiment harness. Five experiment kinds:
//
//   ul-cov      sample vs structured UL covariance estimation error
//   transform   UL->DL transformation error (from noisy and true UL fits)
//   acs-rate    multi-user DL sum rate, sparsified vs full-beam training
//   acs-error   same simulation, read through the effective-error metric
//   rate-vs-tdl sum rate across pilot dimensions
//
// Every trial derives its RNG stream from (seed, draw, realization) only,
// so results are independent of scheduling; draws run on a small worker
// pool and rows are emitted in deterministic order.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpmimo/acs.hpp"
#include "dpmimo/asf_random.hpp"
#include "dpmimo/basis.hpp"
#include "dpmimo/beams.hpp"
#include "dpmimo/channel.hpp"
#include "dpmimo/cov_estimate.hpp"
#include "dpmimo/dl_link.hpp"
#include "dpmimo/errors.hpp"
#include "dpmimo/io.hpp"
#include "dpmimo/milp.hpp"
#include "dpmimo/music.hpp"
#include "dpmimo/psd_ls.hpp"
#include "dpmimo/transform.hpp"
#include "dpmimo/version.hpp"

namespace dpmimo {

inline double metric_enf(const Mat& truth, const Mat& est) {
  if (truth.rows() != est.rows() || truth.cols() != est.cols())
    throw InvariantViolation("metric_enf: shape mismatch");
  return rel_frobenius_error(truth, est);
}

inline double snr_to_n0(double snr_db, double p) {
  return p / std::pow(10.0, snr_db / 10.0);
}

enum class ExperimentKind { kUlCov, kTransform, kAcsRate, kAcsError, kRateVsTdl };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kUlCov: return "ul-cov";
    case ExperimentKind::kTransform: return "transform";
    case ExperimentKind::kAcsRate: return "acs-rate";
    case ExperimentKind::kAcsError: return "acs-error";
    case ExperimentKind::kRateVsTdl: return "rate-vs-tdl";
  }
  return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
  if (s == "ul-cov") return ExperimentKind::kUlCov;
  if (s == "transform") return ExperimentKind::kTransform;
  if (s == "acs-rate") return ExperimentKind::kAcsRate;
  if (s == "acs-error") return ExperimentKind::kAcsError;
  if (s == "rate-vs-tdl") return ExperimentKind::kRateVsTdl;
  throw ConfigError("experiment",
                    "unknown kind '" + s +
                        "' (expected ul-cov, transform, acs-rate, acs-error "
                        "or rate-vs-tdl)");
}

inline bool is_link_kind(ExperimentKind k) {
  return k == ExperimentKind::kAcsRate || k == ExperimentKind::kAcsError ||
         k == ExperimentKind::kRateVsTdl;
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kUlCov;
  std::uint64_t seed = 1;
  int m = 16;
  double nu = 1.2;
  int n_users = 4;
  int n_draws = 20;
  int n_realizations = 10;
  double alpha = 0.5;
  double beta = 0.5;
  AsfGenMode asf_mode = AsfGenMode::kUniform;
  std::vector<int> kappa = {1, 2, 4};
  std::vector<double> snr_db;
  int r_hat = 4;
  int dict_size = 0;   // 0 -> 3M
  int music_grid = 0;  // 0 -> 16M
  int t = 64;
  int t_dl = 8;
  double p_dl = 1.0;
  double ul_power = 1.0;
  std::vector<int> t_dl_list = {4, 8, 16, 24, 32, 48, 64};
  int threads = 0;  // 0 -> hardware concurrency
  int mc_symbols = 0;
  long milp_node_limit = 1'000'000;
  double milp_time_limit_s = 60.0;
  int psd_ls_max_iters = 10000;
  double psd_ls_rel_tol = 1e-8;
  nlohmann::json raw;  // canonical config for hashing

  int dictionary_size() const { return dict_size > 0 ? dict_size : 3 * m; }

  SolveLimits milp_limits() const {
    SolveLimits l;
    l.node_limit = milp_node_limit;
    l.time_limit_s = milp_time_limit_s;
    return l;
  }

  PsdLsConfig psd_ls_config() const {
    PsdLsConfig c;
    c.max_iters = psd_ls_max_iters;
    c.rel_tol = psd_ls_rel_tol;
    return c;
  }

  void validate() const {
    if (m < 2) throw ConfigError("config.m", "must be >= 2");
    if (!(nu > 0.0)) throw ConfigError("config.nu", "must be > 0");
    if (n_users < 1) throw ConfigError("config.n_users", "must be >= 1");
    if (n_draws < 1) throw ConfigError("config.n_draws", "must be >= 1");
    if (n_realizations < 1)
      throw ConfigError("config.n_realizations", "must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw ConfigError("config.alpha", "must lie in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0))
      throw ConfigError("config.beta", "must lie in [0, 1]");
    if (kappa.empty()) throw ConfigError("config.kappa", "must be non-empty");
    for (int k : kappa)
      if (k < 1) throw ConfigError("config.kappa", "entries must be >= 1");
    if (snr_db.empty())
      throw ConfigError("config.snr_db", "must be non-empty");
    if (r_hat < 1 || r_hat >= m)
      throw ConfigError("config.r_hat", "must satisfy 1 <= r_hat < m");
    if (t < 1) throw ConfigError("config.t", "must be >= 1");
    if (t_dl < 1 || t_dl > t)
      throw ConfigError("config.t_dl", "must satisfy 1 <= t_dl <= t");
    if (!(p_dl > 0.0)) throw ConfigError("config.p_dl", "must be > 0");
    if (!(ul_power > 0.0)) throw ConfigError("config.ul_power", "must be > 0");
    if (kind == ExperimentKind::kRateVsTdl) {
      if (t_dl_list.empty())
        throw ConfigError("config.t_dl_list", "must be non-empty");
      for (int v : t_dl_list)
        if (v < 1 || v > t)
          throw ConfigError("config.t_dl_list",
                            "entries must satisfy 1 <= t_dl <= t");
    }
    if (threads < 0) throw ConfigError("config.threads", "must be >= 0");
    if (mc_symbols < 0)
      throw ConfigError("config.mc_symbols", "must be >= 0");
    if (milp_node_limit < 1)
      throw ConfigError("config.milp.node_limit", "must be >= 1");
    if (!(milp_time_limit_s > 0.0))
      throw ConfigError("config.milp.time_limit_s", "must be > 0");
    if (psd_ls_max_iters < 1)
      throw ConfigError("config.psd_ls.max_iters", "must be >= 1");
    if (!(psd_ls_rel_tol > 0.0))
      throw ConfigError("config.psd_ls.rel_tol", "must be > 0");
  }
};

namespace detail {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key, const T& dflt,
            const char* type_name) {
  if (!j.contains(key)) return dflt;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config." + key,
                      std::string("expected ") + type_name);
  }
}

}  // namespace detail

// Parses and validates a config object; unknown keys are rejected so typos
// fail loudly instead of silently running defaults.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  static const std::vector<std::string> kKnown = {
      "experiment", "seed", "m", "nu", "n_users", "n_draws",
      "n_realizations", "alpha", "beta", "asf_mode", "kappa", "snr_db",
      "r_hat", "dict_size", "music_grid", "t", "t_dl", "p_dl", "ul_power",
      "t_dl_list", "threads", "mc_symbols", "milp", "psd_ls", "paper_scale"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(kKnown.begin(), kKnown.end(), it.key()) == kKnown.end())
      throw ConfigError("config." + it.key(), "unknown field");
  }

  ExperimentConfig cfg;
  if (!j.contains("experiment"))
    throw ConfigError("config.experiment", "required field is missing");
  if (!j["experiment"].is_string())
    throw ConfigError("config.experiment", "expected a string");
  cfg.kind = parse_kind(j["experiment"].get<std::string>());

  using detail::get_field;
  cfg.seed = get_field<std::uint64_t>(j, "seed", 1, "an unsigned integer");
  cfg.m = get_field<int>(j, "m", 16, "an integer");
  cfg.nu = get_field<double>(j, "nu", 1.2, "a number");
  cfg.n_users = get_field<int>(j, "n_users", 4, "an integer");
  cfg.n_draws = get_field<int>(j, "n_draws", 20, "an integer");
  cfg.n_realizations = get_field<int>(j, "n_realizations", 10, "an integer");
  cfg.alpha = get_field<double>(j, "alpha", 0.5, "a number");
  cfg.beta = get_field<double>(j, "beta", 0.5, "a number");
  const std::string mode = get_field<std::string>(
      j, "asf_mode", is_link_kind(cfg.kind) ? "four-scatterer" : "uniform",
      "a string");
  if (mode == "uniform") cfg.asf_mode = AsfGenMode::kUniform;
  else if (mode == "four-scatterer") cfg.asf_mode = AsfGenMode::kFourScatterer;
  else
    throw ConfigError("config.asf_mode",
                      "expected 'uniform' or 'four-scatterer'");
  cfg.kappa = get_field<std::vector<int>>(j, "kappa", {1, 2, 4},
                                          "an array of integers");
  cfg.snr_db = get_field<std::vector<double>>(
      j, "snr_db",
      is_link_kind(cfg.kind) ? std::vector<double>{0, 10, 20, 30}
                             : std::vector<double>{0, 10, 20},
      "an array of numbers");
  cfg.r_hat = get_field<int>(j, "r_hat", 4, "an integer");
  cfg.dict_size = get_field<int>(j, "dict_size", 0, "an integer");
  cfg.music_grid = get_field<int>(j, "music_grid", 0, "an integer");
  cfg.t = get_field<int>(j, "t", 64, "an integer");
  cfg.t_dl = get_field<int>(j, "t_dl", 8, "an integer");
  cfg.p_dl = get_field<double>(j, "p_dl", 1.0, "a number");
  cfg.ul_power = get_field<double>(j, "ul_power", 1.0, "a number");
  cfg.t_dl_list = get_field<std::vector<int>>(
      j, "t_dl_list", {4, 8, 16, 24, 32, 48, 64}, "an array of integers");
  cfg.threads = get_field<int>(j, "threads", 0, "an integer");
  cfg.mc_symbols = get_field<int>(j, "mc_symbols", 0, "an integer");
  if (j.contains("milp")) {
    const auto& jm = j["milp"];
    if (!jm.is_object()) throw ConfigError("config.milp", "expected an object");
    for (auto it = jm.begin(); it != jm.end(); ++it)
      if (it.key() != "node_limit" && it.key() != "time_limit_s")
        throw ConfigError("config.milp." + it.key(), "unknown field");
    cfg.milp_node_limit =
        detail::get_field<long>(jm, "node_limit", cfg.milp_node_limit,
                                "an integer");
    cfg.milp_time_limit_s = detail::get_field<double>(
        jm, "time_limit_s", cfg.milp_time_limit_s, "a number");
  }
  if (j.contains("psd_ls")) {
    const auto& jp = j["psd_ls"];
    if (!jp.is_object())
      throw ConfigError("config.psd_ls", "expected an object");
    for (auto it = jp.begin(); it != jp.end(); ++it)
      if (it.key() != "max_iters" && it.key() != "rel_tol")
        throw ConfigError("config.psd_ls." + it.key(), "unknown field");
    cfg.psd_ls_max_iters = detail::get_field<int>(
        jp, "max_iters", cfg.psd_ls_max_iters, "an integer");
    cfg.psd_ls_rel_tol = detail::get_field<double>(
        jp, "rel_tol", cfg.psd_ls_rel_tol, "a number");
  }
  if (detail::get_field<bool>(j, "paper_scale", false, "a boolean")) {
    // The reference setup: M=32 with 100x50 instances for the covariance
    // experiments; M=32, K=6, LTE-sized coherence block for the link ones.
    cfg.m = 32;
    if (is_link_kind(cfg.kind)) {
      cfg.n_users = 6;
      cfg.n_draws = 50;
      cfg.n_realizations = 50;
      cfg.t = 168;
      if (!j.contains("t_dl")) cfg.t_dl = 16;
    } else {
      cfg.n_draws = 100;
      cfg.n_realizations = 50;
    }
  }
  cfg.raw = j;
  // The worker count is an execution detail, not part of the experiment
  // definition; keep it out of the stored config so the hash (and therefore
  // the output tables) are identical across thread counts.
  cfg.raw.erase("threads");
  cfg.validate();
  return cfg;
}

// ---- worker pool ----------------------------------------------------------

inline void parallel_for(int n, int threads,
                         const std::function<void(int)>& fn) {
  if (threads <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    threads = hc ? static_cast<int>(hc) : 1;
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---- structured estimation pipeline ----------------------------------------

struct StructuredFit {
  PsdLsResult fit;
  MusicResult music;
  BasisSet basis;
  bool flagged = false;  // solver cap hit or padded spike search
};

inline StructuredFit fit_structured(const CovEstimate& target,
                                    const std::vector<DensityAtom>& dict,
                                    const ArrayGeometry& geom, int r_hat,
                                    int music_grid, const PsdLsConfig& pcfg,
                                    const std::vector<Mat>* atom_cache =
                                        nullptr) {
  StructuredFit out;
  out.music = music_aoas(target.sigma, r_hat, music_grid);
  out.flagged = out.music.padded;
  out.basis = build_basis(out.music.aoas, dict, geom, atom_cache);
  try {
    out.fit = psd_ls(target, out.basis, pcfg);
  } catch (const PsdLsNonConvergence& e) {
    out.fit = e.best();
    out.flagged = true;
  }
  out.fit.fitted.flagged = out.flagged;
  return out;
}

// ---- covariance experiments ------------------------------------------------

struct CovTrialRecord {
  int draw = 0;
  int realization = 0;
  int kappa = 0;
  double snr_db = 0.0;
  std::string method;
  double enf = 0.0;
  bool flagged = false;
};

inline std::vector<CovTrialRecord> run_cov_experiment(
    const ExperimentConfig& cfg) {
  cfg.validate();
  if (is_link_kind(cfg.kind))
    throw ConfigError("config.experiment",
                      "run_cov_experiment needs ul-cov or transform");
  const bool do_transform = cfg.kind == ExperimentKind::kTransform;
  const ArrayGeometry ul = ArrayGeometry::ul(cfg.m);
  const ArrayGeometry dl = ArrayGeometry::dl(cfg.m, cfg.nu);
  const auto dict = default_dictionary(cfg.dictionary_size());
  const auto ul_atoms = dictionary_matrices(dict, ul);
  const std::vector<Mat> dl_atoms =
      do_transform ? dictionary_matrices(dict, dl) : std::vector<Mat>{};

  const Rng root(cfg.seed);
  std::vector<std::vector<CovTrialRecord>> buckets(
      static_cast<std::size_t>(cfg.n_draws));

  parallel_for(cfg.n_draws, cfg.threads, [&](int d) {
    auto& rows = buckets[static_cast<std::size_t>(d)];
    const Rng rng_d = root.child(1000000u + static_cast<std::uint64_t>(d));
    Rng asf_rng = rng_d.child(1);
    const AsfGenConfig gen{cfg.alpha, cfg.beta, cfg.asf_mode};
    const DpAsf asf = generate_random_asf(gen, asf_rng);
    const Mat sigma_ul = synth_covariance(asf, ul);
    const ChannelSampler sampler(sigma_ul);

    Mat sigma_dl;
    double from_true_enf = 0.0;
    bool from_true_flagged = false;
    if (do_transform) {
      sigma_dl = synth_covariance(asf, dl);
      CovEstimate truth;
      truth.sigma = sigma_ul;
      truth.provenance = CovProvenance::kTrue;
      const StructuredFit tf =
          fit_structured(truth, dict, ul, cfg.r_hat, cfg.music_grid,
                         cfg.psd_ls_config(), &ul_atoms);
      const CovEstimate dl_from_true =
          transform_to_dl(tf.fit.coeffs, tf.basis, cfg.nu, &dl_atoms);
      from_true_enf = metric_enf(sigma_dl, dl_from_true.sigma);
      from_true_flagged = tf.flagged;
    }

    for (std::size_t ki = 0; ki < cfg.kappa.size(); ++ki) {
      const int n = 2 * cfg.m * cfg.kappa[ki];
      for (int r = 0; r < cfg.n_realizations; ++r) {
        // Channels and unit noise are drawn once per (draw, kappa,
        // realization); SNR points reuse them (common random numbers).
        Rng crn = rng_d.child(2000000u +
                              static_cast<std::uint64_t>(ki) * 100000u +
                              static_cast<std::uint64_t>(r));
        const Mat h = sampler.draw_many(n, crn);
        Mat w(2 * cfg.m, n);
        for (Eigen::Index c = 0; c < w.cols(); ++c)
          for (Eigen::Index rr = 0; rr < w.rows(); ++rr)
            w(rr, c) = crn.complex_normal();

        for (double snr : cfg.snr_db) {
          const double n0 = snr_to_n0(snr, cfg.ul_power);
          const Mat y = std::sqrt(cfg.ul_power) * h + std::sqrt(n0) * w;
          const CovEstimate sample = sample_covariance(y, cfg.ul_power, n0);
          const StructuredFit sf =
              fit_structured(sample, dict, ul, cfg.r_hat, cfg.music_grid,
                             cfg.psd_ls_config(), &ul_atoms);
          if (!do_transform) {
            rows.push_back({d, r, cfg.kappa[ki], snr, "sample",
                            metric_enf(sigma_ul, sample.sigma), false});
            rows.push_back({d, r, cfg.kappa[ki], snr, "structured",
                            metric_enf(sigma_ul, sf.fit.fitted.sigma),
                            sf.flagged});
          } else {
            const CovEstimate dl_est =
                transform_to_dl(sf.fit.coeffs, sf.basis, cfg.nu, &dl_atoms);
            rows.push_back({d, r, cfg.kappa[ki], snr, "ul-structured",
                            metric_enf(sigma_ul, sf.fit.fitted.sigma),
                            sf.flagged});
            rows.push_back({d, r, cfg.kappa[ki], snr, "from-estimate",
                            metric_enf(sigma_dl, dl_est.sigma), sf.flagged});
            rows.push_back({d, r, cfg.kappa[ki], snr, "from-true",
                            from_true_enf, from_true_flagged});
          }
        }
      }
    }
  });

  std::vector<CovTrialRecord> records;
  for (auto& b : buckets)
    records.insert(records.end(), b.begin(), b.end());
  return records;
}

// ---- link experiments -------------------------------------------------------

struct LinkTrialRecord {
  int draw = 0;
  int realization = 0;
  std::uint64_t trial_seed = 0;
  int t_dl = 0;
  double snr_db = 0.0;
  std::string method;
  double sum_rate = 0.0;
  double eff_error = 0.0;
  int m_prime = 0;
  int k_served = 0;
  bool flagged = false;
  double mc_gap = 0.0;  // symbol-level validation gap (if enabled)
};

namespace detail {

struct MethodPlan {
  std::string name;
  Mat b;                    // M' x 2M precoder (empty if nothing selected)
  std::vector<int> served;  // user indices served by this method
  int t_dl_eff = 0;
  Mat psi;
  bool flagged = false;
  int milp_m_prime = 0;
  // gains[snr][user in served order]
  std::vector<std::vector<Mat>> gains;
};

}  // namespace detail

inline std::vector<LinkTrialRecord> run_link_experiment(
    const ExperimentConfig& cfg) {
  cfg.validate();
  if (!is_link_kind(cfg.kind))
    throw ConfigError("config.experiment",
                      "run_link_experiment needs acs-rate, acs-error or "
                      "rate-vs-tdl");
  const ArrayGeometry dl = ArrayGeometry::dl(cfg.m, cfg.nu);
  const std::vector<int> t_dls = cfg.kind == ExperimentKind::kRateVsTdl
                                     ? cfg.t_dl_list
                                     : std::vector<int>{cfg.t_dl};

  const Rng root(cfg.seed);
  std::vector<std::vector<LinkTrialRecord>> buckets(
      static_cast<std::size_t>(cfg.n_draws));

  parallel_for(cfg.n_draws, cfg.threads, [&](int d) {
    auto& rows = buckets[static_cast<std::size_t>(d)];
    const Rng rng_d = root.child(3000000u + static_cast<std::uint64_t>(d));
    const AsfGenConfig gen{cfg.alpha, cfg.beta, cfg.asf_mode};

    std::vector<Mat> sigmas;
    std::vector<ChannelSampler> samplers;
    std::vector<BeamVariances> variances;
    sigmas.reserve(static_cast<std::size_t>(cfg.n_users));
    for (int k = 0; k < cfg.n_users; ++k) {
      Rng ar = rng_d.child(10u + static_cast<std::uint64_t>(k));
      const DpAsf asf = generate_random_asf(gen, ar);
      sigmas.push_back(synth_covariance(asf, dl));
      samplers.emplace_back(sigmas.back());
      variances.push_back(beam_variances(sigmas.back()));
    }
    const BeamGraph graph = build_graph(variances, default_epsilon(variances));
    const double p0 = default_p0(variances);
    const double delta = default_delta(cfg.m);

    for (int t_dl : t_dls) {
      // Method plans: precoder, served set, pilots and MMSE gains.
      std::vector<detail::MethodPlan> plans;
      {
        detail::MethodPlan acs_plan;
        acs_plan.name = "acs";
        const AcsSolution acs =
            sparsify(graph, t_dl, p0, delta, cfg.milp_limits());
        acs_plan.flagged = acs.milp.status != MilpStatus::kOptimal;
        acs_plan.served = acs.users;
        acs_plan.milp_m_prime = acs.m_prime();
        if (acs.m_prime() > 0) acs_plan.b = build_precoder(acs, cfg.m);
        plans.push_back(std::move(acs_plan));

        detail::MethodPlan nacs_plan;
        nacs_plan.name = "n-acs";
        nacs_plan.b = full_beam_precoder(cfg.m);
        nacs_plan.milp_m_prime = 2 * cfg.m;
        nacs_plan.served.resize(static_cast<std::size_t>(cfg.n_users));
        for (int k = 0; k < cfg.n_users; ++k)
          nacs_plan.served[static_cast<std::size_t>(k)] = k;
        plans.push_back(std::move(nacs_plan));
      }
      for (std::size_t pi = 0; pi < plans.size(); ++pi) {
        auto& plan = plans[pi];
        if (plan.b.rows() == 0 || plan.served.empty()) continue;
        plan.t_dl_eff = std::min<int>(t_dl, static_cast<int>(plan.b.rows()));
        Rng prng = rng_d.child(5000u + 16u * static_cast<std::uint64_t>(t_dl) +
                               static_cast<std::uint64_t>(pi));
        plan.psi = gen_pilot_matrix(plan.t_dl_eff,
                                    static_cast<int>(plan.b.rows()), cfg.p_dl,
                                    prng);
        plan.gains.resize(cfg.snr_db.size());
        for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
          const double n0 = snr_to_n0(cfg.snr_db[si], cfg.p_dl);
          for (int k : plan.served) {
            MmseEstimator est(sigmas[static_cast<std::size_t>(k)], plan.b,
                              plan.psi, n0);
            plan.flagged = plan.flagged || est.used_pseudo_inverse();
            plan.gains[si].push_back(est.gain());
          }
        }
      }

      for (int r = 0; r < cfg.n_realizations; ++r) {
        // Channels are keyed by realization only: every t_dl and SNR point
        // sees the same fading draw (common random numbers along both
        // sweep axes). Training noise gets its own (t_dl, r) stream.
        Rng crn_h = rng_d.child(4000000u + static_cast<std::uint64_t>(r));
        const std::uint64_t trial_seed = crn_h.seed();
        Mat h_all(2 * cfg.m, cfg.n_users);
        for (int k = 0; k < cfg.n_users; ++k)
          h_all.col(k) = samplers[static_cast<std::size_t>(k)].draw(crn_h);
        Rng crn = rng_d.child(4500000u +
                              static_cast<std::uint64_t>(t_dl) * 10000u +
                              static_cast<std::uint64_t>(r));
        // Per-method unit noise, drawn in fixed plan order so that SNR
        // points share it.
        std::vector<Mat> unit_noise(plans.size());
        for (std::size_t pi = 0; pi < plans.size(); ++pi) {
          const auto& plan = plans[pi];
          if (plan.t_dl_eff == 0) continue;
          Mat e(plan.t_dl_eff, static_cast<Eigen::Index>(plan.served.size()));
          for (Eigen::Index c = 0; c < e.cols(); ++c)
            for (Eigen::Index rr = 0; rr < e.rows(); ++rr)
              e(rr, c) = crn.complex_normal();
          unit_noise[pi] = std::move(e);
        }

        for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
          const double snr = cfg.snr_db[si];
          const double n0 = snr_to_n0(snr, cfg.p_dl);
          for (std::size_t pi = 0; pi < plans.size(); ++pi) {
            const auto& plan = plans[pi];
            LinkTrialRecord rec;
            rec.draw = d;
            rec.realization = r;
            rec.trial_seed = trial_seed;
            rec.t_dl = t_dl;
            rec.snr_db = snr;
            rec.method = plan.name;
            rec.m_prime = plan.milp_m_prime;
            rec.flagged = plan.flagged;
            if (plan.b.rows() == 0 || plan.served.empty()) {
              rec.k_served = 0;
              rec.flagged = true;
              rows.push_back(rec);
              continue;
            }
            const auto kp = static_cast<Eigen::Index>(plan.served.size());
            Mat h_served(2 * cfg.m, kp);
            for (Eigen::Index c = 0; c < kp; ++c)
              h_served.col(c) = h_all.col(plan.served[
                  static_cast<std::size_t>(c)]);
            const Mat y = plan.psi * (plan.b * h_served) +
                          std::sqrt(n0) * unit_noise[pi];
            Mat h_hat(2 * cfg.m, kp);
            for (Eigen::Index c = 0; c < kp; ++c)
              h_hat.col(c) =
                  plan.gains[si][static_cast<std::size_t>(c)] * y.col(c);
            const Mat h_eff_hat = plan.b * h_hat;
            rec.eff_error = effective_error(h_served, h_hat, plan.b);

            // ZF with drop-weakest retry on ill-conditioned estimates.
            std::vector<Eigen::Index> active(static_cast<std::size_t>(kp));
            for (Eigen::Index c = 0; c < kp; ++c)
              active[static_cast<std::size_t>(c)] = c;
            ZfResult zf;
            bool have_zf = false;
            while (!active.empty()) {
              Mat sub(h_eff_hat.rows(),
                      static_cast<Eigen::Index>(active.size()));
              for (std::size_t c = 0; c < active.size(); ++c)
                sub.col(static_cast<Eigen::Index>(c)) =
                    h_eff_hat.col(active[c]);
              try {
                zf = zf_beamformer(sub);
                have_zf = true;
                break;
              } catch (const IllConditionedError&) {
                rec.flagged = true;
                std::size_t weakest = 0;
                double wn = std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < active.size(); ++c) {
                  const double nn = h_eff_hat.col(active[c]).norm();
                  if (nn < wn) {
                    wn = nn;
                    weakest = c;
                  }
                }
                active.erase(active.begin() +
                             static_cast<std::ptrdiff_t>(weakest));
              }
            }
            rec.k_served = static_cast<int>(active.size());
            if (have_zf) {
              Mat h_true_act(2 * cfg.m,
                             static_cast<Eigen::Index>(active.size()));
              for (std::size_t c = 0; c < active.size(); ++c)
                h_true_act.col(static_cast<Eigen::Index>(c)) =
                    h_served.col(active[c]);
              LinkConfig lc;
              lc.t = cfg.t;
              lc.t_dl = t_dl;  // configured pilot budget sets the pre-log
              lc.p_dl = cfg.p_dl;
              lc.n0 = n0;
              const TrialResult tr =
                  evaluate_trial(h_true_act, plan.b, zf.v, lc);
              rec.sum_rate = tr.sum_rate;
              if (cfg.mc_symbols > 0) {
                Rng mc = crn.child(9000u + si * 4u + pi);
                rec.mc_gap =
                    validate_inp_mc(tr.b_coeffs, n0, cfg.mc_symbols, mc);
              }
            } else {
              rec.sum_rate = 0.0;
              rec.flagged = true;
            }
            rows.push_back(rec);
          }
        }
      }
    }
  });

  std::vector<LinkTrialRecord> records;
  for (auto& b : buckets)
    records.insert(records.end(), b.begin(), b.end());
  return records;
}

// ---- tables -----------------------------------------------------------------

namespace detail {

inline void append_provenance_columns(std::vector<std::string>& cols) {
  cols.push_back("seed");
  cols.push_back("config_hash");
  cols.push_back("version");
}

}  // namespace detail

inline ResultTable aggregate_cov_table(const ExperimentConfig& cfg,
                                       const std::vector<CovTrialRecord>& rec) {
  ResultTable t;
  t.columns = {"experiment", "method",      "m",          "nu",
               "alpha",      "beta",        "kappa",      "snr_db",
               "n_instances", "n_flagged",  "mean_enf"};
  detail::append_provenance_columns(t.columns);
  const std::string hash = config_hash(cfg.raw);

  struct Key {
    std::string method;
    int kappa;
    double snr;
    bool operator<(const Key& o) const {
      if (method != o.method) return method < o.method;
      if (kappa != o.kappa) return kappa < o.kappa;
      return snr < o.snr;
    }
  };
  std::map<Key, std::pair<std::vector<double>, int>> groups;
  for (const auto& r : rec) {
    auto& g = groups[{r.method, r.kappa, r.snr_db}];
    g.first.push_back(r.enf);
    g.second += r.flagged ? 1 : 0;
  }
  for (const auto& [key, g] : groups) {
    double mean = 0.0;
    for (double v : g.first) mean += v;
    mean /= static_cast<double>(g.first.size());
    t.add_row({to_string(cfg.kind), key.method, std::to_string(cfg.m),
               fmt_double(cfg.nu), fmt_double(cfg.alpha),
               fmt_double(cfg.beta), std::to_string(key.kappa),
               fmt_double(key.snr), std::to_string(g.first.size()),
               std::to_string(g.second), fmt_double(mean),
               std::to_string(cfg.seed), hash, kVersion});
  }
  return t;
}

inline ResultTable aggregate_link_table(
    const ExperimentConfig& cfg, const std::vector<LinkTrialRecord>& rec) {
  ResultTable t;
  t.columns = {"experiment",    "method",        "m",
               "k_users",       "t",             "t_dl",
               "snr_db",        "n_instances",   "n_flagged",
               "mean_sum_rate", "mean_eff_error", "mean_m_prime",
               "mean_k_served"};
  detail::append_provenance_columns(t.columns);
  const std::string hash = config_hash(cfg.raw);

  struct Key {
    std::string method;
    int t_dl;
    double snr;
    bool operator<(const Key& o) const {
      if (method != o.method) return method < o.method;
      if (t_dl != o.t_dl) return t_dl < o.t_dl;
      return snr < o.snr;
    }
  };
  struct Acc {
    double rate = 0, err = 0, mprime = 0, kserved = 0;
    int n = 0, flagged = 0;
  };
  std::map<Key, Acc> groups;
  for (const auto& r : rec) {
    auto& g = groups[{r.method, r.t_dl, r.snr_db}];
    g.rate += r.sum_rate;
    g.err += r.eff_error;
    g.mprime += r.m_prime;
    g.kserved += r.k_served;
    g.n += 1;
    g.flagged += r.flagged ? 1 : 0;
  }
  for (const auto& [key, g] : groups) {
    const double n = static_cast<double>(g.n);
    t.add_row({to_string(cfg.kind), key.method, std::to_string(cfg.m),
               std::to_string(cfg.n_users), std::to_string(cfg.t),
               std::to_string(key.t_dl), fmt_double(key.snr),
               std::to_string(g.n), std::to_string(g.flagged),
               fmt_double(g.rate / n), fmt_double(g.err / n),
               fmt_double(g.mprime / n), fmt_double(g.kserved / n),
               std::to_string(cfg.seed), hash, kVersion});
  }
  return t;
}

inline ResultTable trial_link_table(const ExperimentConfig& cfg,
                                    const std::vector<LinkTrialRecord>& rec) {
  ResultTable t;
  t.columns = {"seed",     "M",         "K",       "T_dl",    "SNR_dB",
               "method",   "sum_rate",  "eff_error", "M_prime", "K_served",
               "flagged",  "config_hash", "version"};
  const std::string hash = config_hash(cfg.raw);
  std::vector<LinkTrialRecord> sorted = rec;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LinkTrialRecord& a, const LinkTrialRecord& b) {
                     if (a.draw != b.draw) return a.draw < b.draw;
                     if (a.realization != b.realization)
                       return a.realization < b.realization;
                     if (a.t_dl != b.t_dl) return a.t_dl < b.t_dl;
                     if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
                     return a.method < b.method;
                   });
  for (const auto& r : sorted)
    t.add_row({std::to_string(r.trial_seed), std::to_string(cfg.m),
               std::to_string(cfg.n_users), std::to_string(r.t_dl),
               fmt_double(r.snr_db), r.method, fmt_double(r.sum_rate),
               fmt_double(r.eff_error), std::to_string(r.m_prime),
               std::to_string(r.k_served), r.flagged ? "1" : "0", hash,
               kVersion});
  return t;
}

// Aggregated experiment entry point (the `sweep` subcommand).
inline ResultTable run_experiment(const ExperimentConfig& cfg) {
  if (is_link_kind(cfg.kind))
    return aggregate_link_table(cfg, run_link_experiment(cfg));
  return aggregate_cov_table(cfg, run_cov_experiment(cfg));
}

// Per-trial experiment entry point (the `simulate` subcommand).
inline ResultTable run_experiment_trials(const ExperimentConfig& cfg) {
  if (!is_link_kind(cfg.kind))
    throw ConfigError("config.experiment",
                      "per-trial output requires a link experiment "
                      "(acs-rate, acs-error or rate-vs-tdl)");
  return trial_link_table(cfg, run_link_experiment(cfg));
}

}  // namespace dpmimo
