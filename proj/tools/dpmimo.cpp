// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Command-line front end. Subcommands chain into a pipeline:
//
//   gen-asf    -> angular scattering function (JSON)
//   synth-cov  -> covariance from an ASF at a given array size / carrier
//   estimate   -> structured fit of a (possibly sampled) covariance
//   transform  -> carry a fit to the downlink carrier
//   graph      -> user/beam graph + selection instance from covariances
//   milp-solve -> solve a selection instance
//   simulate   -> per-trial link simulation table
//   sweep      -> aggregated Monte-Carlo experiment table
//
// Exit codes: 0 success, 1 runtime failure, 2 bad configuration/usage,
// 3 a solver stopped on its node/time/iteration budget.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dpmimo/acs.hpp"
#include "dpmimo/asf.hpp"
#include "dpmimo/asf_random.hpp"
#include "dpmimo/experiments.hpp"
#include "dpmimo/io.hpp"
#include "dpmimo/milp.hpp"
#include "dpmimo/version.hpp"

namespace {

using dpmimo::ConfigError;
using dpmimo::Mat;
using dpmimo::Mat2;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---- output plumbing --------------------------------------------------------

void emit_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("out", "cannot open '" + path + "' for writing");
  os << text;
}

void emit_json(const std::string& path, const ojson& j) {
  emit_text(path, j.dump(2) + "\n");
}

void emit_table(const std::string& path, const dpmimo::ResultTable& t,
                const std::string& format) {
  std::ostringstream ss;
  if (format == "csv") dpmimo::write_csv(ss, t);
  else if (format == "json") dpmimo::write_jsonl(ss, t);
  else throw ConfigError("format", "expected 'csv' or 'json'");
  emit_text(path, ss.str());
}

json load_json_file(const std::string& path, const std::string& field) {
  std::ifstream is(path);
  if (!is) throw ConfigError(field, "cannot open '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError(field, "invalid JSON in '" + path + "': " + e.what());
  }
  return j;
}

// ---- complex-matrix (de)serialization ----------------------------------------

ojson mat_to_json(const Mat& a) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      row.push_back({a(r, c).real(), a(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw ConfigError(field, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(field, "rows must be non-empty arrays");
  Mat a(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError(field, "rows must all have the same length");
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& cell = j[r][c];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
          !cell[1].is_number())
        throw ConfigError(field, "entries must be [re, im] pairs");
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          dpmimo::cx(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return a;
}

ojson cov_to_json(const Mat& sigma, double nu, dpmimo::CovProvenance prov,
                  bool flagged) {
  ojson j;
  j["kind"] = "covariance";
  j["m"] = static_cast<int>(sigma.rows()) / 2;
  j["nu"] = nu;
  j["provenance"] = dpmimo::to_string(prov);
  j["flagged"] = flagged;
  j["sigma"] = mat_to_json(sigma);
  return j;
}

struct CovFile {
  Mat sigma;
  int m = 0;
  double nu = 1.0;
};

CovFile load_cov_file(const std::string& path) {
  const json j = load_json_file(path, "cov");
  if (!j.is_object() || j.value("kind", "") != "covariance")
    throw ConfigError("cov", "'" + path + "' is not a covariance file");
  CovFile f;
  f.sigma = mat_from_json(j.at("sigma"), "cov.sigma");
  if (f.sigma.rows() != f.sigma.cols() || f.sigma.rows() % 2 != 0)
    throw ConfigError("cov.sigma", "must be a square 2M x 2M matrix");
  f.m = static_cast<int>(f.sigma.rows()) / 2;
  f.nu = j.value("nu", 1.0);
  if (j.contains("m") && j["m"].get<int>() != f.m)
    throw ConfigError("cov.m", "does not match the matrix dimension");
  return f;
}

// ---- subcommand implementations ----------------------------------------------

int run_gen_asf(std::uint64_t seed, double alpha, double beta,
                const std::string& mode, const std::string& out) {
  dpmimo::AsfGenConfig gen;
  gen.alpha = alpha;
  gen.beta = beta;
  if (mode == "uniform") gen.mode = dpmimo::AsfGenMode::kUniform;
  else if (mode == "four-scatterer")
    gen.mode = dpmimo::AsfGenMode::kFourScatterer;
  else throw ConfigError("mode", "expected 'uniform' or 'four-scatterer'");
  dpmimo::Rng rng(seed);
  const dpmimo::DpAsf asf = dpmimo::generate_random_asf(gen, rng);
  emit_json(out, asf.to_json());
  return 0;
}

int run_synth_cov(const std::string& asf_path, int m, double nu,
                  const std::string& out) {
  const dpmimo::DpAsf asf =
      dpmimo::DpAsf::from_json(load_json_file(asf_path, "asf"));
  const dpmimo::ArrayGeometry g = dpmimo::ArrayGeometry::dl(m, nu);
  g.validate();
  const Mat sigma = dpmimo::synth_covariance(asf, g);
  emit_json(out, cov_to_json(sigma, nu, dpmimo::CovProvenance::kTrue, false));
  return 0;
}

ojson coeffs_to_json(const std::vector<Mat2>& coeffs) {
  ojson arr = ojson::array();
  for (const auto& c : coeffs) arr.push_back(mat_to_json(c));
  return arr;
}

std::vector<Mat2> coeffs_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("fit.coeffs", "expected an array");
  std::vector<Mat2> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Mat c = mat_from_json(j[i], "fit.coeffs");
    if (c.rows() != 2 || c.cols() != 2)
      throw ConfigError("fit.coeffs", "blocks must be 2x2");
    out.push_back(c);
  }
  return out;
}

int run_estimate(const std::string& cov_path, int r_hat, int dict_size,
                 int music_grid, int sample_n, double snr_db, double p,
                 int max_iters, double rel_tol, std::uint64_t seed,
                 const std::string& out) {
  const CovFile f = load_cov_file(cov_path);
  dpmimo::CovEstimate target;
  target.sigma = f.sigma;
  target.provenance = dpmimo::CovProvenance::kTrue;
  if (sample_n > 0) {
    dpmimo::Rng rng(seed);
    const dpmimo::ChannelSampler sampler(f.sigma);
    const double n0 = dpmimo::snr_to_n0(snr_db, p);
    Mat h = sampler.draw_many(sample_n, rng);
    Mat y(h.rows(), h.cols());
    const double sp = std::sqrt(p), sn = std::sqrt(n0);
    for (Eigen::Index c = 0; c < h.cols(); ++c)
      for (Eigen::Index r = 0; r < h.rows(); ++r)
        y(r, c) = sp * h(r, c) + sn * rng.complex_normal();
    target = dpmimo::sample_covariance(y, p, n0);
  }
  const dpmimo::ArrayGeometry geom{f.m, f.nu};
  geom.validate();
  const int b = dict_size > 0 ? dict_size : 3 * f.m;
  const auto dict = dpmimo::default_dictionary(b);
  dpmimo::PsdLsConfig pcfg;
  pcfg.max_iters = max_iters;
  pcfg.rel_tol = rel_tol;
  const dpmimo::StructuredFit fit =
      dpmimo::fit_structured(target, dict, geom, r_hat, music_grid, pcfg);

  ojson j;
  j["kind"] = "structured-fit";
  j["m"] = f.m;
  j["nu"] = f.nu;
  j["r_hat"] = r_hat;
  j["dict_size"] = b;
  j["aoas"] = fit.music.aoas;
  j["padded"] = fit.music.padded;
  j["coeffs"] = coeffs_to_json(fit.fit.coeffs);
  j["objective"] = fit.fit.objective;
  j["iterations"] = fit.fit.iterations;
  j["converged"] = fit.fit.converged;
  j["flagged"] = fit.flagged;
  j["sigma"] = mat_to_json(fit.fit.fitted.sigma);
  emit_json(out, j);
  return fit.fit.converged ? 0 : 3;
}

int run_transform(const std::string& fit_path, double nu,
                  const std::string& out) {
  const json j = load_json_file(fit_path, "fit");
  if (!j.is_object() || j.value("kind", "") != "structured-fit")
    throw ConfigError("fit", "'" + fit_path + "' is not a structured fit");
  const int m = j.value("m", 0);
  if (m < 2) throw ConfigError("fit.m", "must be >= 2");
  const int dict_size = j.value("dict_size", 3 * m);
  const std::vector<double> aoas =
      j.value("aoas", std::vector<double>{});
  const std::vector<Mat2> coeffs = coeffs_from_json(j.at("coeffs"));
  const double fit_nu = j.value("nu", 1.0);
  const auto dict = dpmimo::default_dictionary(dict_size);
  const dpmimo::BasisSet basis = dpmimo::build_basis(
      aoas, dict, dpmimo::ArrayGeometry{m, fit_nu});
  const dpmimo::CovEstimate est =
      dpmimo::transform_to_dl(coeffs, basis, nu);
  emit_json(out, cov_to_json(est.sigma, nu, est.provenance,
                             j.value("flagged", false)));
  return 0;
}

int run_graph(const std::vector<std::string>& cov_paths, int t_dl, double p0,
              double delta, double epsilon, const std::string& out) {
  if (cov_paths.empty())
    throw ConfigError("cov", "need at least one covariance file");
  std::vector<dpmimo::BeamVariances> users;
  int m = 0;
  for (const auto& path : cov_paths) {
    const CovFile f = load_cov_file(path);
    if (m == 0) m = f.m;
    else if (f.m != m)
      throw ConfigError("cov", "covariance files disagree on M");
    users.push_back(dpmimo::beam_variances(f.sigma));
  }
  const double eps = epsilon >= 0 ? epsilon : dpmimo::default_epsilon(users);
  const dpmimo::BeamGraph g = dpmimo::build_graph(users, eps);
  const double p0v = p0 >= 0 ? p0 : dpmimo::default_p0(users);
  const double dv = delta >= 0 ? delta : dpmimo::default_delta(m);
  const dpmimo::MilpInstance inst =
      dpmimo::MilpInstance::from_graph(g, t_dl, p0v, dv);
  std::ostringstream ss;
  dpmimo::write_instance(ss, inst);
  emit_text(out, ss.str());
  return 0;
}

int run_milp_solve(const std::string& instance_path, long node_limit,
                   double time_limit_s, const std::string& out) {
  std::ifstream is(instance_path);
  if (!is)
    throw ConfigError("instance", "cannot open '" + instance_path + "'");
  const dpmimo::MilpInstance inst = dpmimo::read_instance(is);
  dpmimo::SolveLimits limits;
  limits.node_limit = node_limit;
  limits.time_limit_s = time_limit_s;
  const dpmimo::MilpSolution sol = dpmimo::solve_milp(inst, limits);

  ojson j;
  j["kind"] = "milp-solution";
  j["status"] = dpmimo::to_string(sol.status);
  j["objective"] = sol.objective;
  j["upper_bound"] = sol.upper_bound;
  j["nodes"] = sol.nodes;
  j["matching"] = sol.matching;
  j["active_beams"] = sol.active_beams;
  ojson beams = ojson::array(), users = ojson::array(),
        edges = ojson::array();
  for (Eigen::Index i = 0; i < sol.assignment.x.size(); ++i)
    if (sol.assignment.x(i)) beams.push_back(static_cast<int>(i));
  for (Eigen::Index k = 0; k < sol.assignment.y.size(); ++k)
    if (sol.assignment.y(k)) users.push_back(static_cast<int>(k));
  for (Eigen::Index i = 0; i < sol.assignment.z.rows(); ++i)
    for (Eigen::Index k = 0; k < sol.assignment.z.cols(); ++k)
      if (sol.assignment.z(i, k) > 0.0)
        edges.push_back({{"beam", static_cast<int>(i)},
                         {"user", static_cast<int>(k)},
                         {"z", sol.assignment.z(i, k)}});
  j["beams"] = std::move(beams);
  j["users"] = std::move(users);
  j["edges"] = std::move(edges);
  emit_json(out, j);
  return sol.status == dpmimo::MilpStatus::kOptimal ? 0 : 3;
}

int run_table_experiment(bool per_trial, const std::string& config_path,
                         bool seed_set, std::uint64_t seed, int threads,
                         const std::string& format, const std::string& out) {
  if (config_path.empty())
    throw ConfigError("config", "a --config file is required");
  json j = load_json_file(config_path, "config");
  if (seed_set) j["seed"] = seed;
  if (threads >= 0) j["threads"] = threads;
  const dpmimo::ExperimentConfig cfg = dpmimo::parse_experiment_config(j);
  const dpmimo::ResultTable table = per_trial
                                        ? dpmimo::run_experiment_trials(cfg)
                                        : dpmimo::run_experiment(cfg);
  emit_table(out, table, format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpmimo: dual-polarized FDD massive MIMO simulation toolkit"};
  app.set_version_flag("--version", std::string(dpmimo::kVersion));
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv";
  std::uint64_t seed = 1;
  int threads = -1;
  auto* seed_opt =
      app.add_option("--seed", seed, "RNG seed (overrides the config file)");
  app.add_option("--config", config_path, "JSON experiment config file");
  app.add_option("--out", out_path, "output file (default: stdout)");
  app.add_option("--threads", threads, "worker threads (0 = auto)");
  app.add_option("--format", format, "table format")
      ->check(CLI::IsMember({"csv", "json"}));

  // gen-asf
  double ga_alpha = 0.5, ga_beta = 0.5;
  std::string ga_mode = "uniform";
  auto* c_gen = app.add_subcommand(
      "gen-asf", "draw a random dual-polarized angular scattering function");
  c_gen->fallthrough();
  c_gen->add_option("--alpha", ga_alpha, "continuous power fraction [0,1]");
  c_gen->add_option("--beta", ga_beta, "H/V coupling magnitude [0,1]");
  c_gen->add_option("--mode", ga_mode, "uniform | four-scatterer");

  // synth-cov
  std::string sc_asf;
  int sc_m = 16;
  double sc_nu = 1.0;
  auto* c_synth =
      app.add_subcommand("synth-cov", "synthesize a covariance from an ASF");
  c_synth->fallthrough();
  c_synth->add_option("--asf", sc_asf, "ASF JSON file")->required();
  c_synth->add_option("--m", sc_m, "antennas per polarization");
  c_synth->add_option("--nu", sc_nu, "carrier ratio (1 = uplink)");

  // estimate
  std::string es_cov;
  int es_rhat = 4, es_dict = 0, es_grid = 0, es_n = 0, es_iters = 10000;
  double es_snr = 10.0, es_p = 1.0, es_tol = 1e-8;
  auto* c_est = app.add_subcommand(
      "estimate", "fit the structured model to a covariance");
  c_est->fallthrough();
  c_est->add_option("--cov", es_cov, "covariance JSON file")->required();
  c_est->add_option("--r-hat", es_rhat, "spike count for the AoA search");
  c_est->add_option("--dict-size", es_dict, "dictionary size (0 = 3M)");
  c_est->add_option("--music-grid", es_grid, "AoA grid size (0 = 16M)");
  c_est->add_option("--sample-n", es_n,
                    "draw N noisy pilot snapshots first (0 = fit directly)");
  c_est->add_option("--snr-db", es_snr, "pilot SNR in dB (with --sample-n)");
  c_est->add_option("--power", es_p, "pilot power (with --sample-n)");
  c_est->add_option("--max-iters", es_iters, "solver iteration budget");
  c_est->add_option("--rel-tol", es_tol, "solver relative tolerance");

  // transform
  std::string tr_fit;
  double tr_nu = 1.2;
  auto* c_tr = app.add_subcommand(
      "transform", "carry a structured fit to the downlink carrier");
  c_tr->fallthrough();
  c_tr->add_option("--fit", tr_fit, "structured-fit JSON file")->required();
  c_tr->add_option("--nu", tr_nu, "downlink/uplink carrier ratio");

  // graph
  std::vector<std::string> gr_covs;
  int gr_tdl = 8;
  double gr_p0 = -1, gr_delta = -1, gr_eps = -1;
  auto* c_gr = app.add_subcommand(
      "graph", "build a beam-selection instance from user covariances");
  c_gr->fallthrough();
  c_gr->add_option("--cov", gr_covs, "covariance JSON files (repeatable)")
      ->required();
  c_gr->add_option("--t-dl", gr_tdl, "pilot dimension budget");
  c_gr->add_option("--p0", gr_p0, "power floor (negative = default)");
  c_gr->add_option("--delta", gr_delta, "beam bonus (negative = default)");
  c_gr->add_option("--epsilon", gr_eps,
                   "adjacency threshold (negative = default)");

  // milp-solve
  std::string ms_inst;
  long ms_nodes = 1'000'000;
  double ms_time = 60.0;
  auto* c_ms =
      app.add_subcommand("milp-solve", "solve a beam-selection instance");
  c_ms->fallthrough();
  c_ms->add_option("--instance", ms_inst, "instance file")->required();
  c_ms->add_option("--node-limit", ms_nodes, "branch-and-bound node budget");
  c_ms->add_option("--time-limit-s", ms_time, "wall-clock budget in seconds");

  // simulate / sweep
  auto* c_sim = app.add_subcommand(
      "simulate", "per-trial link simulation (needs --config)");
  c_sim->fallthrough();
  auto* c_sweep = app.add_subcommand(
      "sweep", "aggregated Monte-Carlo experiment (needs --config)");
  c_sweep->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_gen))
      return run_gen_asf(seed, ga_alpha, ga_beta, ga_mode, out_path);
    if (app.got_subcommand(c_synth))
      return run_synth_cov(sc_asf, sc_m, sc_nu, out_path);
    if (app.got_subcommand(c_est))
      return run_estimate(es_cov, es_rhat, es_dict, es_grid, es_n, es_snr,
                          es_p, es_iters, es_tol, seed, out_path);
    if (app.got_subcommand(c_tr)) return run_transform(tr_fit, tr_nu, out_path);
    if (app.got_subcommand(c_gr))
      return run_graph(gr_covs, gr_tdl, gr_p0, gr_delta, gr_eps, out_path);
    if (app.got_subcommand(c_ms))
      return run_milp_solve(ms_inst, ms_nodes, ms_time, out_path);
    if (app.got_subcommand(c_sim))
      return run_table_experiment(true, config_path, seed_opt->count() > 0,
                                  seed, threads, format, out_path);
    if (app.got_subcommand(c_sweep))
      return run_table_experiment(false, config_path, seed_opt->count() > 0,
                                  seed, threads, format, out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
