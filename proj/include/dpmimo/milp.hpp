// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Active channel sparsification MILP:
//
//   max  sum_{mk} z_mk + delta * sum_m x_m
//   s.t. z_mk <= A_mk                      (edge box)
//        sum_k z_mk <= x_m                 (beam capacity)
//        sum_m z_mk <= y_k                 (user capacity)
//        sum_m A_mk x_m <= T_dl y_k + 2M (1 - y_k)   (pilot budget)
//        P0 y_k <= sum_m A_mk W_mk x_m     (power floor)
//        x_m <= sum_k A_mk y_k             (beam needs a user)
//        x, y binary, z in [0, 1]
//
// For a fixed binary (x, y) the optimal z is a maximum bipartite matching
// (the z-polytope is integral), so with delta * 2M < 1 the objective is
// exactly the lexicographic pair (matching size, active beam count). The
// solver is a deterministic best-value-first DFS over beams then users,
// with constraint-propagation pruning and a (matching, budget-capped beam
// count) bound; all comparisons are exact integer comparisons.

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dpmimo/beams.hpp"
#include "dpmimo/errors.hpp"
#include "dpmimo/linalg.hpp"
#include "dpmimo/matching.hpp"

namespace dpmimo {

struct MilpInstance {
  RealMat weights;            // 2M x K (only entries with adjacency count)
  Eigen::MatrixXi adjacency;  // 2M x K, 0/1
  int t_dl = 0;
  double p0 = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;  // graph threshold, carried for provenance

  int n_beams() const { return static_cast<int>(weights.rows()); }
  int n_users() const { return static_cast<int>(weights.cols()); }

  void validate() const {
    if (weights.rows() != adjacency.rows() ||
        weights.cols() != adjacency.cols())
      throw ConfigError("milp", "weight/adjacency shape mismatch");
    if (weights.rows() < 1 || weights.cols() < 1)
      throw ConfigError("milp", "instance must have beams and users");
    if (t_dl < 1) throw ConfigError("milp.tdl", "must be >= 1");
    if (!(p0 >= 0.0)) throw ConfigError("milp.p0", "must be >= 0");
    if (!(delta > 0.0) || delta * n_beams() >= 1.0)
      throw ConfigError("milp.delta",
                        "must satisfy 0 < delta * n_beams < 1 so the "
                        "objective splits lexicographically");
    for (int m = 0; m < n_beams(); ++m)
      for (int k = 0; k < n_users(); ++k) {
        if (adjacency(m, k) != 0 && adjacency(m, k) != 1)
          throw ConfigError("milp.adjacency", "entries must be 0/1");
        if (!(weights(m, k) >= 0.0) || !std::isfinite(weights(m, k)))
          throw ConfigError("milp.weights", "entries must be finite and >= 0");
      }
  }

  static MilpInstance from_graph(const BeamGraph& g, int t_dl, double p0,
                                 double delta) {
    g.validate();
    MilpInstance inst;
    inst.weights = g.weights;
    inst.adjacency = g.adjacency;
    inst.t_dl = t_dl;
    inst.p0 = p0;
    inst.delta = delta;
    inst.epsilon = g.epsilon;
    inst.validate();
    return inst;
  }
};

struct MilpAssignment {
  Eigen::VectorXi x;  // 2M
  Eigen::VectorXi y;  // K
  RealMat z;          // 2M x K
};

enum class MilpStatus { kOptimal, kNodeLimit, kTimeLimit };

inline const char* to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::kOptimal: return "optimal";
    case MilpStatus::kNodeLimit: return "node-limit";
    case MilpStatus::kTimeLimit: return "time-limit";
  }
  return "?";
}

struct MilpSolution {
  MilpAssignment assignment;
  int matching = 0;
  int active_beams = 0;
  double objective = 0.0;
  MilpStatus status = MilpStatus::kOptimal;
  long nodes = 0;
  double upper_bound = 0.0;  // valid global bound (== objective if optimal)
};

// Hook receives the partial assignment (-1 undecided) and the node bounds;
// used by property tests to verify bound validity.
using MilpNodeHook = std::function<void(
    const std::vector<std::int8_t>& x_state,
    const std::vector<std::int8_t>& y_state, int matching_ub, int beams_ub)>;

struct SolveLimits {
  long node_limit = 1'000'000;
  double time_limit_s = 60.0;
  MilpNodeHook node_hook;
};

// Labeled constraint check; returns one violation string per broken row.
inline std::vector<std::string> check_feasible(const MilpInstance& inst,
                                               const MilpAssignment& asg,
                                               double tol = 1e-9) {
  inst.validate();
  std::vector<std::string> bad;
  const int nb = inst.n_beams(), nu = inst.n_users();
  if (asg.x.size() != nb || asg.y.size() != nu || asg.z.rows() != nb ||
      asg.z.cols() != nu) {
    bad.push_back("shape: assignment does not match instance");
    return bad;
  }
  auto label = [](const std::string& name, int i, int j = -1) {
    std::ostringstream os;
    os << name << "[" << i;
    if (j >= 0) os << "," << j;
    os << "]";
    return os.str();
  };
  for (int m = 0; m < nb; ++m)
    if (asg.x(m) != 0 && asg.x(m) != 1) bad.push_back(label("x_binary", m));
  for (int k = 0; k < nu; ++k)
    if (asg.y(k) != 0 && asg.y(k) != 1) bad.push_back(label("y_binary", k));
  for (int m = 0; m < nb; ++m)
    for (int k = 0; k < nu; ++k) {
      if (asg.z(m, k) < -tol || asg.z(m, k) > 1.0 + tol)
        bad.push_back(label("z_box", m, k));
      if (asg.z(m, k) > inst.adjacency(m, k) + tol)
        bad.push_back(label("z_le_adjacency", m, k));
    }
  for (int m = 0; m < nb; ++m)
    if (asg.z.row(m).sum() > asg.x(m) + tol)
      bad.push_back(label("beam_capacity", m));
  for (int k = 0; k < nu; ++k)
    if (asg.z.col(k).sum() > asg.y(k) + tol)
      bad.push_back(label("user_capacity", k));
  for (int k = 0; k < nu; ++k) {
    double deg = 0.0;
    for (int m = 0; m < nb; ++m) deg += inst.adjacency(m, k) * asg.x(m);
    const double cap =
        inst.t_dl * asg.y(k) + nb * (1.0 - asg.y(k));  // nb == 2M
    if (deg > cap + tol) bad.push_back(label("pilot_degree", k));
  }
  for (int k = 0; k < nu; ++k) {
    double pow = 0.0;
    for (int m = 0; m < nb; ++m)
      pow += inst.adjacency(m, k) * inst.weights(m, k) * asg.x(m);
    if (inst.p0 * asg.y(k) > pow + tol) bad.push_back(label("power_floor", k));
  }
  for (int m = 0; m < nb; ++m) {
    int nbrs = 0;
    for (int k = 0; k < nu; ++k) nbrs += inst.adjacency(m, k) * asg.y(k);
    if (asg.x(m) > nbrs) bad.push_back(label("beam_needs_user", m));
  }
  return bad;
}

namespace detail {

class BnbSolver {
 public:
  BnbSolver(const MilpInstance& inst, const SolveLimits& limits)
      : inst_(inst), lim_(limits), nb_(inst.n_beams()), nu_(inst.n_users()) {
    beam_nbrs_.resize(nb_);
    user_nbrs_.resize(nu_);
    for (int m = 0; m < nb_; ++m)
      for (int k = 0; k < nu_; ++k)
        if (inst_.adjacency(m, k)) {
          beam_nbrs_[m].push_back(k);
          user_nbrs_[k].push_back(m);
        }
    // Branch users before beams (there are few users, and once they are
    // decided the per-beam budget-consumption bound below becomes sharp),
    // both groups in descending total-weight order.
    std::vector<int> beams(nb_), users(nu_);
    for (int m = 0; m < nb_; ++m) beams[m] = m;
    for (int k = 0; k < nu_; ++k) users[k] = k;
    auto beam_w = [&](int m) {
      double w = 0.0;
      for (int k : beam_nbrs_[m]) w += inst_.weights(m, k);
      return w;
    };
    auto user_w = [&](int k) {
      double w = 0.0;
      for (int m : user_nbrs_[k]) w += inst_.weights(m, k);
      return w;
    };
    // Beams in ascending degree (cheap-to-activate first, so the 1-first
    // dive mimics a capacity-respecting greedy packing), ties by weight.
    std::sort(beams.begin(), beams.end(), [&](int a, int b) {
      const auto da = beam_nbrs_[a].size(), db = beam_nbrs_[b].size();
      if (da != db) return da < db;
      const double wa = beam_w(a), wb = beam_w(b);
      return wa != wb ? wa > wb : a < b;
    });
    std::sort(users.begin(), users.end(), [&](int a, int b) {
      const double wa = user_w(a), wb = user_w(b);
      return wa != wb ? wa > wb : a < b;
    });
    order_.reserve(static_cast<std::size_t>(nb_ + nu_));
    for (int k : users) order_.push_back(nb_ + k);
    for (int m : beams) order_.push_back(m);
    user_sorted_ = user_nbrs_;
    for (int k = 0; k < nu_; ++k)
      std::sort(user_sorted_[k].begin(), user_sorted_[k].end(),
                [&](int a, int b) {
                  const double wa = inst_.weights(a, k),
                               wb = inst_.weights(b, k);
                  return wa != wb ? wa > wb : a < b;
                });
    xs_.assign(nb_, -1);
    ys_.assign(nu_, -1);
  }

  MilpSolution run() {
    t0_ = std::chrono::steady_clock::now();
    seed_greedy_incumbent();
    search(0);
    MilpSolution sol;
    sol.assignment = best_;
    sol.matching = best_m_;
    sol.active_beams = best_b_;
    sol.objective = best_m_ + inst_.delta * best_b_;
    sol.status = status_;
    sol.nodes = nodes_;
    sol.upper_bound = status_ == MilpStatus::kOptimal
                          ? sol.objective
                          : root_m_ub_ + inst_.delta * root_b_ub_;
    return sol;
  }

 private:
  // ---- incumbent -------------------------------------------------------

  void commit_incumbent(const std::vector<char>& x_sel,
                        const std::vector<char>& y_sel) {
    HopcroftKarp hk(nb_, nu_);
    for (int m = 0; m < nb_; ++m)
      if (x_sel[m])
        for (int k : beam_nbrs_[m])
          if (y_sel[k]) hk.add_edge(m, k);
    const int mval = hk.solve();
    int bval = 0;
    for (int m = 0; m < nb_; ++m) bval += x_sel[m];
    if (mval > best_m_ || (mval == best_m_ && bval > best_b_)) {
      best_m_ = mval;
      best_b_ = bval;
      best_.x.resize(nb_);
      best_.y.resize(nu_);
      best_.z = RealMat::Zero(nb_, nu_);
      for (int m = 0; m < nb_; ++m) best_.x(m) = x_sel[m];
      for (int k = 0; k < nu_; ++k) best_.y(k) = y_sel[k];
      for (auto [m, k] : hk.matched_pairs()) best_.z(m, k) = 1.0;
    }
  }

  // Deterministic repair heuristic; any feasible point seeds the pruning.
  void seed_greedy_incumbent() {
    best_m_ = -1;  // force the first commit to stick
    best_b_ = -1;
    std::vector<char> y_sel(nu_, 1), x_sel(nb_, 0);
    for (int round = 0; round <= nu_; ++round) {
      x_sel.assign(nb_, 0);
      for (int k = 0; k < nu_; ++k) {
        if (!y_sel[k]) continue;
        // Top-t_dl edges of user k by weight (ties: lower beam index).
        std::vector<int> cand = user_nbrs_[k];
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
          const double wa = inst_.weights(a, k), wb = inst_.weights(b, k);
          return wa != wb ? wa > wb : a < b;
        });
        for (std::size_t i = 0; i < cand.size() &&
                                i < static_cast<std::size_t>(inst_.t_dl);
             ++i)
          x_sel[cand[i]] = 1;
      }
      // Repair pilot-budget overloads by dropping the lightest beams.
      for (;;) {
        int worst = -1, worst_excess = 0;
        for (int k = 0; k < nu_; ++k) {
          if (!y_sel[k]) continue;
          int deg = 0;
          for (int m : user_nbrs_[k]) deg += x_sel[m];
          const int excess = deg - inst_.t_dl;
          if (excess > worst_excess) {
            worst_excess = excess;
            worst = k;
          }
        }
        if (worst < 0) break;
        int drop = -1;
        double drop_w = 0.0;
        for (int m : user_nbrs_[worst])
          if (x_sel[m] && (drop == -1 || inst_.weights(m, worst) < drop_w)) {
            drop = m;
            drop_w = inst_.weights(m, worst);
          }
        x_sel[drop] = 0;
      }
      // Beams with no selected neighbor cannot stay active.
      for (int m = 0; m < nb_; ++m) {
        if (!x_sel[m]) continue;
        bool ok = false;
        for (int k : beam_nbrs_[m]) ok = ok || y_sel[k];
        if (!ok) x_sel[m] = 0;
      }
      // Drop users below the power floor and rebuild.
      bool dropped = false;
      for (int k = 0; k < nu_; ++k) {
        if (!y_sel[k]) continue;
        double pow = 0.0;
        for (int m : user_nbrs_[k]) pow += x_sel[m] * inst_.weights(m, k);
        if (pow < inst_.p0) {
          y_sel[k] = 0;
          dropped = true;
        }
      }
      if (!dropped) break;
    }
    bool any_user = false;
    for (int k = 0; k < nu_; ++k) any_user = any_user || y_sel[k];
    if (!any_user) x_sel.assign(nb_, 0);
    commit_incumbent(x_sel, y_sel);
  }

  // Once every user variable is decided, greedily complete the node's
  // partial beam assignment into a feasible solution: first meet each
  // selected user's power floor with its heaviest beams, then fill the
  // remaining pilot capacity with the cheapest-to-activate beams. Each
  // candidate charges one capacity unit at every selected neighbor, so
  // feasibility is maintained by construction; infeasible completions are
  // simply skipped.
  void try_packed_incumbent(const std::vector<char>& user_ok,
                            const std::vector<char>& beam_ok,
                            const std::vector<int>& forced_deg) {
    std::vector<int> resid(nu_, 0);
    std::vector<double> power(nu_, 0.0);
    std::vector<char> x_sel(nb_, 0), y_sel(nu_, 0);
    for (int k = 0; k < nu_; ++k) {
      if (ys_[k] != 1) continue;
      y_sel[k] = 1;
      resid[k] = inst_.t_dl - forced_deg[k];
      if (resid[k] < 0) return;
    }
    for (int m = 0; m < nb_; ++m)
      if (xs_[m] == 1) {
        x_sel[m] = 1;
        for (int k : beam_nbrs_[m])
          if (y_sel[k]) power[k] += inst_.weights(m, k);
      }
    auto addable = [&](int m) {
      if (xs_[m] != -1 || x_sel[m] || !beam_ok[m]) return false;
      int sel = 0;
      for (int k : beam_nbrs_[m]) {
        if (!y_sel[k]) continue;
        ++sel;
        if (resid[k] <= 0) return false;
      }
      return sel >= 1;
    };
    auto add = [&](int m) {
      x_sel[m] = 1;
      for (int k : beam_nbrs_[m])
        if (y_sel[k]) {
          --resid[k];
          power[k] += inst_.weights(m, k);
        }
    };
    for (int k = 0; k < nu_; ++k) {
      if (!y_sel[k]) continue;
      for (int m : user_sorted_[k]) {
        if (power[k] >= inst_.p0) break;
        if (addable(m)) add(m);
      }
      if (power[k] < inst_.p0) return;  // floor unreachable along this pack
    }
    cand_.clear();
    for (int m = 0; m < nb_; ++m) {
      if (xs_[m] != -1 || x_sel[m] || !beam_ok[m]) continue;
      int sel = 0;
      for (int k : beam_nbrs_[m]) sel += y_sel[k];
      if (sel >= 1) cand_.push_back({sel, m});
    }
    std::sort(cand_.begin(), cand_.end());
    for (const auto& [sel, m] : cand_)
      if (addable(m)) add(m);
    (void)user_ok;
    commit_incumbent(x_sel, y_sel);
  }

  // ---- search ----------------------------------------------------------

  bool over_limits() {
    if (nodes_ > lim_.node_limit) {
      status_ = MilpStatus::kNodeLimit;
      return true;
    }
    if ((nodes_ & 1023) == 0) {
      const double el = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0_)
                            .count();
      if (el > lim_.time_limit_s) {
        status_ = MilpStatus::kTimeLimit;
        return true;
      }
    }
    return false;
  }

  void search(int depth) {
    if (stopped_) return;
    ++nodes_;
    if (over_limits()) {
      stopped_ = true;
      return;
    }

    // Node status: which users/beams can still end up selected/active.
    std::vector<int> forced_deg(nu_, 0);
    std::vector<double> pot_pow(nu_, 0.0);
    for (int k = 0; k < nu_; ++k)
      for (int m : user_nbrs_[k]) {
        if (xs_[m] == 1) ++forced_deg[k];
        if (xs_[m] != 0) pot_pow[k] += inst_.weights(m, k);
      }
    std::vector<char> user_ok(nu_, 0), beam_ok(nb_, 0);
    for (int k = 0; k < nu_; ++k) {
      const bool feas = forced_deg[k] <= inst_.t_dl && pot_pow[k] >= inst_.p0;
      if (ys_[k] == 1 && !feas) return;  // selected user cannot be served
      user_ok[k] = ys_[k] != 0 && feas;
    }
    for (int m = 0; m < nb_; ++m) {
      if (xs_[m] == 0) continue;
      for (int k : beam_nbrs_[m]) beam_ok[m] = beam_ok[m] || user_ok[k];
      if (xs_[m] == 1 && !beam_ok[m]) return;  // no user can cover this beam
    }

    if (depth == nb_ + nu_) {
      std::vector<char> x_sel(nb_), y_sel(nu_);
      for (int m = 0; m < nb_; ++m) x_sel[m] = xs_[m] == 1;
      for (int k = 0; k < nu_; ++k) y_sel[k] = ys_[k] == 1;
      commit_incumbent(x_sel, y_sel);
      return;
    }

    // Bounds. Beams: forced actives plus as many undecided candidates as
    // the pooled residual pilot budget admits. Activating a beam consumes
    // one budget unit at *every* selected neighbor, so each candidate is
    // charged max(1, #already-selected neighbors) pooled units; cheapest
    // candidates are packed first, which stays an upper bound.
    int forced1 = 0;
    for (int m = 0; m < nb_; ++m)
      if (xs_[m] == 1) ++forced1;
    long budget = 0;
    int n_user_ok = 0, n_beam_ok = 0;
    for (int k = 0; k < nu_; ++k) {
      if (!user_ok[k]) continue;
      ++n_user_ok;
      int undec_nbrs = 0;
      for (int m : user_nbrs_[k])
        if (xs_[m] == -1 && beam_ok[m]) ++undec_nbrs;
      budget += std::max(0, std::min(inst_.t_dl - forced_deg[k], undec_nbrs));
    }
    for (int m = 0; m < nb_; ++m) n_beam_ok += beam_ok[m] != 0;
    nmin_.clear();
    for (int m = 0; m < nb_; ++m) {
      if (xs_[m] != -1 || !beam_ok[m]) continue;
      int sel_nbrs = 0;
      for (int k : beam_nbrs_[m])
        if (ys_[k] == 1) ++sel_nbrs;
      nmin_.push_back(std::max(1, sel_nbrs));
    }
    std::sort(nmin_.begin(), nmin_.end());
    int extra = 0;
    long used = 0;
    for (int c : nmin_) {
      if (used + c > budget) break;
      used += c;
      ++extra;
    }
    // Once every user is decided a covering argument sharpens the pooled
    // budget: for any set S of selected users whose neighborhoods cover all
    // undecided candidates, each activated candidate spends one unit of the
    // residual budget of at least one S-member, so #activations is at most
    // the sum of residuals over S. Greedy pick: cheapest residual per newly
    // covered beam. Any cover is valid, sharpest when one wide user caps
    // the whole beam set.
    if (depth >= nu_ && extra > 0) {
      covered_.assign(nb_, 0);
      int n_uncov = 0;
      for (int m = 0; m < nb_; ++m)
        if (xs_[m] == -1 && beam_ok[m]) ++n_uncov;
      long cover_sum = 0;
      in_cover_.assign(nu_, 0);
      while (n_uncov > 0) {
        int bestk = -1, best_new = 0;
        double best_ratio = 0.0;
        for (int k = 0; k < nu_; ++k) {
          if (in_cover_[k] || ys_[k] != 1) continue;
          int nw = 0;
          for (int m : user_nbrs_[k])
            if (xs_[m] == -1 && beam_ok[m] && !covered_[m]) ++nw;
          if (nw == 0) continue;
          const double ratio =
              static_cast<double>(inst_.t_dl - forced_deg[k]) / nw;
          if (bestk == -1 || ratio < best_ratio ||
              (ratio == best_ratio && nw > best_new)) {
            bestk = k;
            best_ratio = ratio;
            best_new = nw;
          }
        }
        if (bestk == -1) break;  // uncoverable beams can never activate
        in_cover_[bestk] = 1;
        cover_sum += inst_.t_dl - forced_deg[bestk];
        for (int m : user_nbrs_[bestk])
          if (xs_[m] == -1 && beam_ok[m] && !covered_[m]) {
            covered_[m] = 1;
            --n_uncov;
          }
      }
      if (n_uncov == 0 && cover_sum < extra)
        extra = static_cast<int>(cover_sum);
    }
    const int beams_ub = forced1 + extra;
    // A matched user occupies one distinct active beam, so the beam bound
    // caps the matching bound as well.
    const int match_quick = std::min({n_beam_ok, n_user_ok, beams_ub});

    int match_ub = match_quick;
    // Exact matching bound only when the quick cap cannot already prune.
    if (match_quick >= best_m_) {
      HopcroftKarp hk(nb_, nu_);
      for (int m = 0; m < nb_; ++m)
        if (beam_ok[m])
          for (int k : beam_nbrs_[m])
            if (user_ok[k]) hk.add_edge(m, k);
      match_ub = std::min(hk.solve(), beams_ub);
    }
    if (lim_.node_hook) lim_.node_hook(xs_, ys_, match_ub, beams_ub);
    if (depth == 0) {
      root_m_ub_ = match_ub;
      root_b_ub_ = beams_ub;
    }
    if (depth >= nu_) try_packed_incumbent(user_ok, beam_ok, forced_deg);
    const bool can_improve =
        match_ub > best_m_ || (match_ub == best_m_ && beams_ub > best_b_);
    if (!can_improve) return;

    const int var = order_[depth];
    if (var < nb_) {
      for (std::int8_t v : {std::int8_t{1}, std::int8_t{0}}) {
        xs_[var] = v;
        search(depth + 1);
        if (stopped_) break;
      }
      xs_[var] = -1;
    } else {
      const int k = var - nb_;
      for (std::int8_t v : {std::int8_t{1}, std::int8_t{0}}) {
        ys_[k] = v;
        search(depth + 1);
        if (stopped_) break;
      }
      ys_[k] = -1;
    }
  }

  const MilpInstance& inst_;
  SolveLimits lim_;
  int nb_, nu_;
  std::vector<std::vector<int>> beam_nbrs_, user_nbrs_;
  std::vector<int> order_;
  std::vector<std::vector<int>> user_sorted_;  // user's beams, weight desc
  std::vector<int> nmin_;                      // scratch for the beams bound
  std::vector<std::pair<int, int>> cand_;      // scratch for the packing
  std::vector<char> covered_, in_cover_;       // scratch for the cover bound
  std::vector<std::int8_t> xs_, ys_;
  MilpAssignment best_;
  int best_m_ = -1, best_b_ = -1;
  long nodes_ = 0;
  MilpStatus status_ = MilpStatus::kOptimal;
  bool stopped_ = false;
  int root_m_ub_ = 0, root_b_ub_ = 0;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

// Always returns a solution: x = y = z = 0 is feasible by construction, so
// "infeasible" cannot happen; limit hits degrade status, not validity.
inline MilpSolution solve_milp(const MilpInstance& inst,
                               const SolveLimits& limits = {}) {
  inst.validate();
  if (limits.node_limit < 1)
    throw ConfigError("milp.node_limit", "must be >= 1");
  if (!(limits.time_limit_s > 0.0))
    throw ConfigError("milp.time_limit_s", "must be > 0");
  detail::BnbSolver solver(inst, limits);
  MilpSolution sol = solver.run();
  const auto bad = check_feasible(inst, sol.assignment);
  if (!bad.empty())
    throw InvariantViolation("solve_milp: produced infeasible solution (" +
                             bad.front() + ")");
  return sol;
}

// ---- plain-text instance format -----------------------------------------
//
//   # comment
//   beams 12
//   users 3
//   tdl 4
//   p0 0.25
//   delta 0.0208333…
//   epsilon 0.001      (optional)
//   edges 17
//   m k weight         (1-based indices, one line per edge)

inline void write_instance(std::ostream& os, const MilpInstance& inst) {
  inst.validate();
  os << "# dpmimo beam-graph instance\n";
  os << "beams " << inst.n_beams() << "\n";
  os << "users " << inst.n_users() << "\n";
  os << std::setprecision(17);
  os << "tdl " << inst.t_dl << "\n";
  os << "p0 " << inst.p0 << "\n";
  os << "delta " << inst.delta << "\n";
  os << "epsilon " << inst.epsilon << "\n";
  long edges = 0;
  for (int m = 0; m < inst.n_beams(); ++m)
    for (int k = 0; k < inst.n_users(); ++k)
      if (inst.adjacency(m, k)) ++edges;
  os << "edges " << edges << "\n";
  for (int m = 0; m < inst.n_beams(); ++m)
    for (int k = 0; k < inst.n_users(); ++k)
      if (inst.adjacency(m, k))
        os << (m + 1) << " " << (k + 1) << " " << inst.weights(m, k) << "\n";
}

inline MilpInstance read_instance(std::istream& is) {
  MilpInstance inst;
  int nb = -1, nu = -1;
  long edges = -1;
  bool have_tdl = false, have_p0 = false, have_delta = false;
  std::string line;
  long edges_read = 0;
  auto fail = [](const std::string& msg) {
    throw ConfigError("instance", msg);
  };
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    if (edges >= 0 && edges_read < edges) {
      int m, k;
      double w;
      if (!(ls >> m >> k >> w)) fail("malformed edge line: " + line);
      if (m < 1 || m > nb || k < 1 || k > nu)
        fail("edge index out of range: " + line);
      inst.adjacency(m - 1, k - 1) = 1;
      inst.weights(m - 1, k - 1) = w;
      ++edges_read;
      continue;
    }
    std::string key;
    ls >> key;
    if (key == "beams") {
      if (!(ls >> nb) || nb < 1) fail("bad beams line");
    } else if (key == "users") {
      if (!(ls >> nu) || nu < 1) fail("bad users line");
    } else if (key == "tdl") {
      if (!(ls >> inst.t_dl)) fail("bad tdl line");
      have_tdl = true;
    } else if (key == "p0") {
      if (!(ls >> inst.p0)) fail("bad p0 line");
      have_p0 = true;
    } else if (key == "delta") {
      if (!(ls >> inst.delta)) fail("bad delta line");
      have_delta = true;
    } else if (key == "epsilon") {
      if (!(ls >> inst.epsilon)) fail("bad epsilon line");
    } else if (key == "edges") {
      if (nb < 1 || nu < 1) fail("edges section before beams/users");
      if (!(ls >> edges) || edges < 0) fail("bad edges line");
      inst.weights = RealMat::Zero(nb, nu);
      inst.adjacency = Eigen::MatrixXi::Zero(nb, nu);
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  if (nb < 1 || nu < 1) fail("missing beams/users header");
  if (edges < 0) fail("missing edges section");
  if (edges_read != edges)
    fail("expected " + std::to_string(edges) + " edges, found " +
         std::to_string(edges_read));
  if (!have_tdl || !have_p0 || !have_delta)
    fail("missing scalar section (tdl, p0, delta)");
  inst.validate();
  return inst;
}

}  // namespace dpmimo
