// SPDX-License-Identifier: Apache-2.0
// Copyright The dpmimo Authors.
//
// Hopcroft-Karp maximum bipartite matching with Koenig vertex-cover
// extraction (which doubles as an optimality certificate: |matching| ==
// |cover| squeezes everything in between, including the fractional LP).

#pragma once

#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "dpmimo/errors.hpp"

namespace dpmimo {

class HopcroftKarp {
 public:
  HopcroftKarp(int n_left, int n_right) : nl_(n_left), nr_(n_right) {
    if (n_left < 0 || n_right < 0)
      throw DomainError("HopcroftKarp: negative vertex count");
    adj_.resize(static_cast<std::size_t>(n_left));
  }

  void add_edge(int left, int right) {
    if (left < 0 || left >= nl_ || right < 0 || right >= nr_)
      throw DomainError("HopcroftKarp: edge endpoint out of range");
    adj_[left].push_back(right);
  }

  int solve() {
    match_l_.assign(nl_, -1);
    match_r_.assign(nr_, -1);
    int matching = 0;
    while (bfs()) {
      for (int u = 0; u < nl_; ++u)
        if (match_l_[u] == -1 && dfs(u)) ++matching;
    }
    solved_ = true;
    return matching;
  }

  // Matched (left, right) pairs, in left-vertex order.
  std::vector<std::pair<int, int>> matched_pairs() const {
    require_solved();
    std::vector<std::pair<int, int>> out;
    for (int u = 0; u < nl_; ++u)
      if (match_l_[u] != -1) out.push_back({u, match_l_[u]});
    return out;
  }

  // Koenig construction: alternating-reachability from free left vertices.
  // Returns (left cover, right cover); together they touch every edge and
  // their total size equals the maximum matching.
  std::pair<std::vector<int>, std::vector<int>> min_vertex_cover() const {
    require_solved();
    std::vector<char> vis_l(nl_, 0), vis_r(nr_, 0);
    std::queue<int> q;
    for (int u = 0; u < nl_; ++u)
      if (match_l_[u] == -1) {
        vis_l[u] = 1;
        q.push(u);
      }
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj_[u]) {
        if (vis_r[v] || match_l_[u] == v) continue;  // unmatched edges only
        vis_r[v] = 1;
        const int w = match_r_[v];
        if (w != -1 && !vis_l[w]) {
          vis_l[w] = 1;
          q.push(w);
        }
      }
    }
    std::vector<int> cover_l, cover_r;
    for (int u = 0; u < nl_; ++u)
      if (!vis_l[u]) cover_l.push_back(u);
    for (int v = 0; v < nr_; ++v)
      if (vis_r[v]) cover_r.push_back(v);
    return {cover_l, cover_r};
  }

 private:
  static constexpr int kInf = std::numeric_limits<int>::max();

  bool bfs() {
    dist_.assign(nl_, kInf);
    std::queue<int> q;
    for (int u = 0; u < nl_; ++u)
      if (match_l_[u] == -1) {
        dist_[u] = 0;
        q.push(u);
      }
    bool found = false;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj_[u]) {
        const int w = match_r_[v];
        if (w == -1) {
          found = true;
        } else if (dist_[w] == kInf) {
          dist_[w] = dist_[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(int u) {
    for (int v : adj_[u]) {
      const int w = match_r_[v];
      if (w == -1 || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_l_[u] = v;
        match_r_[v] = u;
        return true;
      }
    }
    dist_[u] = kInf;
    return false;
  }

  void require_solved() const {
    if (!solved_)
      throw InvariantViolation("HopcroftKarp: call solve() first");
  }

  int nl_, nr_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> match_l_, match_r_;
  std::vector<int> dist_;
  bool solved_ = false;
};

}  // namespace dpmimo
