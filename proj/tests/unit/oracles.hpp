#pragma once

// Brute-force reference implementations. They share no code with the library
// beyond the dataset container, so agreement is independent evidence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "coforest/data.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// |X_{r,u} ∩ C_j| by scanning every sample for every (value, cluster) pair.
inline std::size_t joint_count(const coforest::CategoricalDataset& ds, const std::vector<std::uint32_t>& q,
                               std::size_t r, std::size_t u, std::size_t j) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i)
    if (ds.at(i, r) == u && q[i] == j) ++c;
  return c;
}

inline double p_cluster_given_value(const coforest::CategoricalDataset& ds, const std::vector<std::uint32_t>& q,
                                    std::size_t r, std::size_t u, std::size_t j) {
  std::size_t support = 0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) support += ds.at(i, r) == u;
  return static_cast<double>(joint_count(ds, q, r, u, j)) / static_cast<double>(support);
}

inline double p_value_given_cluster(const coforest::CategoricalDataset& ds, const std::vector<std::uint32_t>& q,
                                    std::size_t r, std::size_t u, std::size_t j) {
  std::size_t size = 0;
  for (auto c : q) size += c == j;
  return static_cast<double>(joint_count(ds, q, r, u, j)) / static_cast<double>(size);
}

struct Edge {
  std::size_t a, b;
  double w;
};

inline bool connects_all(std::size_t nodes, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::size_t>> adj(nodes);
  for (const auto& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<bool> seen(nodes, false);
  std::queue<std::size_t> todo;
  todo.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!todo.empty()) {
    auto v = todo.front();
    todo.pop();
    for (auto w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        todo.push(w);
      }
  }
  return count == nodes;
}

// Minimum total weight over every (nodes-1)-subset of the complete graph's
// edges that connects all nodes.
inline double min_spanning_weight_by_enumeration(const Matrix& w) {
  const std::size_t n = w.size();
  if (n <= 1) return 0.0;
  std::vector<Edge> all;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) all.push_back({a, b, w[a][b]});
  std::vector<bool> pick(all.size(), false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n - 1), true);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<Edge> chosen;
    double total = 0.0;
    for (std::size_t e = 0; e < all.size(); ++e)
      if (pick[e]) {
        chosen.push_back(all[e]);
        total += all[e].w;
      }
    if (connects_all(n, chosen)) best = std::min(best, total);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

// Dijkstra from every source over an explicit edge list.
inline Matrix all_pairs_shortest_paths(std::size_t nodes, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(nodes);
  for (const auto& e : edges) {
    adj[e.a].push_back({e.b, e.w});
    adj[e.b].push_back({e.a, e.w});
  }
  Matrix d(nodes, std::vector<double>(nodes, std::numeric_limits<double>::infinity()));
  for (std::size_t s = 0; s < nodes; ++s) {
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[s][s] = 0.0;
    pq.push({0.0, s});
    while (!pq.empty()) {
      auto [dist, v] = pq.top();
      pq.pop();
      if (dist > d[s][v]) continue;
      for (auto [t, w] : adj[v])
        if (dist + w < d[s][t]) {
          d[s][t] = dist + w;
          pq.push({d[s][t], t});
        }
    }
  }
  return d;
}

// L(Q, D) by the defining triple sum: samples × attributes × values.
inline double objective(const coforest::CategoricalDataset& ds, const std::vector<std::uint32_t>& q,
                        const std::vector<Matrix>& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i)
    for (std::size_t r = 0; r < ds.num_attributes(); ++r)
      for (std::size_t u = 0; u < ds.cardinality(r); ++u)
        total += p_value_given_cluster(ds, q, r, u, q[i]) * dist[r][ds.at(i, r)][u];
  return total;
}

// Per-sample argmin of Γ under the statistics of partition q, lowest index on ties.
inline std::vector<std::uint32_t> argmin(const coforest::CategoricalDataset& ds, const std::vector<std::uint32_t>& q,
                                         std::size_t k, const std::vector<Matrix>& dist) {
  std::vector<std::uint32_t> out(ds.num_samples());
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      double g = 0.0;
      for (std::size_t r = 0; r < ds.num_attributes(); ++r)
        for (std::size_t u = 0; u < ds.cardinality(r); ++u)
          g += p_value_given_cluster(ds, q, r, u, j) * dist[r][ds.at(i, r)][u];
      if (g < best) {
        best = g;
        out[i] = static_cast<std::uint32_t>(j);
      }
    }
  }
  return out;
}

// Best matched fraction over every injective cluster→class assignment.
inline double accuracy_by_permutation(const std::vector<std::uint32_t>& pred, const std::vector<std::uint32_t>& truth) {
  std::uint32_t kp = *std::max_element(pred.begin(), pred.end()) + 1;
  std::uint32_t kt = *std::max_element(truth.begin(), truth.end()) + 1;
  const std::uint32_t m = std::max(kp, kt);
  std::vector<std::uint32_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0u);
  std::size_t best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += perm[pred[i]] == truth[i];
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(pred.size());
}

// Hubert-Arabie ARI from the four pair-agreement counts, enumerated pair by pair.
inline double ari_by_pairs(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y) {
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const bool sx = x[i] == x[j], sy = y[i] == y[j];
      if (sx && sy) ++a;
      else if (sx) ++b;
      else if (sy) ++c;
      else ++d;
    }
  const double den = (a + b) * (b + d) + (a + c) * (c + d);
  if (den == 0.0) return 1.0;
  return 2.0 * (a * d - b * c) / den;
}

// I(X;Y) / ((H(X)+H(Y))/2) from empirical probabilities, in bits.
inline double nmi_textbook(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y) {
  const double n = static_cast<double>(x.size());
  std::map<std::uint32_t, double> px, py;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> pxy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    px[x[i]] += 1.0;
    py[y[i]] += 1.0;
    pxy[{x[i], y[i]}] += 1.0;
  }
  for (auto* m : {&px, &py})
    for (auto& [_, p] : *m) p /= n;
  for (auto& [_, p] : pxy) p /= n;
  double hx = 0, hy = 0, mi = 0;
  for (auto [_, p] : px) hx -= p * std::log2(p);
  for (auto [_, p] : py) hy -= p * std::log2(p);
  for (auto [key, p] : pxy) mi += p * std::log2(p / (px[key.first] * py[key.second]));
  if (hx + hy == 0.0) return 1.0;
  return mi / ((hx + hy) / 2.0);
}

// Random categorical dataset: each attribute has between 1 and max_values values.
inline coforest::CategoricalDataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t l,
                                                   std::size_t max_values) {
  std::uniform_int_distribution<std::size_t> card(1, max_values);
  std::vector<std::size_t> o(l);
  for (auto& v : o) v = card(rng);
  std::vector<std::vector<std::string>> raw(n, std::vector<std::string>(l));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < l; ++r) raw[i][r] = "x" + std::to_string(std::uniform_int_distribution<std::size_t>(0, o[r] - 1)(rng));
  std::string csv;
  for (std::size_t r = 0; r < l; ++r) csv += (r ? "," : "") + std::string("a") + std::to_string(r);
  csv += "\n";
  for (const auto& row : raw) {
    for (std::size_t r = 0; r < l; ++r) csv += (r ? "," : "") + row[r];
    csv += "\n";
  }
  std::istringstream in(csv);
  return coforest::parse_csv(in);
}

// Random partition of n samples into k non-empty clusters (requires n ≥ k).
inline std::vector<std::uint32_t> random_partition(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<std::uint32_t> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = static_cast<std::uint32_t>(i < k ? i : std::uniform_int_distribution<std::size_t>(0, k - 1)(rng));
  std::shuffle(q.begin(), q.end(), rng);
  return q;
}

}  // namespace oracle
