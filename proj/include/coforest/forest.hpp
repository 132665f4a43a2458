#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coforest/stats.hpp"

namespace coforest {

/// Symmetric distance matrix over the o_r values of one attribute.
using DistanceMatrix = Eigen::MatrixXd;

/// Complete graph over the values of attribute `attribute`; entry (u,s) is the
/// edge weight w_{r,u,s}.
struct WeightedValueGraph {
  std::size_t attribute = 0;
  Eigen::MatrixXd weights;

  [[nodiscard]] std::size_t nodes() const noexcept { return static_cast<std::size_t>(weights.rows()); }
};

struct TreeEdge {
  std::size_t u = 0;
  std::size_t s = 0;
  double weight = 0.0;

  friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

/// A spanning tree over the values of one attribute. Construction validates
/// the tree shape, so every OrderTree is connected, acyclic and has exactly
/// nodes-1 edges with non-negative weights.
class OrderTree {
 public:
  struct Neighbor {
    std::size_t node;
    double weight;
  };

  OrderTree(std::size_t attribute, std::size_t nodes, std::vector<TreeEdge> edges)
      : attribute_(attribute), edges_(std::move(edges)), adjacency_(nodes) {
    if (nodes == 0) throw std::invalid_argument("order tree needs at least one node");
    if (edges_.size() != nodes - 1)
      throw std::invalid_argument("order tree over " + std::to_string(nodes) + " nodes needs " +
                                  std::to_string(nodes - 1) + " edges, got " + std::to_string(edges_.size()));
    for (const auto& e : edges_) {
      if (e.u >= nodes || e.s >= nodes || e.u == e.s) throw std::invalid_argument("invalid tree edge");
      if (!(e.weight >= 0.0)) throw std::invalid_argument("tree edge weight must be non-negative");
      adjacency_[e.u].push_back({e.s, e.weight});
      adjacency_[e.s].push_back({e.u, e.weight});
    }
    // nodes-1 edges plus connectivity implies acyclic.
    std::vector<bool> seen(nodes, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (const auto& nb : adjacency_[v]) {
        if (!seen[nb.node]) {
          seen[nb.node] = true;
          ++reached;
          stack.push_back(nb.node);
        }
      }
    }
    if (reached != nodes) throw std::invalid_argument("order tree edges do not connect all nodes");
  }

  [[nodiscard]] std::size_t attribute() const noexcept { return attribute_; }
  [[nodiscard]] std::size_t nodes() const noexcept { return adjacency_.size(); }
  [[nodiscard]] const std::vector<TreeEdge>& edges() const noexcept { return edges_; }
  [[nodiscard]] std::span<const Neighbor> neighbors(std::size_t v) const { return adjacency_.at(v); }

  [[nodiscard]] double total_weight() const noexcept {
    double total = 0.0;
    for (const auto& e : edges_) total += e.weight;
    return total;
  }

  friend bool operator==(const OrderTree& a, const OrderTree& b) {
    return a.attribute_ == b.attribute_ && a.nodes() == b.nodes() && a.edges_ == b.edges_;
  }

 private:
  std::size_t attribute_;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

/// One order tree per attribute plus the trace-distance matrices derived from them.
struct OrderForest {
  std::vector<OrderTree> trees;
  std::vector<DistanceMatrix> distances;

  [[nodiscard]] std::size_t size() const noexcept { return trees.size(); }

  friend bool operator==(const OrderForest& a, const OrderForest& b) {
    if (a.trees != b.trees || a.distances.size() != b.distances.size()) return false;
    for (std::size_t r = 0; r < a.distances.size(); ++r) {
      if (a.distances[r].rows() != b.distances[r].rows() || a.distances[r] != b.distances[r]) return false;
    }
    return true;
  }
};

inline WeightedValueGraph build_weight_graph(const ValueClusterDistributions& vcd, std::size_t r,
                                             double p = 2.0) {
  const auto& m = vcd.per_attribute.at(r);
  const auto o = static_cast<std::size_t>(m.rows());
  WeightedValueGraph g{r, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(o))};
  for (std::size_t u = 0; u < o; ++u) {
    for (std::size_t s = u + 1; s < o; ++s) {
      const double w = weight(vcd.row(r, u), vcd.row(r, s), p);
      g.weights(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(s)) = w;
      g.weights(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(u)) = w;
    }
  }
  return g;
}

/// Hamming weights: 0 on the diagonal, 1 between any two distinct values.
inline WeightedValueGraph hamming_weight_graph(std::size_t attribute, std::size_t nodes) {
  const auto o = static_cast<Eigen::Index>(nodes);
  return {attribute, Eigen::MatrixXd::Ones(o, o) - Eigen::MatrixXd::Identity(o, o)};
}

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace detail

/// Kruskal. Candidate edges are ordered by (weight, smaller endpoint, larger
/// endpoint) so ties always resolve the same way.
inline OrderTree minimum_spanning_tree(const WeightedValueGraph& g) {
  const std::size_t o = g.nodes();
  if (o == 0) throw std::invalid_argument("cannot span an empty graph");
  std::vector<TreeEdge> candidates;
  candidates.reserve(o * (o - 1) / 2);
  for (std::size_t u = 0; u < o; ++u) {
    for (std::size_t s = u + 1; s < o; ++s) {
      candidates.push_back({u, s, g.weights(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(s))});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const TreeEdge& a, const TreeEdge& b) {
    return std::tie(a.weight, a.u, a.s) < std::tie(b.weight, b.u, b.s);
  });
  detail::DisjointSets sets(o);
  std::vector<TreeEdge> chosen;
  chosen.reserve(o - 1);
  for (const auto& e : candidates) {
    if (chosen.size() == o - 1) break;
    if (sets.unite(e.u, e.s)) chosen.push_back(e);
  }
  return OrderTree(g.attribute, o, std::move(chosen));
}

namespace detail {

// Walks the tree from `source`, recording each node's parent and the weight
// of the edge to it. One O(o) traversal.
inline void root_tree(const OrderTree& t, std::size_t source, std::vector<std::size_t>& parent,
                      std::vector<double>& parent_weight, std::vector<std::size_t>& order) {
  const std::size_t o = t.nodes();
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  parent.assign(o, kNone);
  parent_weight.assign(o, 0.0);
  order.clear();
  order.push_back(source);
  parent[source] = source;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const std::size_t v = order[head];
    for (const auto& nb : t.neighbors(v)) {
      if (parent[nb.node] == kNone) {
        parent[nb.node] = v;
        parent_weight[nb.node] = nb.weight;
        order.push_back(nb.node);
      }
    }
  }
}

}  // namespace detail

/// Weights of the edges on the unique tree path between u and s, listed from
/// s towards u. Empty when u == s.
inline std::vector<double> order_trace(const OrderTree& t, std::size_t u, std::size_t s) {
  if (u >= t.nodes() || s >= t.nodes()) throw std::out_of_range("node index out of range");
  std::vector<std::size_t> parent, order;
  std::vector<double> parent_weight;
  detail::root_tree(t, u, parent, parent_weight, order);
  std::vector<double> trace;
  for (std::size_t v = s; v != u; v = parent[v]) trace.push_back(parent_weight[v]);
  return trace;
}

/// All-pairs path lengths on the tree: one breadth-first traversal per source.
inline DistanceMatrix trace_distance_matrix(const OrderTree& t) {
  const std::size_t o = t.nodes();
  DistanceMatrix d = DistanceMatrix::Zero(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(o));
  std::vector<std::size_t> parent, order;
  std::vector<double> parent_weight;
  for (std::size_t src = 0; src < o; ++src) {
    detail::root_tree(t, src, parent, parent_weight, order);
    const auto row = static_cast<Eigen::Index>(src);
    for (std::size_t idx = 1; idx < order.size(); ++idx) {
      const std::size_t v = order[idx];
      d(row, static_cast<Eigen::Index>(v)) = d(row, static_cast<Eigen::Index>(parent[v])) + parent_weight[v];
    }
  }
  // Both directions are summed in different orders; pin exact symmetry.
  for (Eigen::Index a = 0; a < d.rows(); ++a)
    for (Eigen::Index b = a + 1; b < d.cols(); ++b) d(b, a) = d(a, b);
  return d;
}

/// A path over a seeded random permutation of the nodes, with zero weights.
/// Use `with_weights` to take the weights from a weight graph.
inline OrderTree line_structure(std::size_t nodes, std::uint64_t seed, std::size_t attribute = 0) {
  if (nodes == 0) throw std::invalid_argument("line structure needs at least one node");
  std::vector<std::size_t> perm(nodes);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<TreeEdge> edges;
  for (std::size_t i = 0; i + 1 < nodes; ++i) edges.push_back({perm[i], perm[i + 1], 0.0});
  return OrderTree(attribute, nodes, std::move(edges));
}

/// A path over a caller-given value ordering (a semantic line graph).
inline OrderTree ordered_line_structure(std::span<const std::size_t> ordering, std::size_t attribute = 0) {
  std::vector<bool> seen(ordering.size(), false);
  for (std::size_t v : ordering) {
    if (v >= ordering.size() || seen[v]) throw std::invalid_argument("ordering is not a permutation");
    seen[v] = true;
  }
  std::vector<TreeEdge> edges;
  for (std::size_t i = 0; i + 1 < ordering.size(); ++i) edges.push_back({ordering[i], ordering[i + 1], 0.0});
  return OrderTree(attribute, ordering.size(), std::move(edges));
}

/// Same topology as `t`, each edge weighted by the graph entry it connects.
inline OrderTree with_weights(const OrderTree& t, const WeightedValueGraph& g) {
  if (g.nodes() != t.nodes()) throw std::invalid_argument("graph and tree sizes differ");
  std::vector<TreeEdge> edges = t.edges();
  for (auto& e : edges) e.weight = g.weights(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.s));
  return OrderTree(t.attribute(), t.nodes(), std::move(edges));
}

using GraphEdges = std::vector<std::pair<std::size_t, std::size_t>>;

/// Random connected graph: a random recursive spanning tree over a shuffled
/// node order, plus every remaining pair independently with probability 1/2.
/// Edges are returned with u < s, sorted.
inline GraphEdges random_connected_structure(std::size_t nodes, std::uint64_t seed) {
  if (nodes == 0) throw std::invalid_argument("random structure needs at least one node");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(nodes);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<bool>> present(nodes, std::vector<bool>(nodes, false));
  for (std::size_t i = 1; i < nodes; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::size_t a = perm[i];
    std::size_t b = perm[pick(rng)];
    present[a][b] = present[b][a] = true;
  }
  std::bernoulli_distribution coin(0.5);
  GraphEdges edges;
  for (std::size_t u = 0; u < nodes; ++u) {
    for (std::size_t s = u + 1; s < nodes; ++s) {
      if (!present[u][s] && coin(rng)) present[u][s] = present[s][u] = true;
      if (present[u][s]) edges.emplace_back(u, s);
    }
  }
  return edges;
}

/// Shortest-path distances (Floyd-Warshall) over the given edge set, with
/// edge lengths taken from the weight graph. Unreachable pairs are infinite.
inline DistanceMatrix shortest_path_distances(const GraphEdges& edges, const WeightedValueGraph& g) {
  const auto o = static_cast<Eigen::Index>(g.nodes());
  DistanceMatrix d = DistanceMatrix::Constant(o, o, std::numeric_limits<double>::infinity());
  d.diagonal().setZero();
  for (const auto& [u, s] : edges) {
    const auto a = static_cast<Eigen::Index>(u);
    const auto b = static_cast<Eigen::Index>(s);
    d(a, b) = d(b, a) = std::min(d(a, b), g.weights(a, b));
  }
  for (Eigen::Index m = 0; m < o; ++m)
    for (Eigen::Index a = 0; a < o; ++a)
      for (Eigen::Index b = 0; b < o; ++b)
        if (d(a, m) + d(m, b) < d(a, b)) d(a, b) = d(a, m) + d(m, b);
  return d;
}

/// Direct pairwise weights used as distances.
inline DistanceMatrix fully_connected_distances(const WeightedValueGraph& g) { return g.weights; }

/// Order tree plus trace distances for every attribute.
inline OrderForest build_order_forest(const ValueClusterDistributions& vcd, double p = 2.0) {
  OrderForest forest;
  forest.trees.reserve(vcd.per_attribute.size());
  forest.distances.reserve(vcd.per_attribute.size());
  for (std::size_t r = 0; r < vcd.per_attribute.size(); ++r) {
    forest.trees.push_back(minimum_spanning_tree(build_weight_graph(vcd, r, p)));
    forest.distances.push_back(trace_distance_matrix(forest.trees.back()));
  }
  return forest;
}

}  // namespace coforest
