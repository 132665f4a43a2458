#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "coforest/forest.hpp"
#include "oracles.hpp"

using namespace coforest;

namespace {

const double kRoot2 = std::sqrt(2.0);
const double kRootHalf = std::sqrt(0.5);

// Values a, b, c with cluster distributions [1,0], [0,1], [0.5,0.5].
ValueClusterDistributions worked_example() {
  ValueClusterDistributions vcd;
  RowMatrix m(3, 2);
  m << 1, 0, 0, 1, 0.5, 0.5;
  vcd.per_attribute.push_back(m);
  return vcd;
}

WeightedValueGraph random_graph(std::mt19937_64& rng, std::size_t o) {
  std::uniform_real_distribution<double> unif(0.0, 1.5);
  WeightedValueGraph g{0, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(o))};
  for (Eigen::Index u = 0; u < g.weights.rows(); ++u)
    for (Eigen::Index s = u + 1; s < g.weights.cols(); ++s) g.weights(u, s) = g.weights(s, u) = unif(rng);
  return g;
}

std::vector<oracle::Edge> oracle_edges(const OrderTree& t) {
  std::vector<oracle::Edge> out;
  for (const auto& e : t.edges()) out.push_back({e.u, e.s, e.weight});
  return out;
}

oracle::Matrix to_rows(const Eigen::MatrixXd& m) {
  oracle::Matrix rows(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
  return rows;
}

}  // namespace

TEST(WeightGraph, WorkedExample) {
  const auto g = build_weight_graph(worked_example(), 0);
  EXPECT_NEAR(g.weights(0, 1), kRoot2, 1e-12);
  EXPECT_NEAR(g.weights(0, 2), kRootHalf, 1e-12);
  EXPECT_NEAR(g.weights(1, 2), kRootHalf, 1e-12);
  EXPECT_TRUE(g.weights.isApprox(g.weights.transpose()));
  EXPECT_EQ(g.weights.diagonal().sum(), 0.0);
}

TEST(WeightGraph, SharedDistributionGivesZeroGraph) {
  ValueClusterDistributions vcd;
  RowMatrix m(3, 2);
  m << 0.3, 0.7, 0.3, 0.7, 0.3, 0.7;
  vcd.per_attribute.push_back(m);
  EXPECT_TRUE(build_weight_graph(vcd, 0).weights.isZero(0.0));
}

TEST(Mst, WorkedExample) {
  const auto t = minimum_spanning_tree(build_weight_graph(worked_example(), 0));
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& e : t.edges()) edges.insert({std::min(e.u, e.s), std::max(e.u, e.s)});
  EXPECT_EQ(edges, (std::set<std::pair<std::size_t, std::size_t>>{{0, 2}, {1, 2}}));
  EXPECT_NEAR(t.total_weight(), kRoot2, 1e-12);
}

TEST(Mst, TwoAndOneNodes) {
  WeightedValueGraph two{0, Eigen::MatrixXd::Zero(2, 2)};
  two.weights(0, 1) = two.weights(1, 0) = 0.4;
  const auto t = minimum_spanning_tree(two);
  ASSERT_EQ(t.edges().size(), 1u);
  EXPECT_EQ(t.edges()[0].weight, 0.4);
  const auto one = minimum_spanning_tree(WeightedValueGraph{0, Eigen::MatrixXd::Zero(1, 1)});
  EXPECT_TRUE(one.edges().empty());
  EXPECT_EQ(trace_distance_matrix(one), Eigen::MatrixXd::Zero(1, 1));
}

TEST(Mst, TiesResolveDeterministically) {
  const auto t = minimum_spanning_tree(WeightedValueGraph{0, Eigen::MatrixXd::Zero(4, 4)});
  ASSERT_EQ(t.edges().size(), 3u);
  EXPECT_EQ(t.edges()[0], (TreeEdge{0, 1, 0.0}));
  EXPECT_EQ(t.edges()[1], (TreeEdge{0, 2, 0.0}));
  EXPECT_EQ(t.edges()[2], (TreeEdge{0, 3, 0.0}));
}

TEST(Mst, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t o = 1 + trial % 6;
    const auto g = random_graph(rng, o);
    const auto t = minimum_spanning_tree(g);
    EXPECT_NEAR(t.total_weight(), oracle::min_spanning_weight_by_enumeration(to_rows(g.weights)), 1e-9);
  }
}

TEST(OrderTree, RejectsInvalidShapes) {
  EXPECT_THROW(OrderTree(0, 3, {{0, 1, 1.0}}), std::invalid_argument);
  EXPECT_THROW(OrderTree(0, 3, {{0, 1, 1.0}, {1, 0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(OrderTree(0, 2, {{0, 0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(OrderTree(0, 2, {{0, 1, -1.0}}), std::invalid_argument);
  EXPECT_THROW(OrderTree(0, 0, {}), std::invalid_argument);
}

TEST(Trace, WorkedExample) {
  const auto t = minimum_spanning_tree(build_weight_graph(worked_example(), 0));
  EXPECT_TRUE(order_trace(t, 1, 1).empty());
  const auto adjacent = order_trace(t, 0, 2);
  ASSERT_EQ(adjacent.size(), 1u);
  EXPECT_NEAR(adjacent[0], kRootHalf, 1e-12);
  auto ab = order_trace(t, 0, 1);
  auto ba = order_trace(t, 1, 0);
  std::sort(ab.begin(), ab.end());
  std::sort(ba.begin(), ba.end());
  EXPECT_EQ(ab, ba);
  ASSERT_EQ(ab.size(), 2u);
  EXPECT_NEAR(ab[0], kRootHalf, 1e-12);
  EXPECT_NEAR(ab[1], kRootHalf, 1e-12);
  EXPECT_THROW(order_trace(t, 0, 3), std::out_of_range);

  const auto d = trace_distance_matrix(t);
  EXPECT_NEAR(d(0, 1), kRoot2, 1e-12);
  EXPECT_NEAR(d(0, 2), kRootHalf, 1e-12);
  EXPECT_NEAR(d(1, 2), kRootHalf, 1e-12);
}

TEST(Trace, MatchesShortestPathOracleAndIsAMetric) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t o = 1 + trial % 8;
    const auto g = random_graph(rng, o);
    const auto t = minimum_spanning_tree(g);
    const auto d = trace_distance_matrix(t);
    const auto ref = oracle::all_pairs_shortest_paths(o, oracle_edges(t));
    for (std::size_t u = 0; u < o; ++u) {
      EXPECT_EQ(d(u, u), 0.0);
      for (std::size_t s = 0; s < o; ++s) {
        EXPECT_NEAR(d(u, s), ref[u][s], 1e-9);
        double sum = 0.0;
        for (double w : order_trace(t, u, s)) sum += w;
        EXPECT_NEAR(d(u, s), sum, 1e-12);
        EXPECT_EQ(d(u, s), d(s, u));
        EXPECT_GE(d(u, s), 0.0);
        for (std::size_t m = 0; m < o; ++m) EXPECT_LE(d(u, s), d(u, m) + d(m, s) + 1e-9);
      }
    }
  }
}

TEST(Trace, DominatesDirectNormWeights) {
  // Eq. 4 weights are norms of differences, hence a metric; any path sum is at least the direct weight.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t o = 2 + trial % 7, k = 2 + trial % 4;
    ValueClusterDistributions vcd;
    RowMatrix m(o, k);
    for (Eigen::Index u = 0; u < m.rows(); ++u) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(u, j) = unif(rng);
      m.row(u) /= m.row(u).sum();
    }
    vcd.per_attribute.push_back(m);
    const auto g = build_weight_graph(vcd, 0);
    const auto d = trace_distance_matrix(minimum_spanning_tree(g));
    for (Eigen::Index u = 0; u < d.rows(); ++u)
      for (Eigen::Index s = 0; s < d.cols(); ++s) EXPECT_GE(d(u, s), g.weights(u, s) - 1e-12);
  }
}

TEST(Line, Structure) {
  const auto a = line_structure(5, 17), b = line_structure(5, 17);
  EXPECT_EQ(a, b);
  const auto four = line_structure(4, 3);
  EXPECT_EQ(four.edges().size(), 3u);
  for (std::size_t v = 0; v < 4; ++v) EXPECT_LE(four.neighbors(v).size(), 2u);
  WeightedValueGraph two{0, Eigen::MatrixXd::Zero(2, 2)};
  two.weights(0, 1) = two.weights(1, 0) = 0.25;
  for (std::uint64_t seed = 0; seed < 8; ++seed)
    EXPECT_EQ(trace_distance_matrix(with_weights(line_structure(2, seed), two)), two.weights);
}

TEST(Line, PathTreeMatchesCumulativeLineDistances) {
  // A path-shaped tree and the line over the same order give the same distances.
  const std::vector<std::size_t> order{2, 0, 3, 1};
  WeightedValueGraph g{0, Eigen::MatrixXd::Zero(4, 4)};
  const double w[3] = {0.1, 0.4, 0.2};
  for (std::size_t i = 0; i < 3; ++i)
    g.weights(order[i], order[i + 1]) = g.weights(order[i + 1], order[i]) = w[i];
  const auto d = trace_distance_matrix(with_weights(ordered_line_structure(order), g));
  EXPECT_NEAR(d(2, 1), 0.7, 1e-12);
  EXPECT_NEAR(d(0, 1), 0.6, 1e-12);
  EXPECT_NEAR(d(2, 3), 0.5, 1e-12);
  EXPECT_THROW(ordered_line_structure(std::vector<std::size_t>{0, 0}), std::invalid_argument);
}

TEST(RandomStructure, ConnectedWithinEdgeBounds) {
  EXPECT_TRUE(random_connected_structure(1, 0).empty());
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto edges = random_connected_structure(5, seed);
    EXPECT_GE(edges.size(), 4u);
    EXPECT_LE(edges.size(), 10u);
    std::vector<oracle::Edge> e;
    for (auto [u, s] : edges) e.push_back({u, s, 1.0});
    EXPECT_TRUE(oracle::connects_all(5, e));
  }
  EXPECT_EQ(random_connected_structure(6, 4), random_connected_structure(6, 4));
}

TEST(RandomStructure, ShortestPathsMatchOracle) {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t o = 1 + seed % 7;
    const auto g = random_graph(rng, o);
    const auto edges = random_connected_structure(o, seed);
    std::vector<oracle::Edge> e;
    for (auto [u, s] : edges) e.push_back({u, s, g.weights(u, s)});
    const auto ref = oracle::all_pairs_shortest_paths(o, e);
    const auto d = shortest_path_distances(edges, g);
    for (std::size_t u = 0; u < o; ++u)
      for (std::size_t s = 0; s < o; ++s) EXPECT_NEAR(d(u, s), ref[u][s], 1e-12);
  }
}

TEST(FullyConnected, IsTheWeightMatrix) {
  const auto g = build_weight_graph(worked_example(), 0);
  EXPECT_EQ(fully_connected_distances(g), g.weights);
  EXPECT_NEAR(fully_connected_distances(g)(0, 1), kRoot2, 1e-12);
  const WeightedValueGraph zero{0, Eigen::MatrixXd::Zero(3, 3)};
  EXPECT_TRUE(fully_connected_distances(zero).isZero(0.0));
}

TEST(TwoValues, AllStructuresCoincide) {
  WeightedValueGraph g{0, Eigen::MatrixXd::Zero(2, 2)};
  g.weights(0, 1) = g.weights(1, 0) = 0.9;
  const auto mst = trace_distance_matrix(minimum_spanning_tree(g));
  EXPECT_EQ(mst, fully_connected_distances(g));
  EXPECT_EQ(mst, trace_distance_matrix(with_weights(line_structure(2, 5), g)));
  EXPECT_EQ(mst, shortest_path_distances(random_connected_structure(2, 5), g));
}
