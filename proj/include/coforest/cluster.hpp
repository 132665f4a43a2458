#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coforest/data.hpp"
#include "coforest/forest.hpp"
#include "coforest/stats.hpp"

namespace coforest {

enum class Algorithm { coforest, kmodes, cof1, cof2, cof3, cof4 };

inline constexpr std::array<Algorithm, 6> kAllAlgorithms = {
    Algorithm::coforest, Algorithm::kmodes, Algorithm::cof1, Algorithm::cof2, Algorithm::cof3, Algorithm::cof4};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::coforest: return "coforest";
    case Algorithm::kmodes: return "kmodes";
    case Algorithm::cof1: return "cof1";
    case Algorithm::cof2: return "cof2";
    case Algorithm::cof3: return "cof3";
    case Algorithm::cof4: return "cof4";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

struct TraceEntry {
  std::size_t iteration = 0;   // 1-based count of partition updates
  double objective = 0.0;      // L after this update
  bool forest_rebuilt = false;  // first update under a freshly built structure

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// State handed to an observer after every recorded iteration: the partition
/// just produced and the value distances it was scored under.
struct IterationSnapshot {
  const TraceEntry& entry;
  const Partition& partition;
  std::span<const DistanceMatrix> distances;
};

using IterationObserver = std::function<void(const IterationSnapshot&)>;

struct ClusteringConfig {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_inner = 100;
  std::size_t max_outer = 50;
  Algorithm variant = Algorithm::coforest;
  double norm_p = 2.0;
  IterationObserver observer;  // optional
};

struct ClusteringResult {
  Algorithm algorithm = Algorithm::coforest;
  std::uint64_t seed = 0;
  Partition partition;
  std::optional<OrderForest> forest;     // tree-based variants only
  std::vector<DistanceMatrix> distances;  // value distances in force at the end; empty for k-modes
  std::vector<TraceEntry> objective_trace;
  std::size_t inner_iterations = 0;
  std::size_t outer_iterations = 0;
  bool converged = false;

  [[nodiscard]] double final_objective() const {
    return objective_trace.empty() ? 0.0 : objective_trace.back().objective;
  }
};

/// γ(v_{r,u}, C_j) = p_{j,r}ᵀ d_{r,u} for every (attribute, value, cluster),
/// laid out so a sample's k cluster distances accumulate over contiguous rows.
class ClusterDistanceTable {
 public:
  ClusterDistanceTable(const ClusterValueDistributions& cvd, std::span<const DistanceMatrix> distances)
      : k_(cvd.k()) {
    const std::size_t l = cvd.per_attribute.size();
    if (distances.size() != l) throw std::invalid_argument("distance structure does not cover every attribute");
    offsets_.resize(l + 1, 0);
    for (std::size_t r = 0; r < l; ++r) {
      const auto o = static_cast<std::size_t>(cvd.per_attribute[r].cols());
      if (static_cast<std::size_t>(distances[r].rows()) != o || static_cast<std::size_t>(distances[r].cols()) != o)
        throw std::invalid_argument("distance matrix for attribute " + std::to_string(r) +
                                    " does not match its cardinality");
      offsets_[r + 1] = offsets_[r] + o;
    }
    table_.assign(offsets_[l] * k_, 0.0);
    for (std::size_t r = 0; r < l; ++r) {
      // (o_r × o_r) · (o_r × k): column j is d_{r,·} · p_{j,r}
      const Eigen::MatrixXd g = distances[r] * cvd.per_attribute[r].transpose();
      for (Eigen::Index u = 0; u < g.rows(); ++u)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
          table_[(offsets_[r] + static_cast<std::size_t>(u)) * k_ + static_cast<std::size_t>(j)] = g(u, j);
    }
  }

  [[nodiscard]] std::size_t k() const noexcept { return k_; }

  [[nodiscard]] double gamma(std::size_t r, std::size_t u, std::size_t j) const {
    return table_[(offsets_[r] + u) * k_ + j];
  }

  /// Γ(x, C_j) for all j at once.
  void sample_distances(std::span<const ValueIndex> x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t r = 0; r < x.size(); ++r) {
      const double* g = table_.data() + (offsets_[r] + x[r]) * k_;
      for (std::size_t j = 0; j < k_; ++j) out[j] += g[j];
    }
  }

  [[nodiscard]] double sample_distance(std::span<const ValueIndex> x, std::size_t j) const {
    double acc = 0.0;
    for (std::size_t r = 0; r < x.size(); ++r) acc += table_[(offsets_[r] + x[r]) * k_ + j];
    return acc;
  }

 private:
  std::size_t k_;
  std::vector<std::size_t> offsets_;
  std::vector<double> table_;
};

namespace detail {

// Refills each empty cluster with the sample farthest from its own cluster,
// drawn from clusters that still have at least two members. Lowest sample
// index wins ties; empty clusters are visited in index order.
template <typename DistanceFn>
void repair_empty_clusters(std::vector<ClusterIndex>& assignment, std::size_t k, DistanceFn&& distance_to) {
  std::vector<std::size_t> sizes(k, 0);
  for (ClusterIndex c : assignment) ++sizes[c];
  for (std::size_t j = 0; j < k; ++j) {
    if (sizes[j] != 0) continue;
    std::size_t best = assignment.size();
    double best_dist = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (sizes[assignment[i]] < 2) continue;
      const double d = distance_to(i, assignment[i]);
      if (d > best_dist) {
        best_dist = d;
        best = i;
      }
    }
    if (best == assignment.size()) throw std::logic_error("cannot repair empty cluster: fewer samples than clusters");
    --sizes[assignment[best]];
    assignment[best] = static_cast<ClusterIndex>(j);
    ++sizes[j];
  }
}

inline std::vector<ClusterIndex> argmin_assignment(const CategoricalDataset& ds, const ClusterDistanceTable& table) {
  const std::size_t k = table.k();
  std::vector<ClusterIndex> out(ds.num_samples());
  std::vector<double> scores(k);
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    table.sample_distances(ds.row(i), scores);
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (scores[j] < scores[best]) best = j;
    out[i] = static_cast<ClusterIndex>(best);
  }
  return out;
}

inline double table_objective(const CategoricalDataset& ds, const Partition& part, const ClusterDistanceTable& table) {
  double total = 0.0;
  for (std::size_t i = 0; i < ds.num_samples(); ++i) total += table.sample_distance(ds.row(i), part[i]);
  return total;
}

}  // namespace detail

/// Batch reassignment under frozen statistics: every sample moves to the
/// cluster with the smallest Γ, lowest index on ties. Clusters may come out
/// empty; the engines repair them.
inline Partition assign_step(const CategoricalDataset& ds, const ClusterValueDistributions& stats,
                             std::span<const DistanceMatrix> distances) {
  ClusterDistanceTable table(stats, distances);
  return Partition(detail::argmin_assignment(ds, table), stats.k());
}

/// L(Q, M): the summed distance of every sample to its own cluster, with the
/// cluster statistics taken from `part` itself.
inline double objective(const CategoricalDataset& ds, const Partition& part, std::span<const DistanceMatrix> distances) {
  const auto stats = cluster_value_distributions(ds, part);
  return detail::table_objective(ds, part, ClusterDistanceTable(stats, distances));
}

inline double objective(const CategoricalDataset& ds, const Partition& part, const OrderForest& forest) {
  return objective(ds, part, forest.distances);
}

inline OrderForest reconstruct_forest(const CategoricalDataset& ds, const Partition& part, double p = 2.0) {
  const auto counts = count_value_cluster(ds, part);
  for (std::size_t j = 0; j < counts.cluster_sizes.size(); ++j) {
    if (counts.cluster_sizes[j] == 0) throw std::domain_error("cluster " + std::to_string(j) + " is empty");
  }
  return build_order_forest(value_cluster_distributions(counts), p);
}

namespace detail {

inline std::size_t hamming(std::span<const ValueIndex> a, std::span<const ValueIndex> b) {
  std::size_t d = 0;
  for (std::size_t r = 0; r < a.size(); ++r) d += a[r] != b[r];
  return d;
}

inline void check_k(const CategoricalDataset& ds, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (k > ds.num_samples())
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the sample count " +
                                std::to_string(ds.num_samples()));
}

}  // namespace detail

/// Lloyd-style k-modes with Hamming distance. Initial modes are k distinct
/// rows drawn without replacement; duplicates are admitted only when the data
/// has fewer than k distinct rows.
inline ClusteringResult kmodes(const CategoricalDataset& ds, std::size_t k, std::uint64_t seed,
                               std::size_t max_iter = 100) {
  detail::check_k(ds, k);
  if (max_iter == 0) throw std::invalid_argument("iteration cap must be at least 1");
  const std::size_t n = ds.num_samples();
  const std::size_t l = ds.num_attributes();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::size_t> seeds;
  std::vector<bool> taken(n, false);
  for (std::size_t idx = 0; idx < n && seeds.size() < k; ++idx) {
    const std::size_t i = order[idx];
    bool duplicate = false;
    for (std::size_t s : seeds) {
      if (detail::hamming(ds.row(i), ds.row(s)) == 0) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      seeds.push_back(i);
      taken[i] = true;
    }
  }
  for (std::size_t idx = 0; idx < n && seeds.size() < k; ++idx) {
    if (!taken[order[idx]]) seeds.push_back(order[idx]);
  }

  std::vector<ValueIndex> modes(k * l);
  for (std::size_t j = 0; j < k; ++j) {
    auto row = ds.row(seeds[j]);
    std::copy(row.begin(), row.end(), modes.begin() + static_cast<std::ptrdiff_t>(j * l));
  }
  auto mode = [&](std::size_t j) { return std::span<const ValueIndex>(modes.data() + j * l, l); };

  auto assign = [&]() {
    std::vector<ClusterIndex> q(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      std::size_t best_d = detail::hamming(ds.row(i), mode(0));
      for (std::size_t j = 1; j < k; ++j) {
        const std::size_t d = detail::hamming(ds.row(i), mode(j));
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      q[i] = static_cast<ClusterIndex>(best);
    }
    std::vector<std::size_t> sizes(k, 0);
    for (ClusterIndex c : q) ++sizes[c];
    if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end()) {
      auto snapshot = modes;
      detail::repair_empty_clusters(q, k, [&](std::size_t i, ClusterIndex c) {
        return static_cast<double>(detail::hamming(ds.row(i), {snapshot.data() + c * l, l}));
      });
      // A refilled cluster takes its new member as mode.
      for (std::size_t j = 0; j < k; ++j) {
        if (sizes[j] != 0) continue;
        for (std::size_t i = 0; i < n; ++i) {
          if (q[i] == j) {
            auto row = ds.row(i);
            std::copy(row.begin(), row.end(), modes.begin() + static_cast<std::ptrdiff_t>(j * l));
            break;
          }
        }
      }
    }
    return Partition(std::move(q), k);
  };

  auto update_modes = [&](const Partition& part) {
    const auto counts = count_value_cluster(ds, part);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t r = 0; r < l; ++r) {
        const auto& c = counts.per_attribute[r];
        Eigen::Index best = 0;
        for (Eigen::Index u = 1; u < c.rows(); ++u)
          if (c(u, static_cast<Eigen::Index>(j)) > c(best, static_cast<Eigen::Index>(j))) best = u;
        modes[j * l + r] = static_cast<ValueIndex>(best);
      }
    }
  };

  auto cost = [&](const Partition& part) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += static_cast<double>(detail::hamming(ds.row(i), mode(part[i])));
    return total;
  };

  Partition current = assign();
  ClusteringResult result{
      .algorithm = Algorithm::kmodes, .seed = seed, .partition = current, .forest = {}, .distances = {}, .objective_trace = {}};
  for (std::size_t it = 1; it <= max_iter; ++it) {
    update_modes(current);
    Partition next = assign();
    result.objective_trace.push_back({it, cost(next), false});
    result.inner_iterations = it;
    const bool same = next == current;
    current = std::move(next);
    if (same) {
      result.converged = true;
      break;
    }
  }
  result.partition = std::move(current);
  return result;
}

namespace detail {

struct Structure {
  std::optional<OrderForest> forest;
  std::vector<DistanceMatrix> distances;
};

using StructureBuilder = std::function<Structure(const Partition&)>;

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Alternates partition updates under a frozen structure (inner loop) with
// structure rebuilds from the converged partition (outer loop). Stops when an
// inner loop converges back to the partition the structure was built from.
inline ClusteringResult alternate(const CategoricalDataset& ds, const ClusteringConfig& config, Partition initial,
                                  const StructureBuilder& build, std::size_t max_outer) {
  if (config.max_inner == 0 || max_outer == 0) throw std::invalid_argument("iteration caps must be at least 1");
  const std::size_t k = config.k;
  ClusteringResult result{.algorithm = config.variant,
                          .seed = config.seed,
                          .partition = initial,
                          .forest = {},
                          .distances = {},
                          .objective_trace = {}};

  Partition anchor = std::move(initial);
  Structure structure = build(anchor);
  result.outer_iterations = 1;
  std::size_t iteration = 0;

  while (true) {
    Partition current = anchor;
    auto table = std::make_unique<ClusterDistanceTable>(cluster_value_distributions(ds, current), structure.distances);
    bool inner_converged = false;
    for (std::size_t it = 0; it < config.max_inner; ++it) {
      auto q = argmin_assignment(ds, *table);
      repair_empty_clusters(q, k, [&](std::size_t i, ClusterIndex c) { return table->sample_distance(ds.row(i), c); });
      Partition next(std::move(q), k);
      auto next_table =
          std::make_unique<ClusterDistanceTable>(cluster_value_distributions(ds, next), structure.distances);
      ++iteration;
      result.objective_trace.push_back({iteration, table_objective(ds, next, *next_table), it == 0});
      if (config.observer) config.observer({result.objective_trace.back(), next, structure.distances});
      const bool same = next == current;
      current = std::move(next);
      table = std::move(next_table);
      if (same) {
        inner_converged = true;
        break;
      }
    }
    result.inner_iterations = iteration;
    if (inner_converged && current == anchor) {
      result.converged = true;
      break;
    }
    anchor = std::move(current);
    if (result.outer_iterations >= max_outer) break;
    structure = build(anchor);
    ++result.outer_iterations;
  }
  result.partition = std::move(anchor);
  result.forest = std::move(structure.forest);
  result.distances = std::move(structure.distances);
  return result;
}

inline StructureBuilder structure_builder(const CategoricalDataset& ds, const ClusteringConfig& config) {
  const double p = config.norm_p;
  switch (config.variant) {
    case Algorithm::coforest:
    case Algorithm::cof1:
      return [&ds, p](const Partition& part) {
        Structure s{reconstruct_forest(ds, part, p), {}};
        s.distances = s.forest->distances;
        return s;
      };
    case Algorithm::cof2:
      return [&ds, p, seed = config.seed](const Partition& part) {
        const auto vcd = value_cluster_distributions(ds, part);
        OrderForest forest;
        for (std::size_t r = 0; r < ds.num_attributes(); ++r) {
          const auto g = build_weight_graph(vcd, r, p);
          forest.trees.push_back(with_weights(line_structure(g.nodes(), mix_seed(seed, r), r), g));
          forest.distances.push_back(trace_distance_matrix(forest.trees.back()));
        }
        Structure s{std::move(forest), {}};
        s.distances = s.forest->distances;
        return s;
      };
    case Algorithm::cof3:
      return [&ds, p](const Partition& part) {
        const auto vcd = value_cluster_distributions(ds, part);
        Structure s;
        for (std::size_t r = 0; r < ds.num_attributes(); ++r)
          s.distances.push_back(fully_connected_distances(build_weight_graph(vcd, r, p)));
        return s;
      };
    case Algorithm::cof4:
      return [&ds](const Partition&) {
        Structure s;
        for (std::size_t r = 0; r < ds.num_attributes(); ++r)
          s.distances.push_back(fully_connected_distances(hamming_weight_graph(r, ds.cardinality(r))));
        return s;
      };
    case Algorithm::kmodes: break;
  }
  throw std::invalid_argument("variant has no distance structure");
}

}  // namespace detail

/// Joint learning of the partition and the order forest, initialized by k-modes.
inline ClusteringResult coforest(const CategoricalDataset& ds, ClusteringConfig config) {
  detail::check_k(ds, config.k);
  config.variant = Algorithm::coforest;
  auto init = kmodes(ds, config.k, config.seed, config.max_inner);
  return detail::alternate(ds, config, std::move(init.partition), detail::structure_builder(ds, config),
                           config.max_outer);
}

/// The single-construction ablations: cof1 builds the order forest once; cof2
/// swaps each tree for a random line; cof3 uses the direct weights of the
/// complete graph; cof4 is cof3 with Hamming weights.
inline ClusteringResult ablation_variant(const CategoricalDataset& ds, const ClusteringConfig& config) {
  if (config.variant == Algorithm::coforest || config.variant == Algorithm::kmodes)
    throw std::invalid_argument("not an ablation variant: " + std::string(to_string(config.variant)));
  detail::check_k(ds, config.k);
  auto init = kmodes(ds, config.k, config.seed, config.max_inner);
  return detail::alternate(ds, config, std::move(init.partition), detail::structure_builder(ds, config), 1);
}

/// Inner-loop refinement from a given partition under fixed value distances.
inline ClusteringResult refine_with_distances(const CategoricalDataset& ds, const ClusteringConfig& config,
                                              Partition initial, std::vector<DistanceMatrix> distances) {
  detail::check_k(ds, config.k);
  auto fixed = [d = std::move(distances)](const Partition&) { return detail::Structure{std::nullopt, d}; };
  return detail::alternate(ds, config, std::move(initial), fixed, 1);
}

/// Dispatches on `config.variant`.
inline ClusteringResult run_clustering(const CategoricalDataset& ds, const ClusteringConfig& config) {
  switch (config.variant) {
    case Algorithm::kmodes: {
      auto r = kmodes(ds, config.k, config.seed, config.max_inner);
      return r;
    }
    case Algorithm::coforest: return coforest(ds, config);
    default: return ablation_variant(ds, config);
  }
}

}  // namespace coforest
