#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "coforest/cluster.hpp"
#include "coforest/parallel.hpp"

namespace coforest {

/// Counts of (predicted cluster, true class) pairs. Both label sets are
/// compacted to 0..k-1 in first-appearance order.
struct ConfusionMatrix {
  std::vector<std::vector<std::size_t>> counts;  // k_pred × k_true
  std::size_t total = 0;

  [[nodiscard]] std::size_t rows() const noexcept { return counts.size(); }
  [[nodiscard]] std::size_t cols() const noexcept { return counts.empty() ? 0 : counts.front().size(); }
  [[nodiscard]] std::vector<std::size_t> row_sums() const {
    std::vector<std::size_t> s(rows(), 0);
    for (std::size_t a = 0; a < rows(); ++a) s[a] = std::accumulate(counts[a].begin(), counts[a].end(), std::size_t{0});
    return s;
  }
  [[nodiscard]] std::vector<std::size_t> col_sums() const {
    std::vector<std::size_t> s(cols(), 0);
    for (const auto& row : counts)
      for (std::size_t b = 0; b < row.size(); ++b) s[b] += row[b];
    return s;
  }
};

namespace detail {
inline std::vector<std::size_t> compact_labels(std::span<const std::uint32_t> labels, std::size_t& distinct) {
  std::unordered_map<std::uint32_t, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (auto v : labels) out.push_back(ids.try_emplace(v, ids.size()).first->second);
  distinct = ids.size();
  return out;
}
}  // namespace detail

inline ConfusionMatrix confusion_matrix(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("label vectors differ in length: " + std::to_string(pred.size()) + " vs " +
                                std::to_string(truth.size()));
  if (pred.empty()) throw std::invalid_argument("label vectors are empty");
  std::size_t kp = 0, kt = 0;
  auto p = detail::compact_labels(pred, kp);
  auto t = detail::compact_labels(truth, kt);
  ConfusionMatrix m{std::vector<std::vector<std::size_t>>(kp, std::vector<std::size_t>(kt, 0)), pred.size()};
  for (std::size_t i = 0; i < p.size(); ++i) ++m.counts[p[i]][t[i]];
  return m;
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(n^3) with row/column potentials). Returns the column matched to each row.
inline std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost)
    if (row.size() != n) throw std::invalid_argument("cost matrix must be square");
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based internally; column 0 is a sentinel.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

/// Fraction of samples matched under the best one-to-one mapping of clusters
/// to classes. Unequal cluster and class counts are padded with zeros.
inline double clustering_accuracy(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  const auto m = confusion_matrix(pred, truth);
  const std::size_t size = std::max(m.rows(), m.cols());
  std::vector<std::vector<double>> cost(size, std::vector<double>(size, 0.0));
  for (std::size_t a = 0; a < m.rows(); ++a)
    for (std::size_t b = 0; b < m.cols(); ++b) cost[a][b] = -static_cast<double>(m.counts[a][b]);
  const auto match = hungarian(cost);
  std::size_t matched = 0;
  for (std::size_t a = 0; a < m.rows(); ++a)
    if (match[a] < m.cols()) matched += m.counts[a][match[a]];
  return static_cast<double>(matched) / static_cast<double>(m.total);
}

namespace detail {
inline double pairs(std::size_t x) { return 0.5 * static_cast<double>(x) * (static_cast<double>(x) - 1.0); }
}  // namespace detail

/// Pair-counting Rand index corrected for chance. Returns 1 when both
/// partitions are the same trivial partition (the correction is 0/0 there).
inline double adjusted_rand_index(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  const auto m = confusion_matrix(pred, truth);
  if (m.total < 2) throw std::invalid_argument("adjusted Rand index needs at least two samples");
  double index = 0.0;
  for (const auto& row : m.counts)
    for (std::size_t c : row) index += detail::pairs(c);
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t a : m.row_sums()) sum_a += detail::pairs(a);
  for (std::size_t b : m.col_sums()) sum_b += detail::pairs(b);
  const double expected = sum_a * sum_b / detail::pairs(m.total);
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

/// Mutual information over the arithmetic mean of the two entropies
/// (0·log 0 = 0). Two constant labelings score 1.
inline double normalized_mutual_information(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  const auto m = confusion_matrix(pred, truth);
  const double n = static_cast<double>(m.total);
  auto entropy = [n](const std::vector<std::size_t>& sums) {
    double h = 0.0;
    for (std::size_t s : sums)
      if (s > 0) h -= (s / n) * std::log(s / n);
    return h;
  };
  const auto rows = m.row_sums();
  const auto cols = m.col_sums();
  const double ha = entropy(rows);
  const double hb = entropy(cols);
  if (ha + hb == 0.0) return 1.0;
  double mi = 0.0;
  for (std::size_t a = 0; a < m.rows(); ++a) {
    for (std::size_t b = 0; b < m.cols(); ++b) {
      const double c = static_cast<double>(m.counts[a][b]);
      if (c > 0) mi += (c / n) * std::log(n * c / (static_cast<double>(rows[a]) * static_cast<double>(cols[b])));
    }
  }
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

struct MetricScores {
  double ca = 0.0;
  double ari = 0.0;
  double nmi = 0.0;
};

inline MetricScores evaluate(std::span<const std::uint32_t> pred, std::span<const std::uint32_t> truth) {
  return {clustering_accuracy(pred, truth), adjusted_rand_index(pred, truth), normalized_mutual_information(pred, truth)};
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (divisor R)
};

inline MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("no values to aggregate");
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

/// 1-based ranks, best (largest) first; tied values share the mean of their ranks.
inline std::vector<double> descending_ranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(values.size(), 0.0);
  for (std::size_t start = 0; start < idx.size();) {
    std::size_t end = start + 1;
    while (end < idx.size() && values[idx[end]] == values[idx[start]]) ++end;
    const double shared = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t p = start; p < end; ++p) ranks[idx[p]] = shared;
    start = end;
  }
  return ranks;
}

struct BenchmarkDataset {
  std::string name;
  std::shared_ptr<const CategoricalDataset> data;
  std::size_t k_star = 0;  // 0: use the number of label classes
};

struct RunRecord {
  std::uint64_t seed = 0;
  MetricScores scores;
  double objective = 0.0;
  bool converged = false;
  std::size_t inner_iterations = 0;
  std::size_t outer_iterations = 0;
};

struct BenchmarkCell {
  std::size_t dataset = 0;
  std::size_t algorithm = 0;  // position in BenchmarkReport::algorithms
  std::vector<RunRecord> runs;
  MeanStd ca, ari, nmi;
};

struct BenchmarkReport {
  std::vector<std::string> datasets;
  std::vector<Algorithm> algorithms;
  std::size_t restarts = 0;
  std::uint64_t base_seed = 0;
  std::vector<BenchmarkCell> cells;  // dataset-major
  std::vector<double> rank_ca, rank_ari, rank_nmi;  // average rank per algorithm

  [[nodiscard]] const BenchmarkCell& cell(std::size_t d, std::size_t a) const {
    return cells.at(d * algorithms.size() + a);
  }
};

struct BenchmarkOptions {
  std::size_t max_inner = 100;
  std::size_t max_outer = 50;
  std::size_t jobs = 1;
  /// Optional per-run hook: (dataset index, algorithm index, seed) -> observer.
  std::function<IterationObserver(std::size_t, std::size_t, std::uint64_t)> observer_for;
};

/// Runs every algorithm `restarts` times on every dataset with seeds
/// base_seed..base_seed+restarts-1 and k = k*. Runs may execute concurrently;
/// the report does not depend on completion order.
inline BenchmarkReport run_benchmark(const std::vector<BenchmarkDataset>& datasets,
                                     const std::vector<Algorithm>& algorithms, std::size_t restarts,
                                     std::uint64_t base_seed, const BenchmarkOptions& options = {}) {
  if (restarts == 0) throw std::invalid_argument("restarts must be at least 1");
  if (algorithms.empty()) throw std::invalid_argument("no algorithms to benchmark");
  for (const auto& d : datasets) {
    if (!d.data || !d.data->has_labels()) throw DataError("dataset '" + d.name + "' has no ground-truth labels");
  }
  BenchmarkReport report;
  report.algorithms = algorithms;
  report.restarts = restarts;
  report.base_seed = base_seed;
  for (const auto& d : datasets) report.datasets.push_back(d.name);

  const std::size_t A = algorithms.size();
  report.cells.resize(datasets.size() * A);
  for (std::size_t d = 0; d < datasets.size(); ++d)
    for (std::size_t a = 0; a < A; ++a) {
      auto& cell = report.cells[d * A + a];
      cell.dataset = d;
      cell.algorithm = a;
      cell.runs.resize(restarts);
    }

  parallel_for(report.cells.size() * restarts, options.jobs, [&](std::size_t task) {
    const std::size_t c = task / restarts;
    const std::size_t rep = task % restarts;
    auto& cell = report.cells[c];
    const auto& entry = datasets[cell.dataset];
    const auto& ds = *entry.data;
    ClusteringConfig config;
    config.k = entry.k_star ? entry.k_star : ds.num_classes();
    config.seed = base_seed + rep;
    config.max_inner = options.max_inner;
    config.max_outer = options.max_outer;
    config.variant = algorithms[cell.algorithm];
    if (options.observer_for) config.observer = options.observer_for(cell.dataset, cell.algorithm, config.seed);
    const auto result = run_clustering(ds, config);
    cell.runs[rep] = {config.seed,
                      evaluate(result.partition.assignment(), ds.labels()),
                      result.final_objective(),
                      result.converged,
                      result.inner_iterations,
                      result.outer_iterations};
  });

  for (auto& cell : report.cells) {
    std::vector<double> ca, ari, nmi;
    for (const auto& run : cell.runs) {
      ca.push_back(run.scores.ca);
      ari.push_back(run.scores.ari);
      nmi.push_back(run.scores.nmi);
    }
    cell.ca = mean_std(ca);
    cell.ari = mean_std(ari);
    cell.nmi = mean_std(nmi);
  }

  report.rank_ca.assign(A, 0.0);
  report.rank_ari.assign(A, 0.0);
  report.rank_nmi.assign(A, 0.0);
  if (!datasets.empty()) {
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      std::vector<double> ca(A), ari(A), nmi(A);
      for (std::size_t a = 0; a < A; ++a) {
        ca[a] = report.cell(d, a).ca.mean;
        ari[a] = report.cell(d, a).ari.mean;
        nmi[a] = report.cell(d, a).nmi.mean;
      }
      const auto rc = descending_ranks(ca), ra = descending_ranks(ari), rn = descending_ranks(nmi);
      for (std::size_t a = 0; a < A; ++a) {
        report.rank_ca[a] += rc[a];
        report.rank_ari[a] += ra[a];
        report.rank_nmi[a] += rn[a];
      }
    }
    const auto D = static_cast<double>(datasets.size());
    for (std::size_t a = 0; a < A; ++a) {
      report.rank_ca[a] /= D;
      report.rank_ari[a] /= D;
      report.rank_nmi[a] /= D;
    }
  }
  return report;
}

enum class StructureKind { rgg, rglg, fcg, slg };

inline std::string_view to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::rgg: return "rgg";
    case StructureKind::rglg: return "rglg";
    case StructureKind::fcg: return "fcg";
    case StructureKind::slg: return "slg";
  }
  return "unknown";
}

inline StructureKind parse_structure_kind(std::string_view name) {
  for (auto kind : {StructureKind::rgg, StructureKind::rglg, StructureKind::fcg, StructureKind::slg})
    if (to_string(kind) == name) return kind;
  throw std::invalid_argument("unknown structure kind '" + std::string(name) + "'");
}

/// Per attribute, the value indices in their semantic order.
using ValueOrdering = std::vector<std::vector<std::size_t>>;

/// Resolves an attribute-name → ordered value names map against a dataset.
inline ValueOrdering resolve_ordering(const CategoricalDataset& ds,
                                      const std::map<std::string, std::vector<std::string>>& by_name) {
  ValueOrdering ordering;
  for (const auto& schema : ds.schemas()) {
    auto it = by_name.find(schema.name);
    if (it == by_name.end()) throw DataError("ordering has no entry for attribute '" + schema.name + "'");
    std::vector<std::size_t> order;
    for (const auto& value : it->second) {
      auto idx = schema.index_of(value);
      if (!idx) throw DataError("ordering value '" + value + "' is not in attribute '" + schema.name + "'");
      order.push_back(*idx);
    }
    if (order.size() != schema.cardinality())
      throw DataError("ordering for attribute '" + schema.name + "' does not list every value exactly once");
    ordering.push_back(std::move(order));
  }
  return ordering;
}

struct StructureExperimentOptions {
  std::size_t trials = 50;
  std::uint64_t base_seed = 0;
  std::size_t max_inner = 100;
  double norm_p = 2.0;
  std::optional<ValueOrdering> ordering;  // required for slg
};

/// Clustering accuracy under hand-picked distance structures. The k-modes
/// partition (seed base_seed) is shared by all trials and supplies the edge
/// weights; trial t draws its random structure from seed base_seed + t.
/// Distances are shortest paths on the structure; the partition is then
/// refined by the inner loop alone. Returns the accuracies sorted ascending.
inline std::vector<double> structure_experiment(const CategoricalDataset& ds, StructureKind kind,
                                                const StructureExperimentOptions& options = {}) {
  if (options.trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (!ds.has_labels()) throw DataError("structure experiment needs ground-truth labels");
  if (kind == StructureKind::slg) {
    if (!options.ordering) throw std::invalid_argument("slg needs a user-supplied value ordering");
    if (options.ordering->size() != ds.num_attributes())
      throw std::invalid_argument("ordering does not cover every attribute");
  }
  ClusteringConfig config;
  config.k = ds.num_classes();
  config.seed = options.base_seed;
  config.max_inner = options.max_inner;
  const auto init = kmodes(ds, config.k, options.base_seed, options.max_inner);
  const auto vcd = value_cluster_distributions(ds, init.partition);
  std::vector<WeightedValueGraph> graphs;
  for (std::size_t r = 0; r < ds.num_attributes(); ++r) graphs.push_back(build_weight_graph(vcd, r, options.norm_p));

  std::vector<double> accuracies;
  for (std::size_t t = 0; t < options.trials; ++t) {
    const std::uint64_t trial_seed = options.base_seed + t;
    std::vector<DistanceMatrix> distances;
    for (std::size_t r = 0; r < ds.num_attributes(); ++r) {
      const auto& g = graphs[r];
      switch (kind) {
        case StructureKind::rgg:
          distances.push_back(
              shortest_path_distances(random_connected_structure(g.nodes(), detail::mix_seed(trial_seed, r)), g));
          break;
        case StructureKind::rglg:
          distances.push_back(
              trace_distance_matrix(with_weights(line_structure(g.nodes(), detail::mix_seed(trial_seed, r), r), g)));
          break;
        case StructureKind::fcg: {
          GraphEdges all;
          for (std::size_t u = 0; u < g.nodes(); ++u)
            for (std::size_t s = u + 1; s < g.nodes(); ++s) all.emplace_back(u, s);
          distances.push_back(shortest_path_distances(all, g));
          break;
        }
        case StructureKind::slg:
          distances.push_back(trace_distance_matrix(with_weights(ordered_line_structure((*options.ordering)[r], r), g)));
          break;
      }
    }
    const auto refined = refine_with_distances(ds, config, init.partition, std::move(distances));
    accuracies.push_back(clustering_accuracy(refined.partition.assignment(), ds.labels()));
  }
  std::sort(accuracies.begin(), accuracies.end());
  return accuracies;
}

}  // namespace coforest
