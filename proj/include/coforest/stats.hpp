#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coforest/data.hpp"

namespace coforest {

using ClusterIndex = std::uint32_t;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Hard assignment of every sample to exactly one of k clusters.
class Partition {
 public:
  Partition(std::vector<ClusterIndex> assignment, std::size_t k)
      : assignment_(std::move(assignment)), k_(k) {
    if (k_ == 0) throw std::invalid_argument("partition needs at least one cluster");
    for (ClusterIndex c : assignment_) {
      if (c >= k_) throw std::invalid_argument("cluster index out of range");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return assignment_.size(); }
  [[nodiscard]] std::size_t k() const noexcept { return k_; }
  [[nodiscard]] ClusterIndex operator[](std::size_t i) const noexcept { return assignment_[i]; }
  [[nodiscard]] const std::vector<ClusterIndex>& assignment() const noexcept { return assignment_; }

  void assign(std::size_t i, ClusterIndex c) {
    if (c >= k_) throw std::invalid_argument("cluster index out of range");
    assignment_.at(i) = c;
  }

  [[nodiscard]] std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> sizes(k_, 0);
    for (ClusterIndex c : assignment_) ++sizes[c];
    return sizes;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<ClusterIndex> assignment_;
  std::size_t k_;
};

/// Joint counts |X_{r,u} ∩ C_j|, one o_r × k matrix per attribute.
struct ValueClusterCounts {
  std::vector<Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> per_attribute;
  std::vector<std::size_t> cluster_sizes;
};

inline ValueClusterCounts count_value_cluster(const CategoricalDataset& ds, const Partition& part) {
  if (part.size() != ds.num_samples())
    throw std::invalid_argument("partition length " + std::to_string(part.size()) +
                                " does not match sample count " + std::to_string(ds.num_samples()));
  ValueClusterCounts counts;
  counts.cluster_sizes = part.cluster_sizes();
  counts.per_attribute.reserve(ds.num_attributes());
  for (std::size_t r = 0; r < ds.num_attributes(); ++r) {
    counts.per_attribute.emplace_back(ds.cardinality(r), part.k());
    counts.per_attribute.back().setZero();
  }
  const std::size_t l = ds.num_attributes();
  for (std::size_t i = 0; i < ds.num_samples(); ++i) {
    const ClusterIndex j = part[i];
    auto row = ds.row(i);
    for (std::size_t r = 0; r < l; ++r) ++counts.per_attribute[r](row[r], j);
  }
  return counts;
}

/// Row u of attribute r is the distribution of value v_{r,u} over the k
/// clusters: p_{C_j|v_{r,u}} = |X_{r,u} ∩ C_j| / |X_{r,u}|.
struct ValueClusterDistributions {
  std::vector<RowMatrix> per_attribute;  // o_r × k

  [[nodiscard]] std::span<const double> row(std::size_t r, std::size_t u) const {
    const auto& m = per_attribute.at(r);
    return {m.data() + u * m.cols(), static_cast<std::size_t>(m.cols())};
  }
};

/// Row j of attribute r is p_{j,r}, the distribution of the values of
/// attribute r inside cluster j: p_{v_{r,u}|C_j} = |X_{r,u} ∩ C_j| / |C_j|.
struct ClusterValueDistributions {
  std::vector<RowMatrix> per_attribute;  // k × o_r
  std::vector<std::size_t> cluster_sizes;

  [[nodiscard]] std::size_t k() const noexcept { return cluster_sizes.size(); }
  [[nodiscard]] std::span<const double> row(std::size_t j, std::size_t r) const {
    const auto& m = per_attribute.at(r);
    return {m.data() + j * m.cols(), static_cast<std::size_t>(m.cols())};
  }
};

inline ValueClusterDistributions value_cluster_distributions(const ValueClusterCounts& counts) {
  ValueClusterDistributions out;
  out.per_attribute.reserve(counts.per_attribute.size());
  for (const auto& c : counts.per_attribute) {
    RowMatrix m = c.cast<double>();
    for (Eigen::Index u = 0; u < m.rows(); ++u) {
      const double support = m.row(u).sum();
      // Observed vocabularies guarantee support >= 1; an unsupported value
      // (possible only for hand-built datasets) keeps an all-zero row.
      if (support > 0) m.row(u) /= support;
    }
    out.per_attribute.push_back(std::move(m));
  }
  return out;
}

inline ValueClusterDistributions value_cluster_distributions(const CategoricalDataset& ds,
                                                             const Partition& part) {
  return value_cluster_distributions(count_value_cluster(ds, part));
}

inline ClusterValueDistributions cluster_value_distributions(const ValueClusterCounts& counts) {
  ClusterValueDistributions out;
  out.cluster_sizes = counts.cluster_sizes;
  for (std::size_t j = 0; j < out.cluster_sizes.size(); ++j) {
    if (out.cluster_sizes[j] == 0)
      throw std::domain_error("cluster " + std::to_string(j) + " is empty");
  }
  out.per_attribute.reserve(counts.per_attribute.size());
  for (const auto& c : counts.per_attribute) {
    RowMatrix m = c.transpose().cast<double>();
    for (Eigen::Index j = 0; j < m.rows(); ++j) m.row(j) /= static_cast<double>(out.cluster_sizes[j]);
    out.per_attribute.push_back(std::move(m));
  }
  return out;
}

inline ClusterValueDistributions cluster_value_distributions(const CategoricalDataset& ds,
                                                             const Partition& part) {
  return cluster_value_distributions(count_value_cluster(ds, part));
}

/// Edge weight between two values: the p-norm of the difference of their
/// cluster distributions.
inline double weight(std::span<const double> a, std::span<const double> b, double p = 2.0) {
  if (a.size() != b.size())
    throw std::invalid_argument("distribution lengths differ: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  if (!(p >= 1.0)) throw std::invalid_argument("norm order must be >= 1");
  double acc = 0.0;
  if (p == 2.0) {
    for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(acc);
  }
  if (std::isinf(p)) {
    for (std::size_t j = 0; j < a.size(); ++j) acc = std::max(acc, std::abs(a[j] - b[j]));
    return acc;
  }
  for (std::size_t j = 0; j < a.size(); ++j) acc += std::pow(std::abs(a[j] - b[j]), p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace coforest
