#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coforest/cluster.hpp"

namespace coforest {

enum class ScalingMode { samples, attributes };

inline std::string_view to_string(ScalingMode mode) { return mode == ScalingMode::samples ? "samples" : "attributes"; }

inline ScalingMode parse_scaling_mode(std::string_view name) {
  if (name == "samples") return ScalingMode::samples;
  if (name == "attributes") return ScalingMode::attributes;
  throw std::invalid_argument("unknown scaling mode '" + std::string(name) + "'");
}

struct ScalingPoint {
  std::size_t size = 0;  // n in samples mode, l in attributes mode
  double seconds = 0.0;
  std::size_t inner_iterations = 0;
  std::size_t outer_iterations = 0;
};

struct ScalingOptions {
  ScalingMode mode = ScalingMode::samples;
  Algorithm algorithm = Algorithm::coforest;
  std::size_t points = 10;  // grid prefix length, 1..10
  std::uint64_t seed = 0;
  std::size_t repeats = 1;  // timed runs per point; the median is reported
  std::function<void(const ScalingPoint&)> progress;
};

/// Samples mode: n = 10k, 20k, ..., l = 20. Attributes mode: l = 1k, 2k, ...,
/// n = 2k. Both use 5 values per attribute and k = 5.
inline SyntheticSpec scaling_spec(ScalingMode mode, std::size_t step, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.values_per_attribute = 5;
  spec.k_true = 5;
  spec.seed = seed;
  if (mode == ScalingMode::samples) {
    spec.n = 10000 * step;
    spec.l = 20;
  } else {
    spec.n = 2000;
    spec.l = 1000 * step;
  }
  return spec;
}

/// Times the clustering run at each grid point. Data generation is not timed.
inline std::vector<ScalingPoint> run_scaling(const ScalingOptions& options) {
  if (options.points == 0 || options.points > 10) throw std::invalid_argument("points must be in 1..10");
  if (options.repeats == 0) throw std::invalid_argument("repeats must be positive");
  std::vector<ScalingPoint> out;
  for (std::size_t step = 1; step <= options.points; ++step) {
    const auto spec = scaling_spec(options.mode, step, options.seed);
    const auto ds = generate_synthetic(spec);
    ClusteringConfig config;
    config.k = 5;
    config.seed = options.seed;
    config.variant = options.algorithm;
    ScalingPoint point{options.mode == ScalingMode::samples ? spec.n : spec.l};
    std::vector<double> times;
    for (std::size_t rep = 0; rep < options.repeats; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      const auto result = run_clustering(ds, config);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      times.push_back(elapsed.count());
      point.inner_iterations = result.inner_iterations;
      point.outer_iterations = result.outer_iterations;
    }
    std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
    point.seconds = times[times.size() / 2];
    if (options.progress) options.progress(point);
    out.push_back(point);
  }
  return out;
}

/// Least-squares slope of log(seconds) against log(size).
inline double loglog_slope(std::span<const ScalingPoint> points) {
  if (points.size() < 2) throw std::invalid_argument("slope needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : points) {
    if (p.size == 0 || p.seconds <= 0.0) throw std::invalid_argument("slope needs positive sizes and timings");
    const double x = std::log(static_cast<double>(p.size));
    const double y = std::log(p.seconds);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto m = static_cast<double>(points.size());
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("slope needs at least two distinct sizes");
  return (m * sxy - sx * sy) / denom;
}

}  // namespace coforest
