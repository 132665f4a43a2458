#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "coforest/cluster.hpp"
#include "coforest/eval.hpp"
#include "coforest/scaling.hpp"

namespace coforest {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline json to_json(const DatasetSummary& s) {
  return json{{"n", s.n},
              {"l", s.l},
              {"cardinalities", s.cardinalities},
              {"max_cardinality", s.max_cardinality},
              {"num_classes", s.num_classes}};
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != n) throw DataError("distance matrix is not square");
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

/// Per attribute: name, vocabulary, tree edges and the trace-distance matrix.
inline json forest_to_json(const OrderForest& forest, const std::vector<AttributeSchema>& schemas) {
  json attrs = json::array();
  for (std::size_t r = 0; r < forest.trees.size(); ++r) {
    const auto& tree = forest.trees[r];
    json edges = json::array();
    for (const auto& e : tree.edges()) edges.push_back({{"u", e.u}, {"s", e.s}, {"weight", e.weight}});
    const auto& schema = schemas.at(tree.attribute());
    attrs.push_back({{"attribute", tree.attribute()},
                     {"name", schema.name},
                     {"vocabulary", schema.vocabulary},
                     {"edges", std::move(edges)},
                     {"distances", matrix_to_json(forest.distances.at(r))}});
  }
  return json{{"schema_version", kSchemaVersion}, {"attributes", std::move(attrs)}};
}

inline OrderForest forest_from_json(const json& j) {
  OrderForest forest;
  try {
    for (const auto& a : j.at("attributes")) {
      std::vector<TreeEdge> edges;
      for (const auto& e : a.at("edges"))
        edges.push_back({e.at("u").get<std::size_t>(), e.at("s").get<std::size_t>(), e.at("weight").get<double>()});
      const auto nodes = a.at("vocabulary").size();
      forest.trees.emplace_back(a.at("attribute").get<std::size_t>(), nodes, std::move(edges));
      forest.distances.push_back(matrix_from_json(a.at("distances")));
      if (static_cast<std::size_t>(forest.distances.back().rows()) != nodes)
        throw DataError("distance matrix does not match the vocabulary size");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed forest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed forest: ") + e.what());
  }
  return forest;
}

/// Graphviz output, one undirected graph per attribute.
inline std::string forest_to_dot(const OrderForest& forest, const std::vector<AttributeSchema>& schemas) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  std::ostringstream out;
  for (const auto& tree : forest.trees) {
    const auto& schema = schemas.at(tree.attribute());
    out << "graph " << quote(schema.name) << " {\n";
    for (std::size_t v = 0; v < tree.nodes(); ++v)
      out << "  n" << v << " [label=" << quote(schema.vocabulary.at(v)) << "];\n";
    for (const auto& e : tree.edges()) {
      char weight[64];
      std::snprintf(weight, sizeof weight, "%.6f", e.weight);
      out << "  n" << e.u << " -- n" << e.s << " [label=\"" << weight << "\"];\n";
    }
    out << "}\n";
  }
  return out.str();
}

inline json to_json(const MetricScores& m) { return json{{"ca", m.ca}, {"ari", m.ari}, {"nmi", m.nmi}}; }

inline json to_json(const ClusteringResult& r, const std::vector<AttributeSchema>& schemas, bool emit_forest) {
  json trace = json::array();
  for (const auto& t : r.objective_trace)
    trace.push_back({{"iteration", t.iteration}, {"objective", t.objective}, {"forest_rebuilt", t.forest_rebuilt}});
  json out{{"algorithm", std::string(to_string(r.algorithm))},
           {"seed", r.seed},
           {"k", r.partition.k()},
           {"n", r.partition.size()},
           {"assignments", r.partition.assignment()},
           {"objective_trace", std::move(trace)},
           {"final_objective", r.final_objective()},
           {"inner_iterations", r.inner_iterations},
           {"outer_iterations", r.outer_iterations},
           {"converged", r.converged}};
  out["forest"] = emit_forest && r.forest ? forest_to_json(*r.forest, schemas) : json(nullptr);
  return out;
}

inline json to_json(const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; }

inline json to_json(const BenchmarkReport& report) {
  json algorithms = json::array();
  for (auto a : report.algorithms) algorithms.push_back(std::string(to_string(a)));
  json cells = json::array();
  for (const auto& c : report.cells) {
    json runs = json::array();
    for (const auto& run : c.runs) {
      runs.push_back({{"seed", run.seed},
                      {"metrics", to_json(run.scores)},
                      {"objective", run.objective},
                      {"converged", run.converged},
                      {"inner_iterations", run.inner_iterations},
                      {"outer_iterations", run.outer_iterations}});
    }
    cells.push_back({{"dataset", report.datasets.at(c.dataset)},
                     {"algorithm", std::string(to_string(report.algorithms.at(c.algorithm)))},
                     {"algorithm_index", c.algorithm},
                     {"ca", to_json(c.ca)},
                     {"ari", to_json(c.ari)},
                     {"nmi", to_json(c.nmi)},
                     {"runs", std::move(runs)}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"conventions", {{"std_divisor", "R"}, {"nmi_normalization", "arithmetic_mean"}}},
              {"restarts", report.restarts},
              {"base_seed", report.base_seed},
              {"datasets", report.datasets},
              {"algorithms", std::move(algorithms)},
              {"cells", std::move(cells)},
              {"average_ranks", {{"ca", report.rank_ca}, {"ari", report.rank_ari}, {"nmi", report.rank_nmi}}}};
}

namespace detail {
inline std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}
}  // namespace detail

/// Datasets as rows, algorithms as columns, mean±std per cell and an average
/// rank footer; one block per metric.
inline std::string benchmark_table(const BenchmarkReport& report) {
  struct Metric {
    const char* title;
    MeanStd BenchmarkCell::*field;
    const std::vector<double>* ranks;
  };
  const Metric metrics[] = {{"CA", &BenchmarkCell::ca, &report.rank_ca},
                            {"ARI", &BenchmarkCell::ari, &report.rank_ari},
                            {"NMI", &BenchmarkCell::nmi, &report.rank_nmi}};
  std::ostringstream out;
  for (const auto& metric : metrics) {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{metric.title};
    for (auto a : report.algorithms) header.emplace_back(to_string(a));
    grid.push_back(header);
    for (std::size_t d = 0; d < report.datasets.size(); ++d) {
      std::vector<std::string> row{report.datasets[d]};
      for (std::size_t a = 0; a < report.algorithms.size(); ++a) {
        const auto& m = report.cell(d, a).*metric.field;
        row.push_back(detail::fixed(m.mean, 4) + "+-" + detail::fixed(m.std, 4));
      }
      grid.push_back(row);
    }
    std::vector<std::string> footer{"AR"};
    for (double r : *metric.ranks) footer.push_back(detail::fixed(r, 4));
    grid.push_back(footer);

    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : grid)
      for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (i + 1 == grid.size()) {
        std::size_t total = 0;
        for (auto w : widths) total += w + 2;
        out << std::string(total - 2, '-') << '\n';
      }
      for (std::size_t c = 0; c < grid[i].size(); ++c) {
        out << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(widths[c])) << grid[i][c];
        out << (c + 1 == grid[i].size() ? "\n" : "  ");
      }
    }
    out << '\n';
  }
  return out.str();
}

inline std::string scaling_csv(ScalingMode mode, std::span<const ScalingPoint> points) {
  std::ostringstream out;
  out << (mode == ScalingMode::samples ? "n" : "l") << ",seconds,inner_iterations,outer_iterations\n";
  for (const auto& p : points) {
    char seconds[64];
    std::snprintf(seconds, sizeof seconds, "%.6f", p.seconds);
    out << p.size << ',' << seconds << ',' << p.inner_iterations << ',' << p.outer_iterations << '\n';
  }
  return out.str();
}

struct SuiteEntry {
  std::string name;
  std::filesystem::path path;
  std::optional<std::string> label_column;
  std::size_t k_star = 0;
  std::string missing_token = "?";
};

/// Reads {"datasets": [{name, path, label_column, k_star, missing_token}]};
/// relative paths resolve against the manifest's directory.
inline std::vector<SuiteEntry> load_suite(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open suite manifest '" + manifest.string() + "'");
  std::vector<SuiteEntry> out;
  try {
    const auto j = json::parse(in);
    for (const auto& d : j.at("datasets")) {
      SuiteEntry e;
      e.path = d.at("path").get<std::string>();
      if (e.path.is_relative()) e.path = manifest.parent_path() / e.path;
      e.name = d.contains("name") ? d.at("name").get<std::string>() : e.path.stem().string();
      if (d.contains("label_column") && !d.at("label_column").is_null())
        e.label_column = d.at("label_column").get<std::string>();
      if (d.contains("k_star")) e.k_star = d.at("k_star").get<std::size_t>();
      if (d.contains("missing_token")) e.missing_token = d.at("missing_token").get<std::string>();
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DataError("malformed suite manifest '" + manifest.string() + "': " + e.what());
  }
  return out;
}

inline BenchmarkDataset load_suite_dataset(const SuiteEntry& e) {
  CsvOptions opts;
  opts.label_column = e.label_column;
  opts.missing_token = e.missing_token;
  auto ds = std::make_shared<const CategoricalDataset>(load_csv(e.path.string(), opts));
  return {e.name, ds, e.k_star};
}

}  // namespace coforest
