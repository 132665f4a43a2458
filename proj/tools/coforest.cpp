// coforest: command-line front end for clustering, benchmarking, synthetic
// data generation, forest export and scaling measurements.

#include <openssl/evp.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coforest/serialize.hpp"

namespace fs = std::filesystem;
using namespace coforest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

#ifndef COFOREST_VERSION
#define COFOREST_VERSION "unknown"
#endif

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  void add_input(const fs::path& path) { inputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}}); }

  json config = json::object();

  [[nodiscard]] json finish() const {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    return json{{"command", command_},
                {"config", config},
                {"inputs", inputs_},
                {"version", COFOREST_VERSION},
                {"duration_seconds", elapsed.count()}};
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  json inputs_ = json::array();
};

// CSV and DOT outputs carry their manifest in a sidecar file.
void write_with_sidecar(const fs::path& path, const std::string& content, const Manifest& manifest) {
  write_atomic(path, content);
  write_atomic(path.string() + ".manifest.json", manifest.finish().dump(2) + "\n");
}

std::size_t default_jobs() {
  if (const char* env = std::getenv("COFOREST_JOBS")) {
    try {
      const auto v = std::stoul(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid COFOREST_JOBS='" << env << "'\n";
  }
  return 1;
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

struct ClusterArgs {
  std::string input;
  std::size_t k = 0;
  std::string algorithm = "coforest";
  std::uint64_t seed = 0;
  std::size_t restarts = 1;
  std::optional<std::string> label_column;
  std::string missing_token = "?";
  std::string output;
  bool emit_forest = false;
  std::size_t max_inner = 100;
  std::size_t max_outer = 50;
};

int cmd_cluster(const ClusterArgs& a, std::size_t jobs) {
  Manifest manifest("cluster");
  const auto algorithm = parse_algorithm(a.algorithm);
  CsvOptions opts;
  opts.label_column = a.label_column;
  opts.missing_token = a.missing_token;
  const auto ds = load_csv(a.input, opts);
  manifest.add_input(a.input);
  manifest.config = {{"input", a.input},         {"k", a.k},
                     {"algorithm", a.algorithm}, {"seed", a.seed},
                     {"restarts", a.restarts},   {"label_column", optional_string(a.label_column)},
                     {"missing_token", a.missing_token}, {"output", a.output},
                     {"emit_forest", a.emit_forest},     {"max_inner", a.max_inner},
                     {"max_outer", a.max_outer},         {"jobs", jobs}};

  std::vector<std::optional<ClusteringResult>> results(a.restarts);
  parallel_for(a.restarts, jobs, [&](std::size_t i) {
    ClusteringConfig config;
    config.k = a.k;
    config.seed = a.seed + i;
    config.variant = algorithm;
    config.max_inner = a.max_inner;
    config.max_outer = a.max_outer;
    results[i] = run_clustering(ds, config);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i]->final_objective() < results[best]->final_objective()) best = i;

  json restarts = json::array();
  std::vector<double> ca, ari, nmi;
  for (const auto& r : results) {
    json entry{{"seed", r->seed},
               {"objective", r->final_objective()},
               {"converged", r->converged},
               {"inner_iterations", r->inner_iterations},
               {"outer_iterations", r->outer_iterations}};
    if (ds.has_labels()) {
      const auto m = evaluate(r->partition.assignment(), ds.labels());
      entry["metrics"] = to_json(m);
      ca.push_back(m.ca);
      ari.push_back(m.ari);
      nmi.push_back(m.nmi);
    }
    restarts.push_back(std::move(entry));
  }

  json out{{"schema_version", kSchemaVersion},
           {"dataset", to_json(dataset_summary(ds))},
           {"best_seed", results[best]->seed},
           {"result", to_json(*results[best], ds.schemas(), a.emit_forest)},
           {"restarts", std::move(restarts)}};
  if (ds.has_labels())
    out["metrics"] = {{"ca", to_json(mean_std(ca))}, {"ari", to_json(mean_std(ari))}, {"nmi", to_json(mean_std(nmi))}};
  out["manifest"] = manifest.finish();
  write_atomic(a.output, out.dump(2) + "\n");
  return kExitOk;
}

struct BenchArgs {
  std::string suite;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  std::vector<std::string> algorithms{"coforest", "kmodes", "cof1", "cof2", "cof3", "cof4"};
  std::string output;
  std::size_t max_inner = 100;
  std::size_t max_outer = 50;
};

int cmd_bench(const BenchArgs& a, std::size_t jobs) {
  Manifest manifest("bench");
  std::vector<Algorithm> algorithms;
  for (const auto& name : a.algorithms) algorithms.push_back(parse_algorithm(name));
  manifest.add_input(a.suite);
  std::vector<BenchmarkDataset> datasets;
  for (const auto& entry : load_suite(a.suite)) {
    if (!entry.label_column) throw DataError("suite dataset '" + entry.name + "' has no label column");
    datasets.push_back(load_suite_dataset(entry));
    manifest.add_input(entry.path);
  }
  manifest.config = {{"suite", a.suite},     {"restarts", a.restarts},   {"seed", a.seed},
                     {"algorithms", a.algorithms}, {"output", a.output}, {"max_inner", a.max_inner},
                     {"max_outer", a.max_outer},   {"jobs", jobs}};
  BenchmarkOptions options;
  options.max_inner = a.max_inner;
  options.max_outer = a.max_outer;
  options.jobs = jobs;
  const auto report = run_benchmark(datasets, algorithms, a.restarts, a.seed, options);

  json out = to_json(report);
  out["manifest"] = manifest.finish();
  fs::path table = a.output;
  table.replace_extension(".txt");
  if (table == fs::path(a.output)) table += ".txt";
  write_atomic(a.output, out.dump(2) + "\n");
  write_atomic(table, benchmark_table(report));
  return kExitOk;
}

struct GenArgs {
  std::size_t n = 1000;
  std::size_t l = 20;
  std::size_t values = 5;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_gen(const GenArgs& a) {
  Manifest manifest("gen");
  manifest.config = {{"n", a.n}, {"l", a.l}, {"values", a.values}, {"k", a.k}, {"seed", a.seed}, {"output", a.output}};
  const auto ds = generate_synthetic({a.n, a.l, a.values, a.k, a.seed});
  std::ostringstream csv;
  write_csv(ds, csv, "class");
  write_with_sidecar(a.output, csv.str(), manifest);
  return kExitOk;
}

struct ScalingArgs {
  std::string mode;
  std::string algorithm = "coforest";
  std::size_t points = 10;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_scaling(const ScalingArgs& a) {
  Manifest manifest("scaling");
  manifest.config = {{"mode", a.mode}, {"algorithm", a.algorithm}, {"points", a.points}, {"repeats", a.repeats}, {"seed", a.seed},
                     {"output", a.output}};
  ScalingOptions options;
  options.mode = parse_scaling_mode(a.mode);
  options.algorithm = parse_algorithm(a.algorithm);
  options.points = a.points;
  options.repeats = a.repeats;
  options.seed = a.seed;
  options.progress = [](const ScalingPoint& p) {
    std::cerr << "size " << p.size << ": " << p.seconds << " s\n";
  };
  const auto points = run_scaling(options);
  write_with_sidecar(a.output, scaling_csv(options.mode, points), manifest);
  if (points.size() >= 2) std::cout << "log-log slope: " << loglog_slope(points) << "\n";
  return kExitOk;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

struct ExportArgs {
  std::string result;
  std::string format = "dot";
  std::string output;
};

int cmd_export_forest(const ExportArgs& a) {
  Manifest manifest("export-forest");
  manifest.config = {{"result", a.result}, {"format", a.format}, {"output", a.output}};
  const auto doc = read_json(a.result);
  manifest.add_input(a.result);
  const json* forest_json = nullptr;
  if (doc.contains("result") && doc["result"].contains("forest") && !doc["result"]["forest"].is_null())
    forest_json = &doc["result"]["forest"];
  if (!forest_json) throw DataError("'" + a.result + "' contains no forest (rerun with --emit-forest on a forest-based algorithm)");
  const auto forest = forest_from_json(*forest_json);
  if (a.format == "json") {
    json out = *forest_json;
    out["manifest"] = manifest.finish();
    write_atomic(a.output, out.dump(2) + "\n");
  } else {
    std::vector<AttributeSchema> schemas;
    std::size_t width = 0;
    for (const auto& attr : (*forest_json)["attributes"])
      width = std::max(width, attr.at("attribute").get<std::size_t>() + 1);
    schemas.resize(width);
    for (const auto& attr : (*forest_json)["attributes"]) {
      auto& s = schemas[attr.at("attribute").get<std::size_t>()];
      s.name = attr.at("name").get<std::string>();
      s.vocabulary = attr.at("vocabulary").get<std::vector<std::string>>();
    }
    write_with_sidecar(a.output, forest_to_dot(forest, schemas), manifest);
  }
  return kExitOk;
}

struct SummaryArgs {
  std::string input;
  std::optional<std::string> label_column;
  std::string missing_token = "?";
};

int cmd_summary(const SummaryArgs& a) {
  CsvOptions opts;
  opts.label_column = a.label_column;
  opts.missing_token = a.missing_token;
  std::cout << to_json(dataset_summary(load_csv(a.input, opts))).dump(2) << "\n";
  return kExitOk;
}

struct StructureArgs {
  std::string input;
  std::string label_column;
  std::string missing_token = "?";
  std::string kind;
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  std::optional<std::string> ordering;
  std::string output;
};

int cmd_structure(const StructureArgs& a) {
  Manifest manifest("structure");
  CsvOptions opts;
  opts.label_column = a.label_column;
  opts.missing_token = a.missing_token;
  const auto ds = load_csv(a.input, opts);
  manifest.add_input(a.input);
  manifest.config = {{"input", a.input},   {"label_column", a.label_column}, {"missing_token", a.missing_token},
                     {"kind", a.kind},     {"trials", a.trials},             {"seed", a.seed},
                     {"ordering", optional_string(a.ordering)}, {"output", a.output}};
  StructureExperimentOptions options;
  options.trials = a.trials;
  options.base_seed = a.seed;
  if (a.ordering) {
    manifest.add_input(*a.ordering);
    options.ordering = resolve_ordering(ds, read_json(*a.ordering).get<std::map<std::string, std::vector<std::string>>>());
  }
  const auto kind = parse_structure_kind(a.kind);
  if (kind == StructureKind::slg && !a.ordering) throw UsageError("--kind slg requires --ordering");
  const auto accuracies = structure_experiment(ds, kind, options);
  json out{{"schema_version", kSchemaVersion},
           {"kind", a.kind},
           {"trials", a.trials},
           {"accuracies", accuracies},
           {"manifest", manifest.finish()}};
  write_atomic(a.output, out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Categorical clustering with learned order forests"};
  app.set_version_flag("--version", COFOREST_VERSION);
  app.require_subcommand(1);
  std::size_t jobs = default_jobs();
  app.add_option("--jobs", jobs, "Concurrent runs (default: $COFOREST_JOBS or 1)")->check(CLI::PositiveNumber);

  const std::vector<std::string> algorithm_names{"coforest", "kmodes", "cof1", "cof2", "cof3", "cof4"};

  ClusterArgs cluster;
  auto* c = app.add_subcommand("cluster", "Cluster a CSV dataset");
  c->add_option("--input", cluster.input, "Input CSV")->required()->check(CLI::ExistingFile);
  c->add_option("--k", cluster.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  c->add_option("--algorithm", cluster.algorithm, "Algorithm")->check(CLI::IsMember(algorithm_names))->capture_default_str();
  c->add_option("--seed", cluster.seed, "Seed of the first restart")->capture_default_str();
  c->add_option("--restarts", cluster.restarts, "Restarts (seeds seed..seed+R-1)")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--label-column", cluster.label_column, "Ground-truth column; enables metrics");
  c->add_option("--missing-token", cluster.missing_token, "Missing-value marker")->capture_default_str();
  c->add_option("--output", cluster.output, "Result JSON")->required();
  c->add_flag("--emit-forest", cluster.emit_forest, "Include the learned forest in the result");
  c->add_option("--max-inner", cluster.max_inner, "Inner iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--max-outer", cluster.max_outer, "Outer iteration cap")->check(CLI::PositiveNumber)->capture_default_str();

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run the multi-restart benchmark over a dataset suite");
  b->add_option("--suite", bench.suite, "Suite manifest JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--restarts", bench.restarts, "Restarts per cell")->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--seed", bench.seed, "Base seed")->capture_default_str();
  b->add_option("--algorithms", bench.algorithms, "Comma-separated algorithms")
      ->delimiter(',')
      ->check(CLI::IsMember(algorithm_names))
      ->capture_default_str();
  b->add_option("--output", bench.output, "Report JSON; the text table goes next to it as .txt")->required();
  b->add_option("--max-inner", bench.max_inner, "Inner iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--max-outer", bench.max_outer, "Outer iteration cap")->check(CLI::PositiveNumber)->capture_default_str();

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Write a synthetic planted-cluster dataset");
  g->add_option("--n", gen.n, "Samples")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--l", gen.l, "Attributes")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--values", gen.values, "Values per attribute")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--k", gen.k, "Planted clusters")->check(CLI::PositiveNumber)->capture_default_str();
  g->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  g->add_option("--output", gen.output, "Output CSV")->required();

  ScalingArgs scaling;
  auto* s = app.add_subcommand("scaling", "Time clustering over the synthetic size grid");
  s->add_option("--mode", scaling.mode, "samples or attributes")->required()->check(CLI::IsMember({"samples", "attributes"}));
  s->add_option("--algorithm", scaling.algorithm, "Algorithm")->check(CLI::IsMember(algorithm_names))->capture_default_str();
  s->add_option("--points", scaling.points, "Grid points to run, from the smallest")->check(CLI::Range(1, 10))->capture_default_str();
  s->add_option("--repeats", scaling.repeats, "Timed runs per point, median reported")->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--seed", scaling.seed, "Seed")->capture_default_str();
  s->add_option("--output", scaling.output, "Timing CSV")->required();

  ExportArgs exp;
  auto* e = app.add_subcommand("export-forest", "Export the forest stored in a cluster result");
  e->add_option("--result", exp.result, "Result JSON from `cluster --emit-forest`")->required()->check(CLI::ExistingFile);
  e->add_option("--format", exp.format, "dot or json")->check(CLI::IsMember({"dot", "json"}))->capture_default_str();
  e->add_option("--output", exp.output, "Output file")->required();

  SummaryArgs summary;
  auto* m = app.add_subcommand("summary", "Print a dataset summary as JSON");
  m->add_option("--input", summary.input, "Input CSV")->required()->check(CLI::ExistingFile);
  m->add_option("--label-column", summary.label_column, "Ground-truth column");
  m->add_option("--missing-token", summary.missing_token, "Missing-value marker")->capture_default_str();

  StructureArgs structure;
  auto* t = app.add_subcommand("structure", "Accuracy under hand-picked distance structures");
  t->add_option("--input", structure.input, "Input CSV")->required()->check(CLI::ExistingFile);
  t->add_option("--label-column", structure.label_column, "Ground-truth column")->required();
  t->add_option("--missing-token", structure.missing_token, "Missing-value marker")->capture_default_str();
  t->add_option("--kind", structure.kind, "rgg, rglg, fcg or slg")->required()->check(CLI::IsMember({"rgg", "rglg", "fcg", "slg"}));
  t->add_option("--trials", structure.trials, "Trials")->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--seed", structure.seed, "Base seed")->capture_default_str();
  t->add_option("--ordering", structure.ordering, "JSON map attribute -> ordered values (slg)")->check(CLI::ExistingFile);
  t->add_option("--output", structure.output, "Output JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c) return cmd_cluster(cluster, jobs);
    if (*b) return cmd_bench(bench, jobs);
    if (*g) return cmd_gen(gen);
    if (*s) return cmd_scaling(scaling);
    if (*e) return cmd_export_forest(exp);
    if (*m) return cmd_summary(summary);
    if (*t) return cmd_structure(structure);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
