#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "cnas/harness.hpp"
#include "cnas/text.hpp"

namespace {

using namespace cnas;

SpaceShape shape_from_flags(int total_nodes, int num_ops, int cell_groups) {
  auto catalog = default_operation_catalog();
  if (num_ops < 1 || num_ops > static_cast<int>(catalog.size()))
    throw ConfigError("--K must be in [1, " + std::to_string(catalog.size()) +
                      "]");
  catalog.resize(num_ops);
  return SpaceShape(total_nodes, cell_groups, std::move(catalog));
}

int cmd_size(int B, int K, int G) {
  std::cout << space_size(SearchSpaceStage(shape_from_flags(B, K, G), K))
            << "\n";
  return 0;
}

int cmd_enumerate(int B, int K, long long limit) {
  const SearchSpaceStage stage(shape_from_flags(B, K, 1), K);
  for (const Architecture& arch : enumerate_space(stage, limit))
    std::cout << encode(arch) << "\n";
  return 0;
}

int cmd_oracle_gen(const std::string& kind, int B, int K, std::uint64_t seed,
                   const std::string& out) {
  const SpaceShape shape = shape_from_flags(B, K, 1);
  const SearchSpaceStage stage(shape, K);
  // Tables are for exhaustive lookup; refuse spaces that will not fit.
  const auto archs = enumerate_space(stage, 1000000);

  std::map<std::string, double> table;
  if (kind == "planted") {
    const PlantedLandscape landscape(shape, seed, {0.7, 0.3, 0.0});
    for (const Architecture& arch : archs)
      table[encode(arch)] = landscape.noiseless(arch);
  } else if (kind == "tabular") {
    Rng rng(seed);
    for (const Architecture& arch : archs)
      table[encode(arch)] = rng.uniform();
  } else {
    throw ConfigError("--kind must be planted or tabular");
  }
  TabularOracle(shape, std::move(table)).save(out);
  std::cout << "wrote " << archs.size() << " entries to " << out << "\n";
  return 0;
}

int run_spec(const std::string& path, bool single_method) {
  const ExperimentSpec spec = load_spec(path);
  if (single_method && spec.methods.size() != 1)
    throw ConfigError("search runs exactly one method; use compare for " +
                      std::to_string(spec.methods.size()));
  const ExperimentSummary summary = run_experiment(spec);
  write_stats_csv(std::cout, summary);
  std::cerr << "wrote " << spec.output_dir << "\n";
  return 0;
}

int cmd_summarize(const std::string& dir) {
  const std::string path = dir + "/stage_summary.csv";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("summarize: cannot open '" + path + "'");
  const auto records = read_stage_summary_csv(in);
  const ExperimentSummary summary = summarize(records);

  // Rewrites the statistics file; traces and the plot are the run's record
  // and are left untouched.
  std::ofstream stats(dir + "/stats.csv", std::ios::binary);
  if (!stats)
    throw TrialError("summarize: cannot write '" + dir + "/stats.csv'");
  write_stats_csv(stats, summary);

  write_stats_csv(std::cout, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curriculum architecture search over cell DAG spaces"};
  app.require_subcommand(1);

  int B = 0, K = 0, G = 1;
  long long limit = 0;
  std::uint64_t seed = 0;
  std::string kind, out, spec_path, dir;

  auto* size = app.add_subcommand("size", "exact search-space size");
  size->add_option("--B", B, "total nodes per cell")->required();
  size->add_option("--K", K, "active operations")->required();
  size->add_option("--G", G, "independent cell groups");

  auto* enumerate = app.add_subcommand("enumerate", "list every architecture");
  enumerate->add_option("--B", B)->required();
  enumerate->add_option("--K", K)->required();
  enumerate->add_option("--limit", limit, "refuse spaces larger than this")
      ->required();

  auto* oracle = app.add_subcommand("oracle", "oracle utilities");
  oracle->require_subcommand(1);
  auto* gen = oracle->add_subcommand("gen", "tabulate a reward oracle");
  gen->add_option("--kind", kind, "planted or tabular")->required();
  gen->add_option("--B", B)->required();
  gen->add_option("--K", K)->required();
  gen->add_option("--seed", seed)->required();
  gen->add_option("--out", out, "TSV path to write")->required();

  auto* search = app.add_subcommand("search", "run one method from a spec");
  search->add_option("--spec", spec_path, "experiment spec (JSON)")->required();

  auto* compare =
      app.add_subcommand("compare", "run every method from a spec");
  compare->add_option("--spec", spec_path, "experiment spec (JSON)")
      ->required();

  auto* summarize_cmd =
      app.add_subcommand("summarize", "recompute stats for a finished run");
  summarize_cmd->add_option("--dir", dir, "experiment output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (size->parsed()) return cmd_size(B, K, G);
    if (enumerate->parsed()) return cmd_enumerate(B, K, limit);
    if (oracle->parsed()) return cmd_oracle_gen(kind, B, K, seed, out);
    if (search->parsed()) return run_spec(spec_path, true);
    if (compare->parsed()) return run_spec(spec_path, false);
    if (summarize_cmd->parsed()) return cmd_summarize(dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
