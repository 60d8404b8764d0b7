#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cnas/curriculum.hpp"
#include "cnas/errors.hpp"
#include "cnas/reward.hpp"

namespace cnas {

// Oracle construction recipe. When seed is unset, planted and supernet
// oracles are drawn from the trial seed, so every seed poses a fresh task;
// when set, all trials share one landscape (order-sensitivity studies).
struct OracleSpec {
  std::string kind;  // planted | supernet | tabular
  std::optional<std::uint64_t> seed;
  PlantedLandscapeConfig planted;
  SurrogateSupernetConfig supernet;
  std::string path;  // tabular only

  void validate(const SpaceShape& shape) const;
};

struct ExperimentSpec {
  std::string name;
  std::vector<std::string> methods;  // subset of cnas/fixed/node/random
  std::vector<long long> seeds;
  CurriculumConfig curriculum;
  OracleSpec oracle;
  std::string output_dir;
  int parallelism = 1;

  void validate() const;
};

// Parses and validates the versioned JSON schema (version 1). Unknown keys
// anywhere in the document are rejected by name.
ExperimentSpec load_spec(const std::string& path);
ExperimentSpec parse_spec_json(const std::string& text);

struct StatsRow {
  std::string method;
  int stage = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population convention
  double min = 0.0;
  double max = 0.0;
  bool operator==(const StatsRow&) const = default;
};

// Fraction of seeds where method_a's final inferred reward >= method_b's.
struct WinRow {
  std::string method_a;
  std::string method_b;
  double fraction = 0.0;
  bool operator==(const WinRow&) const = default;
};

struct ExperimentSummary {
  std::vector<StatsRow> stats;
  std::vector<WinRow> wins;
  bool operator==(const ExperimentSummary&) const = default;
};

// Per-(method, stage) statistics of inferred reward plus pairwise win
// fractions at the final stage. method_order fixes row order; methods absent
// from it are appended in first-appearance order.
ExperimentSummary summarize(const std::vector<StageSummaryRecord>& records,
                            const std::vector<std::string>& method_order = {});

std::unique_ptr<RewardOracle> make_oracle(const OracleSpec& oracle,
                                          const SpaceShape& shape,
                                          std::uint64_t trial_seed);

// One trial: derives the trial rng from (seed, method), resolves a per-seed
// operation order shared by cnas and fixed, builds the oracle, and runs the
// method. Pure function of (spec, method, seed).
SearchTrace run_trial(const ExperimentSpec& spec, const std::string& method,
                      long long seed);

// Runs |methods| x |seeds| trials on a pool of at most spec.parallelism
// workers, then writes (from the coordinating thread only):
//   trace_<method>_<seed>.csv   one per trial
//   stage_summary.csv           all trials, method-major in spec order
//   stats.csv                   summary statistics (population std)
//   plot.svg                    mean inferred reward vs stage per method
// Failed trials do not stop the rest; their identities are collected and a
// TrialError is thrown after every completed trial's output is on disk.
ExperimentSummary run_experiment(const ExperimentSpec& spec);

void write_stats_csv(std::ostream& out, const ExperimentSummary& summary);
void write_plot_svg(std::ostream& out, const std::string& title,
                    const ExperimentSummary& summary);

}  // namespace cnas
