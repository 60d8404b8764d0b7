#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cnas/policy.hpp"
#include "cnas/reward.hpp"

namespace cnas {

// Inputs of one search run at surrogate scale: iteration counts stand in
// for training epochs; samples_per_controller_iter is the REINFORCE batch
// size.
struct CurriculumConfig {
  SpaceShape shape;

  // Curriculum order as catalog ids. Empty means: draw a random admissible
  // permutation (first operation parametric) from the run's random stream.
  std::vector<std::string> operation_order;

  int warmup_iters = 20;              // M
  int controller_iters_per_stage = 40;
  int weight_iters_per_stage = 40;
  int samples_per_controller_iter = 8;
  PolicyUpdateConfig policy_update;
  int infer_samples = 10;

  void validate() const;  // ConfigError
};

// One oracle evaluation. Exactly one row is appended per evaluation, so row
// counts are the budget accounting used for method parity.
struct TraceRow {
  int stage = 0;  // 1-based
  int iter = 0;   // scheduled iteration within the stage, 0-based
  std::string kind;  // warmup | controller | weights | random
  std::string encoding;  // catalog-indexed canonical encoding
  double reward = 0.0;
  double entropy = 0.0;
  double baseline = 0.0;
  double best_so_far = 0.0;

  bool operator==(const TraceRow&) const = default;
};

// Stage-end answer: best of infer_samples policy samples by validation
// reward (best seen row for random search).
struct StageInference {
  int stage = 0;
  std::string encoding;
  double reward = 0.0;

  bool operator==(const StageInference&) const = default;
};

struct SearchTrace {
  std::string method;  // cnas | fixed | node | random
  std::vector<int> operation_order;  // resolved curriculum order, catalog indices
  std::vector<TraceRow> rows;
  std::vector<StageInference> stages;

  const StageInference& final_answer() const;

  bool operator==(const SearchTrace&) const = default;
};

// Resolves the curriculum order to catalog indices: validates an explicit
// order, or draws an admissible random permutation from rng.
std::vector<int> resolve_operation_order(const CurriculumConfig& config,
                                         Rng& rng);

// The operation curriculum: per stage, extend the policy by one operation,
// run operation warmup, then alternate controller and weight iterations;
// infer at each stage end.
SearchTrace run_cnas(const CurriculumConfig& config, RewardOracle& oracle,
                     Rng& rng);

// Fixed-space baseline: stage checkpoint i is an independent from-scratch
// run (fresh policy, reset oracle training state) in the fixed space of the
// first i operations, with the total budget CNAS spends through stage i.
SearchTrace run_fixed(const CurriculumConfig& config, RewardOracle& oracle,
                      Rng& rng);

// Node-growing baseline: the operation set stays full while intermediate
// nodes are added one per stage; the total budget matches CNAS's.
SearchTrace run_node_curriculum(const CurriculumConfig& config,
                                RewardOracle& oracle, Rng& rng);

// Uniform sampling over the full space with the same total budget,
// best-so-far tracked as the answer.
SearchTrace run_random(const CurriculumConfig& config, RewardOracle& oracle,
                       Rng& rng);

// Controller-frozen warmup: exactly M uniform-sample + train_step iterations
// on the oracle. The policy is taken by const reference as the contract that
// it cannot move.
void operation_warmup(const FactorizedPolicy& policy, RewardOracle& oracle,
                      const SearchSpaceStage& stage, int iterations, Rng& rng);

// Best of n policy samples by validation reward. op_remap, when given, maps
// the policy's operation indices to the oracle's catalog indices; the
// returned architecture is catalog-indexed.
std::pair<Architecture, double> infer(const FactorizedPolicy& policy,
                                      RewardOracle& oracle, int n, Rng& rng,
                                      const std::vector<int>* op_remap = nullptr);

// Trace CSV: header
// trial,method,stage,iter,kind,encoding,reward,entropy,baseline,best_so_far
// one row per evaluation; encodings are quoted (they contain commas).
struct TraceRecord {
  long long trial = 0;
  std::string method;
  TraceRow row;

  bool operator==(const TraceRecord&) const = default;
};

void write_trace_csv(std::ostream& out, const SearchTrace& trace,
                     long long trial);
std::vector<TraceRecord> read_trace_csv(std::istream& in);

// Stage summary CSV: trial,method,stage,inferred_encoding,inferred_reward.
struct StageSummaryRecord {
  long long trial = 0;
  std::string method;
  StageInference inference;

  bool operator==(const StageSummaryRecord&) const = default;
};

void write_stage_summary_header(std::ostream& out);
void append_stage_summary(std::ostream& out, const SearchTrace& trace,
                          long long trial);
std::vector<StageSummaryRecord> read_stage_summary_csv(std::istream& in);

}  // namespace cnas
