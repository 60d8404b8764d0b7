#include "cnas/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "cnas/text.hpp"

namespace cnas {

void CurriculumConfig::validate() const {
  if (warmup_iters < 0)
    throw ConfigError("curriculum: warmup_iters must be >= 0");
  if (controller_iters_per_stage < 1)
    throw ConfigError("curriculum: controller_iters_per_stage must be >= 1");
  if (weight_iters_per_stage < 1)
    throw ConfigError("curriculum: weight_iters_per_stage must be >= 1");
  if (samples_per_controller_iter < 1)
    throw ConfigError("curriculum: samples_per_controller_iter must be >= 1");
  if (infer_samples < 1)
    throw ConfigError("curriculum: infer_samples must be >= 1");
  try {
    policy_update.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("curriculum: ") + e.what());
  }
  if (!operation_order.empty()) {
    if (operation_order.size() != shape.operations().size())
      throw ConfigError(
          "curriculum: operation_order must list every catalog operation");
    std::vector<bool> seen(shape.operations().size(), false);
    for (const std::string& id : operation_order) {
      const int idx = [&] {
        try {
          return shape.operation_index(id);
        } catch (const ValidationError&) {
          throw ConfigError("curriculum: operation_order names unknown id '" +
                            id + "'");
        }
      }();
      if (seen[idx])
        throw ConfigError("curriculum: operation_order repeats '" + id + "'");
      seen[idx] = true;
    }
    if (!shape.operations()[shape.operation_index(operation_order.front())]
             .has_params)
      throw ConfigError(
          "curriculum: the first operation of the order must have "
          "parameters, '" +
          operation_order.front() + "' does not");
  }
}

const StageInference& SearchTrace::final_answer() const {
  if (stages.empty()) throw ValidationError("trace has no stage inferences");
  return stages.back();
}

std::vector<int> resolve_operation_order(const CurriculumConfig& config,
                                         Rng& rng) {
  config.validate();
  const auto& ops = config.shape.operations();
  if (!config.operation_order.empty()) {
    std::vector<int> order;
    for (const std::string& id : config.operation_order)
      order.push_back(config.shape.operation_index(id));
    return order;
  }
  std::vector<int> order(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) order[i] = static_cast<int>(i);
  // Rejection: reshuffle until the leading operation is parametric. The
  // catalog invariant guarantees such an operation exists.
  do {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);
  } while (!ops[order.front()].has_params);
  return order;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Architecture remap_ops(const Architecture& arch, const std::vector<int>& map) {
  Architecture out = arch;
  for (auto& group : out.groups)
    for (auto& node : group)
      for (Edge& e : node) e.op = map[e.op];
  return out;
}

// Shared trace-building engine. One row is appended per oracle evaluation;
// trainable oracles are advanced after the evaluation on warmup, weights and
// random rows so a row stays exactly one evaluation.
struct Engine {
  RewardOracle& oracle;
  Rng& rng;
  SearchTrace trace;
  double best = kNegInf;
  std::string best_encoding;

  double record(int stage, int iter, const char* kind,
                const Architecture& catalog_arch, double entropy,
                double baseline_value, bool train_after) {
    const double reward = oracle.evaluate(catalog_arch, rng);
    if (train_after) oracle.train_step(catalog_arch);
    const std::string encoding = encode(catalog_arch);
    if (reward > best) {
      best = reward;
      best_encoding = encoding;
    }
    trace.rows.push_back(TraceRow{stage, iter, kind, encoding, reward, entropy,
                                  baseline_value, best});
    return reward;
  }
};

// One stage's schedule: M warmup iterations, then controller and weight
// iterations interleaved proportionally (strict alternation when the
// counts are equal).
void run_stage(Engine& engine, FactorizedPolicy& policy,
               RewardBaseline& baseline, const CurriculumConfig& config,
               const SearchSpaceStage& stage, const std::vector<int>& remap,
               int stage_label, int warmup, int controller_iters,
               int weight_iters) {
  const bool train = engine.oracle.trainable();
  int iter = 0;
  for (int m = 0; m < warmup; ++m, ++iter) {
    const Architecture arch = uniform_sample(stage, engine.rng);
    engine.record(stage_label, iter, "warmup", remap_ops(arch, remap),
                  policy.entropy(), baseline.value, train);
  }
  int c_done = 0, w_done = 0;
  while (c_done < controller_iters || w_done < weight_iters) {
    const bool do_controller =
        c_done < controller_iters &&
        (w_done >= weight_iters ||
         static_cast<long long>(c_done) * weight_iters <=
             static_cast<long long>(w_done) * controller_iters);
    if (do_controller) {
      const double entropy = policy.entropy();
      std::vector<std::pair<Architecture, double>> batch;
      for (int s = 0; s < config.samples_per_controller_iter; ++s) {
        const Architecture arch = policy.sample(engine.rng);
        const double reward =
            engine.record(stage_label, iter, "controller",
                          remap_ops(arch, remap), entropy, baseline.value,
                          false);
        batch.emplace_back(arch, reward);
      }
      policy.reinforce_step(batch, config.policy_update, baseline);
      ++c_done;
    } else {
      const Architecture arch = policy.sample(engine.rng);
      engine.record(stage_label, iter, "weights", remap_ops(arch, remap),
                    policy.entropy(), baseline.value, train);
      ++w_done;
    }
    ++iter;
  }
}

void check_oracle(const CurriculumConfig& config, const RewardOracle& oracle) {
  if (!(oracle.shape() == config.shape))
    throw ShapeMismatch("oracle shape does not match the curriculum shape");
}

// Splits total into parts items; earlier parts absorb the remainder.
std::vector<int> split_budget(int total, int parts) {
  std::vector<int> out(parts, total / parts);
  for (int i = 0; i < total % parts; ++i) ++out[i];
  return out;
}

}  // namespace

SearchTrace run_cnas(const CurriculumConfig& config, RewardOracle& oracle,
                     Rng& rng) {
  config.validate();
  check_oracle(config, oracle);
  const std::vector<int> order = resolve_operation_order(config, rng);

  std::vector<OperationSpec> curriculum_ops;
  for (int idx : order) curriculum_ops.push_back(config.shape.operations()[idx]);
  const SpaceShape policy_shape = config.shape.with_operations(curriculum_ops);

  Engine engine{oracle, rng, SearchTrace{"cnas", order, {}, {}}, kNegInf, {}};
  FactorizedPolicy policy{SearchSpaceStage(policy_shape, 1)};
  RewardBaseline baseline;

  const int stages = policy_shape.num_operations();
  for (int i = 1; i <= stages; ++i) {
    const SearchSpaceStage stage(policy_shape, i);
    if (i > 1) policy = policy.extend_operation(stage);
    run_stage(engine, policy, baseline, config, stage, order, i,
              config.warmup_iters, config.controller_iters_per_stage,
              config.weight_iters_per_stage);
    auto [arch, reward] =
        infer(policy, oracle, config.infer_samples, rng, &order);
    engine.trace.stages.push_back(StageInference{i, encode(arch), reward});
  }
  return engine.trace;
}

SearchTrace run_fixed(const CurriculumConfig& config, RewardOracle& oracle,
                      Rng& rng) {
  config.validate();
  check_oracle(config, oracle);
  const std::vector<int> order = resolve_operation_order(config, rng);

  std::vector<OperationSpec> curriculum_ops;
  for (int idx : order) curriculum_ops.push_back(config.shape.operations()[idx]);
  const SpaceShape policy_shape = config.shape.with_operations(curriculum_ops);

  Engine engine{oracle, rng, SearchTrace{"fixed", order, {}, {}}, kNegInf, {}};
  const int stages = policy_shape.num_operations();
  for (int i = 1; i <= stages; ++i) {
    // Stage checkpoint i is an independent run: fresh policy and baseline,
    // untrained oracle state, i times the per-stage budget. Best-so-far is
    // also per-run, so it never leaks across independent runs.
    oracle.reset_training();
    engine.best = kNegInf;
    engine.best_encoding.clear();
    FactorizedPolicy policy{SearchSpaceStage(policy_shape, i)};
    RewardBaseline baseline;
    const SearchSpaceStage stage(policy_shape, i);
    run_stage(engine, policy, baseline, config, stage, order, i,
              i * config.warmup_iters, i * config.controller_iters_per_stage,
              i * config.weight_iters_per_stage);
    auto [arch, reward] =
        infer(policy, oracle, config.infer_samples, rng, &order);
    engine.trace.stages.push_back(StageInference{i, encode(arch), reward});
  }
  return engine.trace;
}

SearchTrace run_node_curriculum(const CurriculumConfig& config,
                                RewardOracle& oracle, Rng& rng) {
  config.validate();
  check_oracle(config, oracle);

  const int catalog = config.shape.num_operations();
  const int node_stages = config.shape.intermediate_nodes();
  // Identity order: the full catalog is active from the first stage, so
  // node-curriculum traces are catalog-indexed without remapping.
  std::vector<int> order(catalog);
  for (int i = 0; i < catalog; ++i) order[i] = i;

  const auto warmups = split_budget(catalog * config.warmup_iters, node_stages);
  const auto controllers =
      split_budget(catalog * config.controller_iters_per_stage, node_stages);
  const auto weights =
      split_budget(catalog * config.weight_iters_per_stage, node_stages);

  Engine engine{oracle, rng, SearchTrace{"node", order, {}, {}}, kNegInf, {}};
  FactorizedPolicy policy{
      SearchSpaceStage(config.shape.with_total_nodes(4), catalog)};
  RewardBaseline baseline;

  for (int s = 1; s <= node_stages; ++s) {
    const SearchSpaceStage stage(config.shape.with_total_nodes(s + 3), catalog);
    if (s > 1) policy = policy.extend_nodes(stage);
    run_stage(engine, policy, baseline, config, stage, order, s, warmups[s - 1],
              controllers[s - 1], weights[s - 1]);
    auto [arch, reward] =
        infer(policy, oracle, config.infer_samples, rng, &order);
    engine.trace.stages.push_back(StageInference{s, encode(arch), reward});
  }
  return engine.trace;
}

SearchTrace run_random(const CurriculumConfig& config, RewardOracle& oracle,
                       Rng& rng) {
  config.validate();
  check_oracle(config, oracle);

  const int catalog = config.shape.num_operations();
  std::vector<int> order(catalog);
  for (int i = 0; i < catalog; ++i) order[i] = i;

  const SearchSpaceStage full(config.shape, catalog);
  // Uniform sampling has no policy; the entropy column records the constant
  // entropy of the uniform distribution over the full space.
  double uniform_entropy = 0.0;
  for (const DecisionSlot& slot : decision_slots(full))
    uniform_entropy += std::log(static_cast<double>(slot.choices));

  const int per_stage = config.warmup_iters +
                        config.controller_iters_per_stage *
                            config.samples_per_controller_iter +
                        config.weight_iters_per_stage;
  const bool train = oracle.trainable();

  Engine engine{oracle, rng, SearchTrace{"random", order, {}, {}}, kNegInf, {}};
  for (int i = 1; i <= catalog; ++i) {
    for (int iter = 0; iter < per_stage; ++iter) {
      const Architecture arch = uniform_sample(full, rng);
      engine.record(i, iter, "random", arch, uniform_entropy, 0.0, train);
    }
    engine.trace.stages.push_back(
        StageInference{i, engine.best_encoding, engine.best});
  }
  return engine.trace;
}

void operation_warmup(const FactorizedPolicy& policy, RewardOracle& oracle,
                      const SearchSpaceStage& stage, int iterations, Rng& rng) {
  (void)policy;  // frozen by constness; warmup never reads the controller
  if (iterations < 0)
    throw ValidationError("operation_warmup: iterations must be >= 0");
  for (int m = 0; m < iterations; ++m)
    oracle.train_step(uniform_sample(stage, rng));
}

std::pair<Architecture, double> infer(const FactorizedPolicy& policy,
                                      RewardOracle& oracle, int n, Rng& rng,
                                      const std::vector<int>* op_remap) {
  if (n < 1) throw ValidationError("infer: need at least one sample");
  Architecture best_arch;
  double best = kNegInf;
  for (int t = 0; t < n; ++t) {
    Architecture arch = policy.sample(rng);
    if (op_remap) arch = remap_ops(arch, *op_remap);
    const double reward = oracle.evaluate(arch, rng);
    if (reward > best) {
      best = reward;
      best_arch = arch;
    }
  }
  return {best_arch, best};
}

static const char kTraceHeader[] =
    "trial,method,stage,iter,kind,encoding,reward,entropy,baseline,"
    "best_so_far";
static const char kSummaryHeader[] =
    "trial,method,stage,inferred_encoding,inferred_reward";

void write_trace_csv(std::ostream& out, const SearchTrace& trace,
                     long long trial) {
  out << kTraceHeader << "\n";
  for (const TraceRow& row : trace.rows) {
    out << trial << ',' << trace.method << ',' << row.stage << ',' << row.iter
        << ',' << row.kind << ',' << csv_quote(row.encoding) << ','
        << format_double(row.reward) << ',' << format_double(row.entropy)
        << ',' << format_double(row.baseline) << ','
        << format_double(row.best_so_far) << "\n";
  }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw ParseError("trace csv: missing or wrong header");
  std::vector<TraceRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string context = "trace csv line " + std::to_string(lineno);
    const auto f = split_csv_line(line, context);
    if (f.size() != 10)
      throw ParseError(context + ": expected 10 fields, got " +
                       std::to_string(f.size()));
    TraceRecord rec;
    rec.trial = parse_int_strict(f[0], context);
    rec.method = f[1];
    rec.row.stage = static_cast<int>(parse_int_strict(f[2], context));
    rec.row.iter = static_cast<int>(parse_int_strict(f[3], context));
    rec.row.kind = f[4];
    rec.row.encoding = f[5];
    rec.row.reward = parse_double_strict(f[6], context);
    rec.row.entropy = parse_double_strict(f[7], context);
    rec.row.baseline = parse_double_strict(f[8], context);
    rec.row.best_so_far = parse_double_strict(f[9], context);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_stage_summary_header(std::ostream& out) {
  out << kSummaryHeader << "\n";
}

void append_stage_summary(std::ostream& out, const SearchTrace& trace,
                          long long trial) {
  for (const StageInference& s : trace.stages) {
    out << trial << ',' << trace.method << ',' << s.stage << ','
        << csv_quote(s.encoding) << ',' << format_double(s.reward) << "\n";
  }
}

std::vector<StageSummaryRecord> read_stage_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSummaryHeader)
    throw ParseError("stage summary csv: missing or wrong header");
  std::vector<StageSummaryRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string context = "stage summary line " + std::to_string(lineno);
    const auto f = split_csv_line(line, context);
    if (f.size() != 5)
      throw ParseError(context + ": expected 5 fields, got " +
                       std::to_string(f.size()));
    StageSummaryRecord rec;
    rec.trial = parse_int_strict(f[0], context);
    rec.method = f[1];
    rec.inference.stage = static_cast<int>(parse_int_strict(f[2], context));
    rec.inference.encoding = f[3];
    rec.inference.reward = parse_double_strict(f[4], context);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace cnas
