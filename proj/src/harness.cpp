#include "cnas/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cnas/text.hpp"

namespace cnas {

namespace {

using nlohmann::json;

const std::vector<std::string> kMethods = {"cnas", "fixed", "node", "random"};

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

[[noreturn]] void schema_fail(const std::string& message) {
  throw SchemaError("spec: " + message);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& scope) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      schema_fail("unknown key '" + item.key() + "' in " + scope);
}

const json& require_key(const json& obj, const char* key,
                        const std::string& scope) {
  const auto it = obj.find(key);
  if (it == obj.end())
    schema_fail("missing required key '" + std::string(key) + "' in " + scope);
  return *it;
}

long long get_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) schema_fail("key '" + key + "' must be an integer");
  return v.get<long long>();
}

double get_num(const json& v, const std::string& key) {
  if (!v.is_number()) schema_fail("key '" + key + "' must be a number");
  return v.get<double>();
}

std::string get_str(const json& v, const std::string& key) {
  if (!v.is_string()) schema_fail("key '" + key + "' must be a string");
  return v.get<std::string>();
}

SpaceShape parse_space(const json& obj) {
  if (!obj.is_object()) schema_fail("key 'space' must be an object");
  check_keys(obj, {"total_nodes", "cell_groups", "ops"}, "'space'");
  const int total_nodes =
      static_cast<int>(get_int(require_key(obj, "total_nodes", "'space'"),
                               "space.total_nodes"));
  int cell_groups = 1;
  if (obj.contains("cell_groups"))
    cell_groups =
        static_cast<int>(get_int(obj.at("cell_groups"), "space.cell_groups"));

  const auto catalog = default_operation_catalog();
  std::vector<OperationSpec> ops;
  const json& ops_json = require_key(obj, "ops", "'space'");
  if (ops_json.is_number_integer()) {
    const long long k = ops_json.get<long long>();
    if (k < 1 || k > static_cast<long long>(catalog.size()))
      schema_fail("key 'space.ops' must be in [1, " +
                  std::to_string(catalog.size()) + "] when numeric");
    ops.assign(catalog.begin(), catalog.begin() + k);
  } else if (ops_json.is_array()) {
    for (const json& v : ops_json) {
      const std::string id = get_str(v, "space.ops");
      const auto it = std::find_if(catalog.begin(), catalog.end(),
                                   [&](const OperationSpec& op) {
                                     return op.id == id;
                                   });
      if (it == catalog.end())
        schema_fail("key 'space.ops' names unknown operation '" + id + "'");
      ops.push_back(*it);
    }
  } else {
    schema_fail("key 'space.ops' must be an integer or an array of ids");
  }

  try {
    return SpaceShape(total_nodes, cell_groups, std::move(ops));
  } catch (const ValidationError& e) {
    schema_fail(std::string("key 'space': ") + e.what());
  }
}

OracleSpec parse_oracle(const json& obj) {
  if (!obj.is_object()) schema_fail("key 'oracle' must be an object");
  OracleSpec oracle;
  oracle.kind = get_str(require_key(obj, "kind", "'oracle'"), "oracle.kind");
  if (oracle.kind == "planted") {
    check_keys(obj,
               {"kind", "seed", "noise_sigma", "op_match_bonus",
                "input_match_bonus"},
               "'oracle'");
    if (obj.contains("seed"))
      oracle.seed = static_cast<std::uint64_t>(
          get_int(obj.at("seed"), "oracle.seed"));
    if (obj.contains("noise_sigma"))
      oracle.planted.noise_sigma =
          get_num(obj.at("noise_sigma"), "oracle.noise_sigma");
    if (obj.contains("op_match_bonus"))
      oracle.planted.op_match_bonus =
          get_num(obj.at("op_match_bonus"), "oracle.op_match_bonus");
    if (obj.contains("input_match_bonus"))
      oracle.planted.input_match_bonus =
          get_num(obj.at("input_match_bonus"), "oracle.input_match_bonus");
  } else if (oracle.kind == "supernet") {
    check_keys(obj,
               {"kind", "seed", "train_rate", "input_match_bonus",
                "eval_noise_sigma", "planted_op"},
               "'oracle'");
    if (obj.contains("seed"))
      oracle.seed = static_cast<std::uint64_t>(
          get_int(obj.at("seed"), "oracle.seed"));
    if (obj.contains("train_rate"))
      oracle.supernet.train_rate =
          get_num(obj.at("train_rate"), "oracle.train_rate");
    if (obj.contains("input_match_bonus"))
      oracle.supernet.input_match_bonus =
          get_num(obj.at("input_match_bonus"), "oracle.input_match_bonus");
    if (obj.contains("eval_noise_sigma"))
      oracle.supernet.eval_noise_sigma =
          get_num(obj.at("eval_noise_sigma"), "oracle.eval_noise_sigma");
    if (obj.contains("planted_op"))
      oracle.supernet.planted_op =
          get_str(obj.at("planted_op"), "oracle.planted_op");
  } else if (oracle.kind == "tabular") {
    check_keys(obj, {"kind", "path"}, "'oracle'");
    oracle.path = get_str(require_key(obj, "path", "'oracle'"), "oracle.path");
  } else {
    schema_fail("key 'oracle.kind' must be planted, supernet or tabular");
  }
  return oracle;
}

void parse_curriculum(const json& obj, CurriculumConfig& config) {
  if (!obj.is_object()) schema_fail("key 'curriculum' must be an object");
  check_keys(obj,
             {"operation_order", "warmup_iters", "controller_iters_per_stage",
              "weight_iters_per_stage", "samples_per_controller_iter",
              "infer_samples", "learning_rate", "entropy_weight",
              "baseline_decay"},
             "'curriculum'");
  if (obj.contains("operation_order")) {
    const json& arr = obj.at("operation_order");
    if (!arr.is_array())
      schema_fail("key 'curriculum.operation_order' must be an array");
    for (const json& v : arr)
      config.operation_order.push_back(
          get_str(v, "curriculum.operation_order"));
  }
  const auto take_int = [&](const char* key, int& field) {
    if (obj.contains(key))
      field = static_cast<int>(
          get_int(obj.at(key), std::string("curriculum.") + key));
  };
  const auto take_num = [&](const char* key, double& field) {
    if (obj.contains(key))
      field = get_num(obj.at(key), std::string("curriculum.") + key);
  };
  take_int("warmup_iters", config.warmup_iters);
  take_int("controller_iters_per_stage", config.controller_iters_per_stage);
  take_int("weight_iters_per_stage", config.weight_iters_per_stage);
  take_int("samples_per_controller_iter", config.samples_per_controller_iter);
  take_int("infer_samples", config.infer_samples);
  take_num("learning_rate", config.policy_update.learning_rate);
  take_num("entropy_weight", config.policy_update.entropy_weight);
  take_num("baseline_decay", config.policy_update.baseline_decay);
}

}  // namespace

void OracleSpec::validate(const SpaceShape& shape) const {
  if (kind == "planted") {
    try {
      planted.validate();
    } catch (const ValidationError& e) {
      throw SchemaError(std::string("spec: key 'oracle': ") + e.what());
    }
  } else if (kind == "supernet") {
    try {
      supernet.validate();
    } catch (const ValidationError& e) {
      throw SchemaError(std::string("spec: key 'oracle': ") + e.what());
    }
    if (!supernet.planted_op.empty()) {
      try {
        shape.operation_index(supernet.planted_op);
      } catch (const ValidationError&) {
        throw SchemaError("spec: key 'oracle.planted_op' names '" +
                          supernet.planted_op + "', not in the catalog");
      }
    }
  } else if (kind == "tabular") {
    if (path.empty())
      throw SchemaError("spec: key 'oracle.path' must be a non-empty path");
  } else {
    throw SchemaError("spec: key 'oracle.kind' must be planted, supernet or "
                      "tabular");
  }
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw SchemaError("spec: key 'name' must be non-empty");
  if (methods.empty())
    throw SchemaError("spec: key 'methods' must list at least one method");
  std::set<std::string> seen_methods;
  for (const std::string& m : methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
      throw SchemaError("spec: key 'methods' contains unknown method '" + m +
                        "'");
    if (!seen_methods.insert(m).second)
      throw SchemaError("spec: key 'methods' repeats '" + m + "'");
  }
  if (seeds.empty())
    throw SchemaError("spec: key 'seeds' must list at least one seed");
  if (std::set<long long>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw SchemaError("spec: key 'seeds' must be distinct");
  if (parallelism < 1)
    throw SchemaError("spec: key 'parallelism' must be >= 1");
  if (output_dir.empty())
    throw SchemaError("spec: key 'output_dir' must be non-empty");
  try {
    curriculum.validate();
  } catch (const ConfigError& e) {
    throw SchemaError(std::string("spec: key 'curriculum': ") + e.what());
  }
  oracle.validate(curriculum.shape);
}

ExperimentSpec parse_spec_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("spec: ") + e.what());
  }
  if (!doc.is_object()) schema_fail("top level must be a JSON object");
  check_keys(doc,
             {"version", "name", "methods", "seeds", "parallelism",
              "output_dir", "space", "oracle", "curriculum"},
             "the top level");

  const json& version = require_key(doc, "version", "the top level");
  if (!version.is_number_integer() || version.get<long long>() != 1)
    schema_fail("key 'version' must be the integer 1");

  SpaceShape shape = parse_space(require_key(doc, "space", "the top level"));
  ExperimentSpec spec{
      /*name=*/get_str(require_key(doc, "name", "the top level"), "name"),
      /*methods=*/{},
      /*seeds=*/{},
      /*curriculum=*/CurriculumConfig{std::move(shape), {}, 20, 40, 40, 8, {},
                                      10},
      /*oracle=*/parse_oracle(require_key(doc, "oracle", "the top level")),
      /*output_dir=*/
      get_str(require_key(doc, "output_dir", "the top level"), "output_dir"),
      /*parallelism=*/1,
  };

  const json& methods = require_key(doc, "methods", "the top level");
  if (!methods.is_array()) schema_fail("key 'methods' must be an array");
  for (const json& v : methods) spec.methods.push_back(get_str(v, "methods"));

  const json& seeds = require_key(doc, "seeds", "the top level");
  if (!seeds.is_array()) schema_fail("key 'seeds' must be an array");
  for (const json& v : seeds) spec.seeds.push_back(get_int(v, "seeds"));

  if (doc.contains("parallelism"))
    spec.parallelism =
        static_cast<int>(get_int(doc.at("parallelism"), "parallelism"));
  if (doc.contains("curriculum"))
    parse_curriculum(doc.at("curriculum"), spec.curriculum);

  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("spec: cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_spec_json(buffer.str());
}

std::unique_ptr<RewardOracle> make_oracle(const OracleSpec& oracle,
                                          const SpaceShape& shape,
                                          std::uint64_t trial_seed) {
  const std::uint64_t seed = oracle.seed.value_or(trial_seed);
  if (oracle.kind == "planted")
    return std::make_unique<PlantedLandscape>(shape, seed, oracle.planted);
  if (oracle.kind == "supernet")
    return std::make_unique<SurrogateSupernet>(shape, seed, oracle.supernet);
  if (oracle.kind == "tabular")
    return std::make_unique<TabularOracle>(TabularOracle::load(oracle.path));
  throw ConfigError("unknown oracle kind '" + oracle.kind + "'");
}

SearchTrace run_trial(const ExperimentSpec& spec, const std::string& method,
                      long long seed) {
  CurriculumConfig config = spec.curriculum;
  // cnas and fixed must compare on the same curriculum order, so a random
  // order is drawn from a method-independent stream per seed.
  if (config.operation_order.empty() &&
      (method == "cnas" || method == "fixed")) {
    Rng order_rng(Rng::mix(static_cast<std::uint64_t>(seed),
                           fnv1a64("operation_order")));
    for (const int idx : resolve_operation_order(config, order_rng))
      config.operation_order.push_back(config.shape.operations()[idx].id);
  }
  const auto oracle =
      make_oracle(spec.oracle, config.shape, static_cast<std::uint64_t>(seed));
  Rng rng(Rng::mix(static_cast<std::uint64_t>(seed), fnv1a64(method)));
  if (method == "cnas") return run_cnas(config, *oracle, rng);
  if (method == "fixed") return run_fixed(config, *oracle, rng);
  if (method == "node") return run_node_curriculum(config, *oracle, rng);
  if (method == "random") return run_random(config, *oracle, rng);
  throw ConfigError("unknown method '" + method + "'");
}

ExperimentSummary summarize(const std::vector<StageSummaryRecord>& records,
                            const std::vector<std::string>& method_order) {
  if (records.empty())
    throw InconsistentTraces("summarize: no stage summary records");

  std::vector<std::string> order = method_order;
  // (method, seed, stage) -> reward, rejecting duplicates.
  std::map<std::string, std::map<long long, std::map<int, double>>> grid;
  for (const StageSummaryRecord& rec : records) {
    if (std::find(order.begin(), order.end(), rec.method) == order.end())
      order.push_back(rec.method);
    auto& per_stage = grid[rec.method][rec.trial];
    if (!per_stage.emplace(rec.inference.stage, rec.inference.reward).second)
      throw InconsistentTraces(
          "summarize: duplicate record for method=" + rec.method +
          " trial=" + std::to_string(rec.trial) +
          " stage=" + std::to_string(rec.inference.stage));
  }

  ExperimentSummary summary;
  std::map<std::string, std::map<long long, double>> finals;
  for (const std::string& method : order) {
    const auto it = grid.find(method);
    if (it == grid.end()) continue;
    const auto& seeds = it->second;
    // Every seed of a method must cover the same stage set.
    std::set<int> stages;
    for (const auto& [stage, reward] : seeds.begin()->second)
      stages.insert(stage);
    for (const auto& [seed, per_stage] : seeds) {
      std::set<int> got;
      for (const auto& [stage, reward] : per_stage) got.insert(stage);
      if (got != stages)
        throw InconsistentTraces("summarize: method=" + method + " trial=" +
                                 std::to_string(seed) +
                                 " covers a different stage set");
    }
    for (const int stage : stages) {
      StatsRow row;
      row.method = method;
      row.stage = stage;
      double sum = 0.0, sumsq = 0.0;
      row.min = std::numeric_limits<double>::infinity();
      row.max = -std::numeric_limits<double>::infinity();
      for (const auto& [seed, per_stage] : seeds) {
        const double r = per_stage.at(stage);
        sum += r;
        sumsq += r * r;
        row.min = std::min(row.min, r);
        row.max = std::max(row.max, r);
      }
      const double n = static_cast<double>(seeds.size());
      row.mean = sum / n;
      row.stddev = std::sqrt(std::max(0.0, sumsq / n - row.mean * row.mean));
      summary.stats.push_back(std::move(row));
    }
    const int final_stage = *stages.rbegin();
    for (const auto& [seed, per_stage] : seeds)
      finals[method][seed] = per_stage.at(final_stage);
  }

  for (const std::string& a : order) {
    if (!finals.count(a)) continue;
    for (const std::string& b : order) {
      if (a == b || !finals.count(b)) continue;
      const auto& fa = finals.at(a);
      const auto& fb = finals.at(b);
      if (fa.size() != fb.size())
        throw InconsistentTraces("summarize: methods " + a + " and " + b +
                                 " ran different seed sets");
      WinRow win{a, b, 0.0};
      int wins = 0;
      for (const auto& [seed, ra] : fa) {
        const auto it = fb.find(seed);
        if (it == fb.end())
          throw InconsistentTraces("summarize: methods " + a + " and " + b +
                                   " ran different seed sets");
        if (ra >= it->second) ++wins;
      }
      win.fraction = static_cast<double>(wins) / fa.size();
      summary.wins.push_back(std::move(win));
    }
  }
  return summary;
}

void write_stats_csv(std::ostream& out, const ExperimentSummary& summary) {
  out << "# std is the population standard deviation\n";
  out << "record,method,stage,versus,mean,std,min,max,win_fraction\n";
  for (const StatsRow& row : summary.stats) {
    out << "stage," << row.method << ',' << row.stage << ",,"
        << format_double(row.mean) << ',' << format_double(row.stddev) << ','
        << format_double(row.min) << ',' << format_double(row.max) << ",\n";
  }
  for (const WinRow& win : summary.wins) {
    out << "final_win," << win.method_a << ",," << win.method_b << ",,,,,"
        << format_double(win.fraction) << "\n";
  }
}

namespace {

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const char* method_color(const std::string& method) {
  if (method == "cnas") return "#1f77b4";
  if (method == "fixed") return "#d62728";
  if (method == "node") return "#2ca02c";
  if (method == "random") return "#7f7f7f";
  return "#9467bd";
}

}  // namespace

void write_plot_svg(std::ostream& out, const std::string& title,
                    const ExperimentSummary& summary) {
  // Series per method, stage-ascending (stats rows are already ordered).
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<int, double>>> series;
  int max_stage = 1;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  for (const StatsRow& row : summary.stats) {
    if (!series.count(row.method)) order.push_back(row.method);
    series[row.method].emplace_back(row.stage, row.mean);
    max_stage = std::max(max_stage, row.stage);
    ymin = std::min(ymin, row.mean);
    ymax = std::max(ymax, row.mean);
  }
  if (series.empty()) {
    ymin = 0.0;
    ymax = 1.0;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double x0 = 60, x1 = 620, y0 = 360, y1 = 24;
  const auto sx = [&](double stage) {
    return max_stage == 1 ? (x0 + x1) / 2
                          : x0 + (stage - 1) / (max_stage - 1) * (x1 - x0);
  };
  const auto sy = [&](double v) {
    return y0 - (v - ymin) / (ymax - ymin) * (y0 - y1);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"400\" viewBox=\"0 0 640 400\">\n";
  out << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  out << "<text x=\"320\" y=\"16\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"13\">"
      << title << "</text>\n";
  out << "<line x1=\"" << svg_num(x0) << "\" y1=\"" << svg_num(y0)
      << "\" x2=\"" << svg_num(x1) << "\" y2=\"" << svg_num(y0)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << svg_num(x0) << "\" y1=\"" << svg_num(y0)
      << "\" x2=\"" << svg_num(x0) << "\" y2=\"" << svg_num(y1)
      << "\" stroke=\"black\"/>\n";

  for (int tick = 0; tick <= 4; ++tick) {
    const double v = ymin + (ymax - ymin) * tick / 4;
    const double y = sy(v);
    out << "<line x1=\"" << svg_num(x0 - 4) << "\" y1=\"" << svg_num(y)
        << "\" x2=\"" << svg_num(x0) << "\" y2=\"" << svg_num(y)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << svg_num(x0 - 8) << "\" y=\"" << svg_num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << svg_num(v) << "</text>\n";
  }
  const int step = std::max(1, (max_stage + 9) / 10);
  for (int stage = 1; stage <= max_stage; stage += step) {
    const double x = sx(stage);
    out << "<line x1=\"" << svg_num(x) << "\" y1=\"" << svg_num(y0)
        << "\" x2=\"" << svg_num(x) << "\" y2=\"" << svg_num(y0 + 4)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << svg_num(x) << "\" y=\"" << svg_num(y0 + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << stage << "</text>\n";
  }
  out << "<text x=\"340\" y=\"392\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\">stage</text>\n";
  out << "<text x=\"14\" y=\"192\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 14 192)\">mean inferred reward</text>\n";

  int legend = 0;
  for (const std::string& method : order) {
    const char* color = method_color(method);
    const auto& points = series.at(method);
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (const auto& [stage, v] : points)
      out << svg_num(sx(stage)) << ',' << svg_num(sy(v)) << ' ';
    out << "\"/>\n";
    for (const auto& [stage, v] : points)
      out << "<circle cx=\"" << svg_num(sx(stage)) << "\" cy=\""
          << svg_num(sy(v)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = y1 + 14 + 16 * legend++;
    out << "<line x1=\"" << svg_num(x0 + 12) << "\" y1=\"" << svg_num(ly - 4)
        << "\" x2=\"" << svg_num(x0 + 36) << "\" y2=\"" << svg_num(ly - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << svg_num(x0 + 42) << "\" y=\"" << svg_num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << method
        << "</text>\n";
  }
  out << "</svg>\n";
}

namespace {

struct TrialResult {
  SearchTrace trace{"", {}, {}, {}};
  std::string error;
  bool ok = false;
};

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TrialError("cannot open '" + path.string() + "' for write");
  out << body;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  struct Job {
    std::string method;
    long long seed;
  };
  std::vector<Job> jobs;
  for (const std::string& method : spec.methods)
    for (const long long seed : spec.seeds) jobs.push_back({method, seed});

  std::vector<TrialResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i].trace = run_trial(spec, jobs[i].method, jobs[i].seed);
        results[i].ok = true;
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  const std::size_t pool = std::min<std::size_t>(
      static_cast<std::size_t>(spec.parallelism), jobs.size());
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }

  // All output is written here, on the coordinating thread, in job order.
  const std::filesystem::path dir(spec.output_dir);
  std::filesystem::create_directories(dir);

  std::ostringstream summary_csv;
  write_stage_summary_header(summary_csv);
  std::vector<StageSummaryRecord> records;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!results[i].ok) continue;
    const SearchTrace& trace = results[i].trace;
    std::ostringstream trace_csv;
    write_trace_csv(trace_csv, trace, jobs[i].seed);
    write_file(dir / ("trace_" + jobs[i].method + "_" +
                      std::to_string(jobs[i].seed) + ".csv"),
               trace_csv.str());
    append_stage_summary(summary_csv, trace, jobs[i].seed);
    for (const StageInference& s : trace.stages)
      records.push_back(StageSummaryRecord{jobs[i].seed, trace.method, s});
  }
  write_file(dir / "stage_summary.csv", summary_csv.str());

  ExperimentSummary summary;
  if (!records.empty()) {
    summary = summarize(records, spec.methods);
    std::ostringstream stats_csv;
    write_stats_csv(stats_csv, summary);
    write_file(dir / "stats.csv", stats_csv.str());
    std::ostringstream svg;
    write_plot_svg(svg, spec.name, summary);
    write_file(dir / "plot.svg", svg.str());
  }

  std::string failures;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (results[i].ok) continue;
    if (!failures.empty()) failures += "; ";
    failures += "method=" + jobs[i].method +
                " seed=" + std::to_string(jobs[i].seed) + ": " +
                results[i].error;
  }
  if (!failures.empty())
    throw TrialError("experiment '" + spec.name + "' had failing trials: " +
                     failures);
  return summary;
}

}  // namespace cnas
