#include "cnas/reward.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cnas {

void validate_for_shape(const Architecture& arch, const SpaceShape& shape) {
  if (arch.num_groups() != shape.cell_groups())
    throw ShapeMismatch("architecture has " +
                        std::to_string(arch.num_groups()) +
                        " cell groups, oracle shape expects " +
                        std::to_string(shape.cell_groups()));
  if (arch.num_nodes() < 1 || arch.num_nodes() > shape.intermediate_nodes())
    throw ShapeMismatch("architecture has " + std::to_string(arch.num_nodes()) +
                        " intermediate nodes, oracle shape allows 1.." +
                        std::to_string(shape.intermediate_nodes()));
  for (const auto& group : arch.groups) {
    if (static_cast<int>(group.size()) != arch.num_nodes())
      throw ShapeMismatch("cell groups disagree on node count");
    for (std::size_t k = 0; k < group.size(); ++k) {
      for (const Edge& e : group[k]) {
        if (e.input < 0 || e.input >= static_cast<int>(k) + 2)
          throw ShapeMismatch("input index " + std::to_string(e.input) +
                              " invalid for intermediate node " +
                              std::to_string(k));
        if (e.op < 0 || e.op >= shape.num_operations())
          throw ShapeMismatch("operation index " + std::to_string(e.op) +
                              " outside the catalog of " +
                              std::to_string(shape.num_operations()));
      }
    }
  }
}

void PlantedLandscapeConfig::validate() const {
  // Strictly positive bonuses make the planted architecture the unique
  // noiseless optimum.
  if (!(op_match_bonus > 0.0))
    throw ValidationError("PlantedLandscapeConfig: op_match_bonus must be > 0");
  if (!(input_match_bonus > 0.0))
    throw ValidationError(
        "PlantedLandscapeConfig: input_match_bonus must be > 0");
  if (!(noise_sigma >= 0.0))
    throw ValidationError("PlantedLandscapeConfig: noise_sigma must be >= 0");
}

PlantedLandscape::PlantedLandscape(SpaceShape shape, Architecture planted,
                                   PlantedLandscapeConfig config)
    : shape_(std::move(shape)),
      planted_(std::move(planted)),
      config_(config) {
  config_.validate();
  validate_for_shape(planted_, shape_);
  if (planted_.num_nodes() != shape_.intermediate_nodes())
    throw ValidationError("planted architecture must span the full shape");
}

namespace {

Architecture draw_full_architecture(const SpaceShape& shape,
                                    std::uint64_t seed) {
  Rng rng(seed);
  return uniform_sample(SearchSpaceStage(shape, shape.num_operations()), rng);
}

}  // namespace

PlantedLandscape::PlantedLandscape(SpaceShape shape, std::uint64_t seed,
                                   PlantedLandscapeConfig config)
    : PlantedLandscape(shape, draw_full_architecture(shape, seed), config) {}

double PlantedLandscape::noiseless(const Architecture& arch) const {
  validate_for_shape(arch, shape_);
  double total = 0.0;
  int edges = 0;
  for (int g = 0; g < arch.num_groups(); ++g) {
    for (int k = 0; k < arch.num_nodes(); ++k) {
      for (int slot = 0; slot < 2; ++slot) {
        const Edge& e = arch.groups[g][k][slot];
        const Edge& want = planted_.groups[g][k][slot];
        if (e.op == want.op) total += config_.op_match_bonus;
        if (e.input == want.input) total += config_.input_match_bonus;
        ++edges;
      }
    }
  }
  return total / edges;
}

double PlantedLandscape::evaluate(const Architecture& arch, Rng& rng) {
  double reward = noiseless(arch);
  if (config_.noise_sigma > 0.0)
    reward += rng.normal(0.0, config_.noise_sigma);
  return reward;
}

void SurrogateSupernetConfig::validate() const {
  if (!(train_rate > 0.0) || !(train_rate <= 1.0))
    throw ValidationError("SurrogateSupernetConfig: train_rate must be in (0,1]");
  if (!(input_match_bonus >= 0.0))
    throw ValidationError(
        "SurrogateSupernetConfig: input_match_bonus must be >= 0");
  if (!(eval_noise_sigma >= 0.0))
    throw ValidationError(
        "SurrogateSupernetConfig: eval_noise_sigma must be >= 0");
}

SurrogateSupernet::SurrogateSupernet(SpaceShape shape, std::uint64_t seed,
                                     SurrogateSupernetConfig config)
    : shape_(std::move(shape)), config_(std::move(config)) {
  config_.validate();
  int boosted = -1;
  if (!config_.planted_op.empty())
    boosted = shape_.operation_index(config_.planted_op);

  const int groups = shape_.cell_groups();
  const int nodes = shape_.intermediate_nodes();
  const int ops = shape_.num_operations();
  ceilings_.resize(static_cast<std::size_t>(groups) * nodes * 2 * ops);
  proficiency_.assign(ceilings_.size(), 0.0);
  planted_inputs_.resize(static_cast<std::size_t>(groups) * nodes * 2);

  // Draw order is part of the determinism contract: ceilings first
  // (group, node, slot, op nested loops), then planted inputs.
  Rng rng(seed);
  for (int g = 0; g < groups; ++g)
    for (int k = 0; k < nodes; ++k)
      for (int slot = 0; slot < 2; ++slot)
        for (int op = 0; op < ops; ++op) {
          const double u = rng.uniform();
          ceilings_[pair_index(g, k, slot, op)] =
              boosted < 0 ? u : (op == boosted ? 0.9 + 0.1 * u : 0.85 * u);
        }
  for (int g = 0; g < groups; ++g)
    for (int k = 0; k < nodes; ++k)
      for (int slot = 0; slot < 2; ++slot)
        planted_inputs_[edge_index(g, k, slot)] = rng.uniform_int(k + 2);
}

std::size_t SurrogateSupernet::edge_index(int group, int node,
                                          int slot) const {
  return (static_cast<std::size_t>(group) * shape_.intermediate_nodes() +
          node) *
             2 +
         slot;
}

std::size_t SurrogateSupernet::pair_index(int group, int node, int slot,
                                          int op) const {
  return edge_index(group, node, slot) * shape_.num_operations() + op;
}

double SurrogateSupernet::ceiling(int group, int node, int slot,
                                  int op) const {
  return ceilings_[pair_index(group, node, slot, op)];
}

double SurrogateSupernet::proficiency(int group, int node, int slot,
                                      int op) const {
  return proficiency_[pair_index(group, node, slot, op)];
}

int SurrogateSupernet::planted_input(int group, int node, int slot) const {
  return planted_inputs_[edge_index(group, node, slot)];
}

double SurrogateSupernet::evaluate(const Architecture& arch, Rng& rng) {
  validate_for_shape(arch, shape_);
  double total = 0.0;
  int edges = 0;
  for (int g = 0; g < arch.num_groups(); ++g) {
    for (int k = 0; k < arch.num_nodes(); ++k) {
      for (int slot = 0; slot < 2; ++slot) {
        const Edge& e = arch.groups[g][k][slot];
        total += proficiency_[pair_index(g, k, slot, e.op)];
        if (e.input == planted_inputs_[edge_index(g, k, slot)])
          total += config_.input_match_bonus;
        ++edges;
      }
    }
  }
  double reward = total / edges;
  if (config_.eval_noise_sigma > 0.0)
    reward += rng.normal(0.0, config_.eval_noise_sigma);
  return reward;
}

void SurrogateSupernet::train_step(const Architecture& arch) {
  validate_for_shape(arch, shape_);
  for (int g = 0; g < arch.num_groups(); ++g)
    for (int k = 0; k < arch.num_nodes(); ++k)
      for (int slot = 0; slot < 2; ++slot) {
        const Edge& e = arch.groups[g][k][slot];
        double& p = proficiency_[pair_index(g, k, slot, e.op)];
        p += config_.train_rate * (ceilings_[pair_index(g, k, slot, e.op)] - p);
      }
}

void SurrogateSupernet::reset_training() {
  std::fill(proficiency_.begin(), proficiency_.end(), 0.0);
}

Architecture SurrogateSupernet::best_architecture() const {
  Architecture arch;
  arch.groups.assign(shape_.cell_groups(),
                     std::vector<std::array<Edge, 2>>(
                         shape_.intermediate_nodes()));
  for (int g = 0; g < shape_.cell_groups(); ++g)
    for (int k = 0; k < shape_.intermediate_nodes(); ++k)
      for (int slot = 0; slot < 2; ++slot) {
        int best_op = 0;
        for (int op = 1; op < shape_.num_operations(); ++op)
          if (ceiling(g, k, slot, op) > ceiling(g, k, slot, best_op))
            best_op = op;
        arch.groups[g][k][slot] =
            Edge{planted_inputs_[edge_index(g, k, slot)], best_op};
      }
  return arch;
}

TabularOracle::TabularOracle(SpaceShape shape,
                             std::map<std::string, double> table,
                             std::string source_note)
    : shape_(std::move(shape)),
      table_(std::move(table)),
      source_note_(std::move(source_note)) {
  const SearchSpaceStage full(shape_, shape_.num_operations());
  for (const auto& [key, reward] : table_) {
    (void)reward;
    decode(key, full);  // ParseError / ValidationError on a bad key
  }
}

double TabularOracle::evaluate(const Architecture& arch, Rng&) {
  validate_for_shape(arch, shape_);
  const std::string key = encode(arch);
  const auto it = table_.find(key);
  if (it == table_.end())
    throw UnknownArchitecture("architecture '" + key +
                              "' is not in the benchmark table");
  return it->second;
}

namespace {

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_reward(const std::string& token) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError("oracle file: bad reward '" + token + "'");
  }
}

// The file stores operation ids only. Parameter flags are recovered from the
// default catalog where the id is known; otherwise only the leading
// operation is assumed parametric (the shape invariant requires that much).
std::vector<OperationSpec> ops_from_ids(const std::vector<std::string>& ids) {
  const auto catalog = default_operation_catalog();
  std::vector<OperationSpec> ops;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    bool has_params = i == 0;
    for (const auto& known : catalog)
      if (known.id == ids[i]) {
        has_params = known.has_params;
        break;
      }
    ops.push_back({ids[i], has_params});
  }
  return ops;
}

}  // namespace

void TabularOracle::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ParseError("oracle file: cannot open '" + path + "' for writing");
  out << "shape B=" << shape_.total_nodes() << " G=" << shape_.cell_groups()
      << " K=" << shape_.num_operations() << " ops=";
  for (int i = 0; i < shape_.num_operations(); ++i) {
    if (i) out << ',';
    out << shape_.operations()[i].id;
  }
  out << "\n";
  char buf[40];
  for (const auto& [key, reward] : table_) {
    std::snprintf(buf, sizeof buf, "%.17g", reward);
    out << key << '\t' << buf << "\n";
  }
}

TabularOracle TabularOracle::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("oracle file: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw ParseError("oracle file: empty file '" + path + "'");
  int total_nodes = 0, groups = 0, catalog = 0;
  char ops_buf[4096] = {0};
  if (std::sscanf(line.c_str(), "shape B=%d G=%d K=%d ops=%4095s",
                  &total_nodes, &groups, &catalog, ops_buf) != 4)
    throw ParseError("oracle file: malformed header '" + line + "'");
  const auto ids = split_on(ops_buf, ',');
  if (static_cast<int>(ids.size()) != catalog)
    throw ParseError("oracle file: ops list does not match K");

  SpaceShape shape(total_nodes, groups, ops_from_ids(ids));
  std::map<std::string, double> table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_on(line, '\t');
    if (fields.size() != 2)
      throw ParseError("oracle file: line " + std::to_string(lineno) +
                       " is not 'encoding<TAB>reward'");
    if (!table.emplace(fields[0], parse_reward(fields[1])).second)
      throw ParseError("oracle file: duplicate encoding at line " +
                       std::to_string(lineno));
  }
  try {
    return TabularOracle(std::move(shape), std::move(table));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError("oracle file '" + path + "': " + e.what());
  }
}

}  // namespace cnas
