#include "cnas/cell_space.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

namespace cnas {

namespace {

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

std::vector<OperationSpec> default_operation_catalog() {
  return {
      {"sep_conv_3x3", true}, {"sep_conv_5x5", true}, {"max_pool_3x3", false},
      {"avg_pool_3x3", false}, {"dil_conv_3x3", true}, {"dil_conv_5x5", true},
      {"identity", false},    {"none", false},
  };
}

SpaceShape::SpaceShape(int total_nodes, int cell_groups,
                       std::vector<OperationSpec> operations)
    : total_nodes_(total_nodes),
      cell_groups_(cell_groups),
      operations_(std::move(operations)) {
  if (total_nodes_ < 4)
    throw ValidationError("SpaceShape: total_nodes must be >= 4, got " +
                          std::to_string(total_nodes_));
  if (cell_groups_ < 1)
    throw ValidationError("SpaceShape: cell_groups must be >= 1, got " +
                          std::to_string(cell_groups_));
  if (operations_.empty())
    throw ValidationError("SpaceShape: operation list is empty");
  std::unordered_set<std::string> seen;
  for (const auto& op : operations_) {
    // Ids appear verbatim in text formats, so restrict them to safe tokens.
    if (!valid_id(op.id))
      throw ValidationError("SpaceShape: invalid operation id '" + op.id +
                            "' (allowed: [A-Za-z0-9_.-]+)");
    if (!seen.insert(op.id).second)
      throw ValidationError("SpaceShape: duplicate operation id '" + op.id +
                            "'");
  }
  if (!operations_.front().has_params)
    throw ValidationError(
        "SpaceShape: the first operation must have trainable parameters, '" +
        operations_.front().id + "' does not");
}

int SpaceShape::operation_index(const std::string& id) const {
  for (int i = 0; i < num_operations(); ++i)
    if (operations_[i].id == id) return i;
  throw ValidationError("SpaceShape: unknown operation id '" + id + "'");
}

SpaceShape SpaceShape::with_total_nodes(int total_nodes) const {
  return SpaceShape(total_nodes, cell_groups_, operations_);
}

SpaceShape SpaceShape::with_operations(
    std::vector<OperationSpec> operations) const {
  return SpaceShape(total_nodes_, cell_groups_, std::move(operations));
}

SearchSpaceStage::SearchSpaceStage(SpaceShape shape, int active_ops)
    : shape_(std::move(shape)), active_ops_(active_ops) {
  if (active_ops_ < 1 || active_ops_ > shape_.num_operations())
    throw ValidationError("SearchSpaceStage: active_ops must be in [1, " +
                          std::to_string(shape_.num_operations()) + "], got " +
                          std::to_string(active_ops_));
}

std::vector<DecisionSlot> decision_slots(const SearchSpaceStage& stage) {
  std::vector<DecisionSlot> slots;
  const int groups = stage.shape().cell_groups();
  const int nodes = stage.shape().intermediate_nodes();
  slots.reserve(static_cast<std::size_t>(groups) * nodes * 4);
  for (int g = 0; g < groups; ++g) {
    for (int k = 0; k < nodes; ++k) {
      for (int pos = 0; pos < 4; ++pos) {
        const bool is_op = (pos % 2) == 1;
        slots.push_back({g, k, pos, is_op,
                         is_op ? stage.active_ops() : k + 2});
      }
    }
  }
  return slots;
}

int slot_value(const Architecture& arch, const DecisionSlot& slot) {
  const Edge& e = arch.groups[slot.group][slot.node][slot.position / 2];
  return slot.position % 2 == 0 ? e.input : e.op;
}

void set_slot_value(Architecture& arch, const DecisionSlot& slot, int value) {
  Edge& e = arch.groups[slot.group][slot.node][slot.position / 2];
  (slot.position % 2 == 0 ? e.input : e.op) = value;
}

void validate_architecture(const Architecture& arch,
                           const SearchSpaceStage& stage) {
  const int groups = stage.shape().cell_groups();
  const int nodes = stage.shape().intermediate_nodes();
  if (arch.num_groups() != groups)
    throw ValidationError("architecture has " +
                          std::to_string(arch.num_groups()) +
                          " cell groups, stage expects " +
                          std::to_string(groups));
  for (int g = 0; g < groups; ++g) {
    if (static_cast<int>(arch.groups[g].size()) != nodes)
      throw ValidationError("cell group " + std::to_string(g) + " has " +
                            std::to_string(arch.groups[g].size()) +
                            " intermediate nodes, stage expects " +
                            std::to_string(nodes));
    for (int k = 0; k < nodes; ++k) {
      for (const Edge& e : arch.groups[g][k]) {
        if (e.input < 0 || e.input >= k + 2)
          throw ValidationError("node " + std::to_string(k + 2) +
                                ": input index " + std::to_string(e.input) +
                                " not in [0, " + std::to_string(k + 2) + ")");
        if (e.op < 0 || e.op >= stage.active_ops())
          throw ValidationError("node " + std::to_string(k + 2) +
                                ": op index " + std::to_string(e.op) +
                                " not admitted at stage with active_ops=" +
                                std::to_string(stage.active_ops()));
      }
    }
  }
}

BigInt space_size(const SearchSpaceStage& stage) {
  const int nodes = stage.shape().intermediate_nodes();
  BigInt per_group = boost::multiprecision::pow(
      BigInt(stage.active_ops()), static_cast<unsigned>(2 * nodes));
  for (int k = 0; k < nodes; ++k) {
    const BigInt inputs = BigInt(k + 2) * (k + 2);
    per_group *= inputs;
  }
  return boost::multiprecision::pow(
      per_group, static_cast<unsigned>(stage.shape().cell_groups()));
}

std::vector<Architecture> enumerate_space(const SearchSpaceStage& stage,
                                          std::int64_t limit) {
  const BigInt size = space_size(stage);
  if (limit < 0 || size > limit)
    throw SpaceTooLarge("space size " + size.str() + " exceeds limit " +
                        std::to_string(limit));

  const auto slots = decision_slots(stage);
  Architecture arch;
  arch.groups.assign(
      stage.shape().cell_groups(),
      std::vector<std::array<Edge, 2>>(stage.shape().intermediate_nodes()));

  std::vector<Architecture> out;
  out.reserve(size.convert_to<std::size_t>());
  std::vector<int> values(slots.size(), 0);
  for (;;) {
    for (std::size_t d = 0; d < slots.size(); ++d)
      set_slot_value(arch, slots[d], values[d]);
    out.push_back(arch);
    // Odometer with the last decision fastest: lexicographic output order.
    int d = static_cast<int>(slots.size()) - 1;
    while (d >= 0 && values[d] + 1 == slots[d].choices) values[d--] = 0;
    if (d < 0) break;
    ++values[d];
  }
  return out;
}

std::string encode(const Architecture& arch) {
  std::ostringstream out;
  for (int g = 0; g < arch.num_groups(); ++g) {
    if (g > 0) out << "||";
    const auto& group = arch.groups[g];
    for (std::size_t k = 0; k < group.size(); ++k) {
      if (k > 0) out << '|';
      out << group[k][0].input << ':' << group[k][0].op << ','
          << group[k][1].input << ':' << group[k][1].op;
    }
  }
  return out.str();
}

namespace {

// Splits on a literal separator; "a||b" with "||" gives {"a", "b"}.
std::vector<std::string> split(const std::string& text,
                               const std::string& sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + sep.size();
  }
}

int parse_index(const std::string& token) {
  if (token.empty())
    throw ParseError("architecture encoding: empty index");
  for (unsigned char c : token)
    if (!std::isdigit(c))
      throw ParseError("architecture encoding: '" + token +
                       "' is not a decimal index");
  if (token.size() > 9)
    throw ParseError("architecture encoding: index '" + token +
                     "' out of range");
  return std::stoi(token);
}

Edge parse_edge(const std::string& token) {
  const auto parts = split(token, ":");
  if (parts.size() != 2)
    throw ParseError("architecture encoding: edge '" + token +
                     "' is not 'input:op'");
  return Edge{parse_index(parts[0]), parse_index(parts[1])};
}

}  // namespace

Architecture decode(const std::string& text, const SearchSpaceStage& stage) {
  Architecture arch;
  for (const std::string& group_text : split(text, "||")) {
    std::vector<std::array<Edge, 2>> group;
    for (const std::string& node_text : split(group_text, "|")) {
      const auto edges = split(node_text, ",");
      if (edges.size() != 2)
        throw ParseError("architecture encoding: node '" + node_text +
                         "' does not have exactly two edges");
      group.push_back({parse_edge(edges[0]), parse_edge(edges[1])});
    }
    arch.groups.push_back(std::move(group));
  }
  validate_architecture(arch, stage);
  return arch;
}

Architecture uniform_sample(const SearchSpaceStage& stage, Rng& rng) {
  Architecture arch;
  arch.groups.assign(
      stage.shape().cell_groups(),
      std::vector<std::array<Edge, 2>>(stage.shape().intermediate_nodes()));
  for (const DecisionSlot& slot : decision_slots(stage))
    set_slot_value(arch, slot, rng.uniform_int(slot.choices));
  return arch;
}

}  // namespace cnas
