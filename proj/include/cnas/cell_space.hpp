#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cnas/errors.hpp"
#include "cnas/rng.hpp"

namespace cnas {

using BigInt = boost::multiprecision::cpp_int;

// One candidate operation of the cell catalog. has_params marks operations
// with trainable parameters (convolutions); a valid catalog starts with one
// of those, since a cell made only of parameter-free operations cannot train.
struct OperationSpec {
  std::string id;
  bool has_params = false;

  bool operator==(const OperationSpec&) const = default;
};

// The standard 8-operation convolutional cell catalog.
std::vector<OperationSpec> default_operation_catalog();

// Shape of a cell search space: B total nodes per cell (2 inputs, B-3
// intermediates, 1 output), G independently searched cell groups (e.g. 2 for
// a normal + reduction pair), and the ordered operation catalog.
class SpaceShape {
 public:
  SpaceShape(int total_nodes, int cell_groups,
             std::vector<OperationSpec> operations);

  int total_nodes() const { return total_nodes_; }
  int cell_groups() const { return cell_groups_; }
  int intermediate_nodes() const { return total_nodes_ - 3; }
  const std::vector<OperationSpec>& operations() const { return operations_; }
  int num_operations() const { return static_cast<int>(operations_.size()); }

  // Index of an operation id in the catalog; ValidationError if absent.
  int operation_index(const std::string& id) const;

  // Same shape with a different node count / operation list.
  SpaceShape with_total_nodes(int total_nodes) const;
  SpaceShape with_operations(std::vector<OperationSpec> operations) const;

  bool operator==(const SpaceShape&) const = default;

 private:
  int total_nodes_;
  int cell_groups_;
  std::vector<OperationSpec> operations_;
};

// A stage of the curriculum: only the first active_ops operations of the
// shape's catalog are admissible.
class SearchSpaceStage {
 public:
  SearchSpaceStage(SpaceShape shape, int active_ops);

  const SpaceShape& shape() const { return shape_; }
  int active_ops() const { return active_ops_; }

  bool operator==(const SearchSpaceStage&) const = default;

 private:
  SpaceShape shape_;
  int active_ops_;
};

// One incoming edge of an intermediate node: which previous node feeds it and
// which operation is applied on it.
struct Edge {
  int input = 0;
  int op = 0;

  bool operator==(const Edge&) const = default;
};

// A concrete cell DAG. groups[g][k] holds the two ordered edges of
// intermediate node k (DAG node index k + 2) of cell group g. The pair is
// ordered and both edges may name the same predecessor.
struct Architecture {
  std::vector<std::vector<std::array<Edge, 2>>> groups;

  int num_groups() const { return static_cast<int>(groups.size()); }
  int num_nodes() const {
    return groups.empty() ? 0 : static_cast<int>(groups.front().size());
  }

  bool operator==(const Architecture&) const = default;
};

// One categorical decision in the canonical slot order: group-major, then
// intermediate node, then {input 0, op 0, input 1, op 1}.
struct DecisionSlot {
  int group = 0;
  int node = 0;      // intermediate node index; its DAG node index is node + 2
  int position = 0;  // 0: input 0, 1: op 0, 2: input 1, 3: op 1
  bool is_op = false;
  int choices = 0;   // node + 2 for input slots, active_ops for op slots
};

// The stage's decision slots in canonical order.
std::vector<DecisionSlot> decision_slots(const SearchSpaceStage& stage);

int slot_value(const Architecture& arch, const DecisionSlot& slot);
void set_slot_value(Architecture& arch, const DecisionSlot& slot, int value);

// Throws ValidationError unless arch is exactly a member of the stage's space.
void validate_architecture(const Architecture& arch,
                           const SearchSpaceStage& stage);

// Exact size of the stage's space: per cell group i^(2(B-3)) * ((B-2)!)^2,
// raised to the number of groups.
BigInt space_size(const SearchSpaceStage& stage);

// Every architecture of the stage, in lexicographic order over the canonical
// decision sequence. SpaceTooLarge if the space exceeds limit.
std::vector<Architecture> enumerate_space(const SearchSpaceStage& stage,
                                          std::int64_t limit);

// Canonical text encoding: cell groups joined by "||", nodes joined by "|",
// one node rendered as "in:op,in:op" with 0-based decimal indices in slot
// order. Example for B=5, one group: "0:1,1:0|2:1,0:0".
std::string encode(const Architecture& arch);

// Inverse of encode, validated against the stage. ParseError on malformed
// text, ValidationError on out-of-range indices.
Architecture decode(const std::string& text, const SearchSpaceStage& stage);

// Each decision drawn independently and uniformly; the result is exactly
// uniform over the stage's space.
Architecture uniform_sample(const SearchSpaceStage& stage, Rng& rng);

}  // namespace cnas
