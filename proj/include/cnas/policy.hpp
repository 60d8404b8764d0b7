#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "cnas/cell_space.hpp"

namespace cnas {

// Hyperparameters of one REINFORCE ascent step.
struct PolicyUpdateConfig {
  double learning_rate = 0.1;
  double entropy_weight = 0.005;
  double baseline_decay = 0.95;

  void validate() const;
};

// Exponential moving average of batch mean rewards. The pre-update value is
// the advantage baseline; it starts at 0 so early advantages equal rewards.
struct RewardBaseline {
  double value = 0.0;
};

// The controller: one independent categorical distribution per decision slot,
// parameterized by logits. Operation slots store a logit per catalog entry
// but only the first active_ops are admitted; masked entries keep zero
// probability and zero gradient.
class FactorizedPolicy {
 public:
  explicit FactorizedPolicy(SearchSpaceStage stage);

  const SearchSpaceStage& stage() const { return stage_; }
  const std::vector<DecisionSlot>& slots() const { return slots_; }

  // Admitted-choice probabilities of one slot (length = slot.choices).
  std::vector<double> probabilities(std::size_t slot_index) const;

  // Raw stored logits; operation slots have catalog length, input slots have
  // admitted length. Exposed for extension and serialization tests.
  const std::vector<std::vector<double>>& logits() const { return logits_; }

  // Sets one admitted logit; ValidationError on a masked or absent choice.
  void set_logit(std::size_t slot_index, int choice, double value);

  Architecture sample(Rng& rng) const;

  // Exact log pi(arch); ValidationError if arch is invalid in the stage.
  double log_prob(const Architecture& arch) const;

  // Exact policy entropy in nats: sum of per-slot categorical entropies.
  double entropy() const;

  // Number of admitted logit coordinates (the trainable parameters).
  std::size_t param_count() const;

  // Gradients over the flattened admitted coordinates, slot-major in
  // canonical order. Masked operation logits have no coordinate.
  std::vector<double> log_prob_gradient(const Architecture& arch) const;
  std::vector<double> entropy_gradient() const;

  // One ascent step: mean of (reward - baseline) grad log pi over the batch
  // plus entropy_weight * grad H, scaled by learning_rate. The baseline is
  // read before and advanced after the step.
  void reinforce_step(
      const std::vector<std::pair<Architecture, double>>& samples,
      const PolicyUpdateConfig& config, RewardBaseline& baseline);

  // Curriculum transfer: admit one more operation. Input logits and
  // previously admitted op logits are preserved bit-exactly; the new op's
  // logit is the mean of the previously admitted ones.
  FactorizedPolicy extend_operation(const SearchSpaceStage& next) const;

  // Node curriculum: add one intermediate node. Existing slots keep their
  // logits bit-exactly; the new node's slots start uniform.
  FactorizedPolicy extend_nodes(const SearchSpaceStage& next) const;

  // Versioned plain-text checkpoint; bit-exact round trip.
  void save_text(std::ostream& out) const;
  static FactorizedPolicy load_text(std::istream& in);

  bool operator==(const FactorizedPolicy& other) const {
    return stage_ == other.stage_ && logits_ == other.logits_;
  }

 private:
  FactorizedPolicy(SearchSpaceStage stage,
                   std::vector<std::vector<double>> logits);

  // Softmax over the admitted prefix of slot d's logits.
  std::vector<double> slot_probs(std::size_t d) const;

  SearchSpaceStage stage_;
  std::vector<DecisionSlot> slots_;
  std::vector<std::vector<double>> logits_;
};

}  // namespace cnas
