#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cnas/cell_space.hpp"

namespace cnas {

// Structural check an oracle applies before scoring. Prefix architectures
// (fewer intermediate nodes than the shape, as the node curriculum produces)
// are accepted; operation indices are checked against the full catalog.
void validate_for_shape(const Architecture& arch, const SpaceShape& shape);

// Common evaluation interface standing in for trained-network accuracy.
// evaluate() is the validation reward (may add noise from the caller's rng);
// train_step() advances shared-weight state on trainable oracles and is a
// no-op otherwise.
class RewardOracle {
 public:
  virtual ~RewardOracle() = default;

  virtual const SpaceShape& shape() const = 0;
  virtual double evaluate(const Architecture& arch, Rng& rng) = 0;
  virtual void train_step(const Architecture& arch) = 0;
  virtual bool trainable() const = 0;

  // Restores the just-constructed training state (latent task unchanged).
  virtual void reset_training() = 0;
};

struct PlantedLandscapeConfig {
  double op_match_bonus = 0.7;
  double input_match_bonus = 0.3;
  double noise_sigma = 0.02;

  void validate() const;
};

// Closed-form landscape with a constructed optimum: reward is the mean over
// edges of op/input match bonuses against a planted architecture, plus
// Gaussian evaluation noise. Both bonuses are strictly positive, so the
// planted architecture is the unique noiseless argmax.
class PlantedLandscape final : public RewardOracle {
 public:
  PlantedLandscape(SpaceShape shape, Architecture planted,
                   PlantedLandscapeConfig config = {});

  // Draws the planted architecture uniformly over the full catalog space.
  PlantedLandscape(SpaceShape shape, std::uint64_t seed,
                   PlantedLandscapeConfig config = {});

  const SpaceShape& shape() const override { return shape_; }
  const Architecture& planted() const { return planted_; }
  const PlantedLandscapeConfig& config() const { return config_; }

  double noiseless(const Architecture& arch) const;
  double evaluate(const Architecture& arch, Rng& rng) override;
  void train_step(const Architecture&) override {}
  bool trainable() const override { return false; }
  void reset_training() override {}

 private:
  SpaceShape shape_;
  Architecture planted_;
  PlantedLandscapeConfig config_;
};

struct SurrogateSupernetConfig {
  double train_rate = 0.1;
  double input_match_bonus = 0.3;
  double eval_noise_sigma = 0.02;

  // When set, this operation's latent ceilings are drawn from [0.9, 1.0) and
  // all others from [0, 0.85), planting the optimum on it (warmup ablation).
  std::string planted_op;

  void validate() const;
};

// Shared-weight surrogate: each (cell group, node, edge slot, operation)
// carries a latent quality ceiling and a proficiency that training moves
// geometrically toward the ceiling. Topology quality is a bonus for hitting
// planted preferred inputs, so the full-training optimum is decomposable and
// known in closed form.
class SurrogateSupernet final : public RewardOracle {
 public:
  SurrogateSupernet(SpaceShape shape, std::uint64_t seed,
                    SurrogateSupernetConfig config = {});

  const SpaceShape& shape() const override { return shape_; }
  const SurrogateSupernetConfig& config() const { return config_; }

  double ceiling(int group, int node, int slot, int op) const;
  double proficiency(int group, int node, int slot, int op) const;
  int planted_input(int group, int node, int slot) const;

  double evaluate(const Architecture& arch, Rng& rng) override;
  void train_step(const Architecture& arch) override;
  bool trainable() const override { return true; }
  void reset_training() override;

  // The noiseless optimum at full training: per-edge ceiling argmax plus
  // planted inputs.
  Architecture best_architecture() const;

 private:
  std::size_t edge_index(int group, int node, int slot) const;
  std::size_t pair_index(int group, int node, int slot, int op) const;

  SpaceShape shape_;
  SurrogateSupernetConfig config_;
  std::vector<double> ceilings_;
  std::vector<double> proficiency_;
  std::vector<int> planted_inputs_;
};

// NAS-bench-style lookup table keyed by canonical encoding.
class TabularOracle final : public RewardOracle {
 public:
  TabularOracle(SpaceShape shape, std::map<std::string, double> table,
                std::string source_note = "");

  static TabularOracle load(const std::string& path);
  void save(const std::string& path) const;

  const SpaceShape& shape() const override { return shape_; }
  const std::map<std::string, double>& table() const { return table_; }
  const std::string& source_note() const { return source_note_; }

  double evaluate(const Architecture& arch, Rng& rng) override;
  void train_step(const Architecture&) override {}
  bool trainable() const override { return false; }
  void reset_training() override {}

 private:
  SpaceShape shape_;
  std::map<std::string, double> table_;
  std::string source_note_;
};

}  // namespace cnas
