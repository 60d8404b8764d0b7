#include "cnas/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cnas {

void PolicyUpdateConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw ValidationError("PolicyUpdateConfig: learning_rate must be > 0");
  if (!(entropy_weight >= 0.0))
    throw ValidationError("PolicyUpdateConfig: entropy_weight must be >= 0");
  if (!(baseline_decay >= 0.0) || !(baseline_decay < 1.0))
    throw ValidationError("PolicyUpdateConfig: baseline_decay must be in [0,1)");
}

FactorizedPolicy::FactorizedPolicy(SearchSpaceStage stage)
    : stage_(std::move(stage)), slots_(decision_slots(stage_)) {
  logits_.reserve(slots_.size());
  for (const DecisionSlot& s : slots_) {
    const int len = s.is_op ? stage_.shape().num_operations() : s.choices;
    logits_.emplace_back(static_cast<std::size_t>(len), 0.0);
  }
}

FactorizedPolicy::FactorizedPolicy(SearchSpaceStage stage,
                                   std::vector<std::vector<double>> logits)
    : stage_(std::move(stage)),
      slots_(decision_slots(stage_)),
      logits_(std::move(logits)) {}

std::vector<double> FactorizedPolicy::slot_probs(std::size_t d) const {
  const int n = slots_[d].choices;
  const std::vector<double>& z = logits_[d];
  double zmax = z[0];
  for (int j = 1; j < n; ++j) zmax = std::max(zmax, z[j]);
  std::vector<double> p(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (int j = 0; j < n; ++j) sum += p[j] = std::exp(z[j] - zmax);
  for (int j = 0; j < n; ++j) p[j] /= sum;
  return p;
}

std::vector<double> FactorizedPolicy::probabilities(
    std::size_t slot_index) const {
  if (slot_index >= slots_.size())
    throw ValidationError("probabilities: slot index out of range");
  return slot_probs(slot_index);
}

void FactorizedPolicy::set_logit(std::size_t slot_index, int choice,
                                 double value) {
  if (slot_index >= slots_.size())
    throw ValidationError("set_logit: slot index out of range");
  if (choice < 0 || choice >= slots_[slot_index].choices)
    throw ValidationError("set_logit: choice " + std::to_string(choice) +
                          " not admitted in slot " +
                          std::to_string(slot_index));
  logits_[slot_index][choice] = value;
}

Architecture FactorizedPolicy::sample(Rng& rng) const {
  Architecture arch;
  arch.groups.assign(stage_.shape().cell_groups(),
                     std::vector<std::array<Edge, 2>>(
                         stage_.shape().intermediate_nodes()));
  for (std::size_t d = 0; d < slots_.size(); ++d) {
    const auto p = slot_probs(d);
    const double u = rng.uniform();
    double cum = 0.0;
    int pick = slots_[d].choices - 1;
    for (int j = 0; j < slots_[d].choices; ++j) {
      cum += p[j];
      if (u < cum) {
        pick = j;
        break;
      }
    }
    set_slot_value(arch, slots_[d], pick);
  }
  return arch;
}

double FactorizedPolicy::log_prob(const Architecture& arch) const {
  validate_architecture(arch, stage_);
  double total = 0.0;
  for (std::size_t d = 0; d < slots_.size(); ++d) {
    const auto p = slot_probs(d);
    total += std::log(p[slot_value(arch, slots_[d])]);
  }
  return total;
}

double FactorizedPolicy::entropy() const {
  double total = 0.0;
  for (std::size_t d = 0; d < slots_.size(); ++d) {
    for (const double pj : slot_probs(d))
      if (pj > 0.0) total -= pj * std::log(pj);
  }
  return total;
}

std::size_t FactorizedPolicy::param_count() const {
  std::size_t n = 0;
  for (const DecisionSlot& s : slots_) n += static_cast<std::size_t>(s.choices);
  return n;
}

std::vector<double> FactorizedPolicy::log_prob_gradient(
    const Architecture& arch) const {
  validate_architecture(arch, stage_);
  std::vector<double> grad(param_count(), 0.0);
  std::size_t off = 0;
  for (std::size_t d = 0; d < slots_.size(); ++d) {
    const auto p = slot_probs(d);
    const int a = slot_value(arch, slots_[d]);
    for (int j = 0; j < slots_[d].choices; ++j)
      grad[off + j] = (j == a ? 1.0 : 0.0) - p[j];
    off += static_cast<std::size_t>(slots_[d].choices);
  }
  return grad;
}

std::vector<double> FactorizedPolicy::entropy_gradient() const {
  std::vector<double> grad(param_count(), 0.0);
  std::size_t off = 0;
  for (std::size_t d = 0; d < slots_.size(); ++d) {
    const auto p = slot_probs(d);
    double h = 0.0;
    for (const double pj : p)
      if (pj > 0.0) h -= pj * std::log(pj);
    // dH/dz_j = -p_j (log p_j + H) for one categorical.
    for (int j = 0; j < slots_[d].choices; ++j)
      grad[off + j] = p[j] > 0.0 ? -p[j] * (std::log(p[j]) + h) : 0.0;
    off += static_cast<std::size_t>(slots_[d].choices);
  }
  return grad;
}

void FactorizedPolicy::reinforce_step(
    const std::vector<std::pair<Architecture, double>>& samples,
    const PolicyUpdateConfig& config, RewardBaseline& baseline) {
  config.validate();
  if (samples.empty())
    throw ValidationError("reinforce_step: empty sample batch");

  std::vector<double> grad(param_count(), 0.0);
  double reward_sum = 0.0;
  for (const auto& [arch, reward] : samples) {
    const double advantage = reward - baseline.value;
    const auto g = log_prob_gradient(arch);
    for (std::size_t j = 0; j < grad.size(); ++j)
      grad[j] += advantage * g[j];
    reward_sum += reward;
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (double& gj : grad) gj *= inv;

  if (config.entropy_weight != 0.0) {
    const auto h = entropy_gradient();
    for (std::size_t j = 0; j < grad.size(); ++j)
      grad[j] += config.entropy_weight * h[j];
  }

  std::size_t off = 0;
  for (std::size_t d = 0; d < slots_.size(); ++d) {
    for (int j = 0; j < slots_[d].choices; ++j)
      logits_[d][j] += config.learning_rate * grad[off + j];
    off += static_cast<std::size_t>(slots_[d].choices);
  }

  baseline.value = config.baseline_decay * baseline.value +
                   (1.0 - config.baseline_decay) * reward_sum * inv;
}

FactorizedPolicy FactorizedPolicy::extend_operation(
    const SearchSpaceStage& next) const {
  if (next.shape() != stage_.shape())
    throw StageMismatch("extend_operation: shape changed across stages");
  if (next.active_ops() != stage_.active_ops() + 1)
    throw StageMismatch("extend_operation: active_ops must advance by 1, " +
                        std::to_string(stage_.active_ops()) + " -> " +
                        std::to_string(next.active_ops()));

  std::vector<std::vector<double>> logits = logits_;
  for (std::size_t d = 0; d < slots_.size(); ++d) {
    if (!slots_[d].is_op) continue;
    const int old_n = stage_.active_ops();
    const double mean =
        std::accumulate(logits[d].begin(), logits[d].begin() + old_n, 0.0) /
        old_n;
    logits[d][old_n] = mean;
  }
  return FactorizedPolicy(next, std::move(logits));
}

FactorizedPolicy FactorizedPolicy::extend_nodes(
    const SearchSpaceStage& next) const {
  const SpaceShape& cur = stage_.shape();
  if (next.shape().total_nodes() != cur.total_nodes() + 1 ||
      next.shape().cell_groups() != cur.cell_groups() ||
      next.shape().operations() != cur.operations())
    throw StageMismatch("extend_nodes: next stage must add exactly one node");
  if (next.active_ops() != stage_.active_ops())
    throw StageMismatch("extend_nodes: active_ops must stay fixed");

  FactorizedPolicy out(next);
  // Slot keys (group, node, position) survive node growth unchanged.
  std::size_t src = 0;
  for (std::size_t d = 0; d < out.slots_.size(); ++d) {
    const DecisionSlot& s = out.slots_[d];
    if (s.node >= cur.intermediate_nodes()) continue;
    out.logits_[d] = logits_[src++];
  }
  return out;
}

namespace {

void append_double(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += ' ';
  line += buf;
}

double parse_double(const std::string& token) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError("policy checkpoint: bad numeric token '" + token + "'");
  }
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

}  // namespace

void FactorizedPolicy::save_text(std::ostream& out) const {
  out << "cnas-policy v1\n";
  out << "shape B=" << stage_.shape().total_nodes()
      << " G=" << stage_.shape().cell_groups()
      << " K=" << stage_.shape().num_operations()
      << " active=" << stage_.active_ops() << "\n";
  out << "ops";
  for (const OperationSpec& op : stage_.shape().operations())
    out << ' ' << op.id << ':' << (op.has_params ? 1 : 0);
  out << "\n";
  for (std::size_t d = 0; d < slots_.size(); ++d) {
    std::string line = "slot " + std::to_string(slots_[d].group) + ' ' +
                       std::to_string(slots_[d].node) + ' ' +
                       std::to_string(slots_[d].position);
    for (const double v : logits_[d]) append_double(line, v);
    out << line << "\n";
  }
}

FactorizedPolicy FactorizedPolicy::load_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "cnas-policy v1")
    throw ParseError("policy checkpoint: missing 'cnas-policy v1' header");

  if (!std::getline(in, line))
    throw ParseError("policy checkpoint: missing shape line");
  int total_nodes = 0, groups = 0, catalog = 0, active = 0;
  if (std::sscanf(line.c_str(), "shape B=%d G=%d K=%d active=%d", &total_nodes,
                  &groups, &catalog, &active) != 4)
    throw ParseError("policy checkpoint: malformed shape line '" + line + "'");

  if (!std::getline(in, line) || line.rfind("ops ", 0) != 0)
    throw ParseError("policy checkpoint: missing ops line");
  std::vector<OperationSpec> ops;
  for (const std::string& tok : tokens_of(line.substr(4))) {
    const auto colon = tok.rfind(':');
    if (colon == std::string::npos || colon + 2 != tok.size() ||
        (tok[colon + 1] != '0' && tok[colon + 1] != '1'))
      throw ParseError("policy checkpoint: malformed op token '" + tok + "'");
    ops.push_back({tok.substr(0, colon), tok[colon + 1] == '1'});
  }
  if (static_cast<int>(ops.size()) != catalog)
    throw ParseError("policy checkpoint: ops line does not match K");

  SearchSpaceStage stage(SpaceShape(total_nodes, groups, std::move(ops)),
                         active);
  FactorizedPolicy policy(stage);
  for (std::size_t d = 0; d < policy.slots_.size(); ++d) {
    if (!std::getline(in, line))
      throw ParseError("policy checkpoint: truncated at slot " +
                       std::to_string(d));
    const auto toks = tokens_of(line);
    const DecisionSlot& s = policy.slots_[d];
    if (toks.size() < 4 || toks[0] != "slot" ||
        toks[1] != std::to_string(s.group) ||
        toks[2] != std::to_string(s.node) ||
        toks[3] != std::to_string(s.position))
      throw ParseError("policy checkpoint: slot line " + std::to_string(d) +
                       " out of order: '" + line + "'");
    if (toks.size() - 4 != policy.logits_[d].size())
      throw ParseError("policy checkpoint: slot line " + std::to_string(d) +
                       " has wrong logit count");
    for (std::size_t j = 4; j < toks.size(); ++j)
      policy.logits_[d][j - 4] = parse_double(toks[j]);
  }
  return policy;
}

}  // namespace cnas
