// Acceptance gate: one self-contained check per numbered criterion, each
// printing exactly one "criterion N: PASS|FAIL - ..." line with the measured
// values and pinned bounds. Exit code 0 iff every requested criterion passed.
//
// Usage: acceptance [--criterion N] [--presets DIR] [--cli PATH]
//   --criterion N   run a single criterion (default: all ten)
//   --presets DIR   preset directory (default: ./presets)
//   --cli PATH      cnas binary, required by criterion 10

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cnas/curriculum.hpp"
#include "cnas/harness.hpp"

namespace fs = std::filesystem;
using namespace cnas;

namespace {

struct Options {
  int criterion = 0;  // 0: all
  std::string presets = "presets";
  std::string cli;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buffer[512];
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

SpaceShape make_shape(int total_nodes, int groups, int num_ops) {
  auto ops = default_operation_catalog();
  ops.resize(static_cast<std::size_t>(num_ops));
  return SpaceShape(total_nodes, groups, std::move(ops));
}

FactorizedPolicy random_policy(const SearchSpaceStage& stage, Rng& rng) {
  FactorizedPolicy policy(stage);
  const auto slots = decision_slots(stage);
  for (std::size_t s = 0; s < slots.size(); ++s)
    for (int j = 0; j < slots[s].choices; ++j)
      policy.set_logit(s, j, rng.normal(0.0, 1.0));
  return policy;
}

// --- criterion 1: exact counting over the enumerable grid ------------------

Outcome criterion1(const Options&) {
  const auto start = std::chrono::steady_clock::now();
  int verified = 0;
  for (int b = 4; b <= 6; ++b)
    for (int i = 1; i <= 3; ++i)
      for (int g = 1; g <= 2; ++g) {
        const SearchSpaceStage stage(make_shape(b, g, i), i);
        const BigInt size = space_size(stage);
        if (size > 100000) continue;
        const auto all = enumerate_space(stage, 100000);
        if (BigInt(all.size()) != size)
          return {false, fmt("B=%d i=%d G=%d: enumerate %zu != space_size %s",
                             b, i, g, all.size(), size.str().c_str())};
        ++verified;
      }
  const double elapsed = seconds_since(start);
  if (verified != 12)
    return {false, fmt("expected 12 enumerable grid points, saw %d", verified)};
  if (elapsed >= 10.0)
    return {false, fmt("runtime %.2fs exceeds 10s bound", elapsed)};
  return {true, fmt("enumerate count == space_size on all %d enumerable "
                    "(B,i,G) grid points in %.2fs (bound 10s)",
                    verified, elapsed)};
}

// --- criterion 2: paper-scale counts ----------------------------------------

Outcome criterion2(const Options&) {
  const BigInt b8 = space_size(SearchSpaceStage(make_shape(8, 1, 5), 5));
  const BigInt b7 = space_size(SearchSpaceStage(make_shape(7, 1, 8), 8));
  const BigInt want8("5062500000000"), want7("241591910400");
  if (b8 != want8)
    return {false, fmt("space_size(B=8,i=5,G=1) = %s, want 5062500000000",
                       b8.str().c_str())};
  if (b7 != want7)
    return {false, fmt("space_size(B=7,i=8,G=1) = %s, want 241591910400",
                       b7.str().c_str())};
  return {true,
          "space_size(B=8,i=5,G=1) = 5062500000000 and "
          "space_size(B=7,i=8,G=1) = 241591910400"};
}

// --- criterion 3: policy normalization --------------------------------------

Outcome criterion3(const Options&) {
  double worst = 0.0;
  Rng rng(12345);
  for (int b : {4, 5}) {
    const SearchSpaceStage stage(make_shape(b, 1, 2), 2);
    const auto space = enumerate_space(stage, 100000);
    for (int p = 0; p <= 20; ++p) {
      const FactorizedPolicy policy =
          p == 0 ? FactorizedPolicy(stage) : random_policy(stage, rng);
      double total = 0.0;
      for (const Architecture& arch : space)
        total += std::exp(policy.log_prob(arch));
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  if (worst > 1e-9)
    return {false, fmt("max |sum exp(log_prob) - 1| = %.3e exceeds 1e-9",
                       worst)};
  return {true, fmt("sum of exp(log_prob) within %.3e of 1 for uniform and "
                    "20 random policies on (B=4,i=2) and (B=5,i=2) "
                    "(bound 1e-9)",
                    worst)};
}

// --- criterion 4: gradient oracle -------------------------------------------

Outcome criterion4(const Options&) {
  const auto start = std::chrono::steady_clock::now();
  const SearchSpaceStage stage(make_shape(4, 1, 2), 2);
  const auto space = enumerate_space(stage, 100000);
  PlantedLandscape oracle(stage.shape(), 42, {0.7, 0.3, 0.0});
  Rng eval_rng(0);

  Rng logit_rng(7);
  const FactorizedPolicy policy = random_policy(stage, logit_rng);
  const std::size_t coords = policy.param_count();
  const auto slots = decision_slots(stage);

  // Exact gradient two ways: the softmax identity per coordinate, and the
  // enumerated expectation of R * grad log pi.
  std::vector<double> exact(coords, 0.0), formula(coords, 0.0);
  for (const Architecture& arch : space) {
    const double pi = std::exp(policy.log_prob(arch));
    const double reward = oracle.evaluate(arch, eval_rng);
    const auto grad = policy.log_prob_gradient(arch);
    std::size_t c = 0;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const auto probs = policy.probabilities(s);
      const int value = slot_value(arch, slots[s]);
      for (int j = 0; j < slots[s].choices; ++j, ++c) {
        exact[c] += pi * reward * ((j == value ? 1.0 : 0.0) - probs[j]);
        formula[c] += pi * reward * grad[c];
      }
    }
  }
  double analytic_gap = 0.0;
  for (std::size_t c = 0; c < coords; ++c)
    analytic_gap = std::max(analytic_gap, std::abs(exact[c] - formula[c]));
  if (analytic_gap > 1e-9)
    return {false, fmt("analytic formula differs from enumeration by %.3e "
                       "(bound 1e-9)",
                       analytic_gap)};

  // Monte-Carlo REINFORCE estimator, 1e5 samples, per-coordinate 3 SE.
  const int n = 100000;
  Rng mc_rng(99);
  std::vector<double> sum(coords, 0.0), sumsq(coords, 0.0);
  for (int i = 0; i < n; ++i) {
    const Architecture arch = policy.sample(mc_rng);
    const double reward = oracle.evaluate(arch, mc_rng);
    const auto grad = policy.log_prob_gradient(arch);
    for (std::size_t c = 0; c < coords; ++c) {
      const double term = reward * grad[c];
      sum[c] += term;
      sumsq[c] += term * term;
    }
  }
  double worst_z = 0.0;
  for (std::size_t c = 0; c < coords; ++c) {
    const double mean = sum[c] / n;
    const double var = std::max(sumsq[c] / n - mean * mean, 0.0);
    const double se = std::sqrt(var / n);
    worst_z = std::max(worst_z, std::abs(mean - exact[c]) / (se + 1e-12));
  }
  if (worst_z > 3.0)
    return {false, fmt("Monte-Carlo estimate off by %.2f standard errors "
                       "(bound 3)",
                       worst_z)};

  // Entropy gradient against central finite differences.
  const auto entropy_grad = policy.entropy_gradient();
  const double h = 1e-6;
  double worst_rel = 0.0;
  std::size_t c = 0;
  for (std::size_t s = 0; s < slots.size(); ++s)
    for (int j = 0; j < slots[s].choices; ++j, ++c) {
      const double base = policy.logits()[s][static_cast<std::size_t>(j)];
      FactorizedPolicy hi = policy, lo = policy;
      hi.set_logit(s, j, base + h);
      lo.set_logit(s, j, base - h);
      const double fd = (hi.entropy() - lo.entropy()) / (2 * h);
      const double scale = std::max(std::abs(entropy_grad[c]), 1e-9);
      worst_rel = std::max(worst_rel, std::abs(fd - entropy_grad[c]) / scale);
    }
  if (worst_rel > 1e-5)
    return {false, fmt("entropy gradient relative error %.3e exceeds 1e-5",
                       worst_rel)};

  const double elapsed = seconds_since(start);
  if (elapsed >= 60.0)
    return {false, fmt("runtime %.2fs exceeds 60s bound", elapsed)};
  return {true,
          fmt("enumerated vs analytic gradient gap %.2e (bound 1e-9); "
              "1e5-sample REINFORCE within %.2f SE (bound 3); entropy "
              "gradient vs finite differences rel %.2e (bound 1e-5); %.2fs "
              "(bound 60s)",
              analytic_gap, worst_z, worst_rel, elapsed)};
}

// --- criterion 5: warmup contract -------------------------------------------

Outcome criterion5(const Options&) {
  const SpaceShape shape = make_shape(6, 1, 4);
  double worst_dev = 0.0;
  for (long long seed = 1; seed <= 10; ++seed) {
    SurrogateSupernet net(shape, static_cast<std::uint64_t>(seed), {});
    Rng rng(Rng::mix(static_cast<std::uint64_t>(seed), 99));

    // Incumbents first: train ops 0..2 in the stage-3 space.
    const SearchSpaceStage prior(shape, 3);
    FactorizedPolicy prior_policy(prior);
    operation_warmup(prior_policy, net, prior, 150, rng);

    std::vector<double> pre(4 * 6);
    for (int k = 0; k < 3; ++k)
      for (int slot = 0; slot < 2; ++slot)
        for (int op = 0; op < 4; ++op)
          pre[static_cast<std::size_t>((k * 2 + slot) * 4 + op)] =
              net.proficiency(0, k, slot, op);

    // Stage transition: policy serialization must not move across warmup.
    const SearchSpaceStage full(shape, 4);
    FactorizedPolicy policy(full);
    std::ostringstream before;
    policy.save_text(before);
    operation_warmup(policy, net, full, 200, rng);
    std::ostringstream after;
    policy.save_text(after);
    if (before.str() != after.str())
      return {false, fmt("seed %lld: warmup changed policy serialization",
                         seed)};

    // Fairness: proficiency gained as a fraction of headroom is the same
    // visit-count curve for every op, so uniform sampling must leave the new
    // op within 20% of the incumbents' mean fraction.
    double inc = 0.0, fresh = 0.0;
    int inc_n = 0, fresh_n = 0;
    for (int k = 0; k < 3; ++k)
      for (int slot = 0; slot < 2; ++slot)
        for (int op = 0; op < 4; ++op) {
          const double ceiling = net.ceiling(0, k, slot, op);
          const double p0 =
              pre[static_cast<std::size_t>((k * 2 + slot) * 4 + op)];
          const double headroom = ceiling - p0;
          if (headroom < 1e-12) continue;
          const double gained =
              (net.proficiency(0, k, slot, op) - p0) / headroom;
          if (op == 3) {
            fresh += gained;
            ++fresh_n;
          } else {
            inc += gained;
            ++inc_n;
          }
        }
    const double ratio = (fresh / fresh_n) / (inc / inc_n);
    worst_dev = std::max(worst_dev, std::abs(ratio - 1.0));
  }
  if (worst_dev > 0.20)
    return {false, fmt("new-op gain fraction deviates %.3f from incumbents "
                       "(bound 0.20)",
                       worst_dev)};
  return {true,
          fmt("policy serialization bit-identical across warmup on 10/10 "
              "seeds; M=200 new-op gain fraction within %.3f of incumbents "
              "(bound 0.20)",
              worst_dev)};
}

// --- criterion 6: curriculum efficacy ---------------------------------------

struct MethodStats {
  double mean = 0.0;
  std::vector<double> finals;
};

std::map<std::string, MethodStats> run_preset(
    const ExperimentSpec& spec, const std::vector<std::string>& methods) {
  std::map<std::string, MethodStats> out;
  for (const std::string& method : methods) {
    MethodStats stats;
    for (long long seed : spec.seeds)
      stats.finals.push_back(run_trial(spec, method, seed).final_answer().reward);
    for (double f : stats.finals) stats.mean += f;
    stats.mean /= static_cast<double>(stats.finals.size());
    out[method] = stats;
  }
  return out;
}

Outcome criterion6(const Options& options) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentSpec planted =
      load_spec(options.presets + "/planted_b6k4.json");
  const ExperimentSpec node = load_spec(options.presets + "/node_b7k3.json");

  const auto planted_stats = run_preset(planted, {"cnas", "fixed", "random"});
  const auto node_stats = run_preset(node, {"cnas", "node", "random"});

  int wins = 0;
  const auto& cnas_finals = planted_stats.at("cnas").finals;
  const auto& fixed_finals = planted_stats.at("fixed").finals;
  for (std::size_t i = 0; i < cnas_finals.size(); ++i)
    if (cnas_finals[i] >= fixed_finals[i]) ++wins;
  const int seeds = static_cast<int>(cnas_finals.size());
  const double frac = static_cast<double>(wins) / seeds;

  const double pc = planted_stats.at("cnas").mean;
  const double pf = planted_stats.at("fixed").mean;
  const double pr = planted_stats.at("random").mean;
  const double nc = node_stats.at("cnas").mean;
  const double nn = node_stats.at("node").mean;
  const double nr = node_stats.at("random").mean;
  const double elapsed = seconds_since(start);

  const bool win_ok = frac >= 0.70;
  const bool mean_ok = pc >= pf;
  const bool node_ok = nc >= nn;
  const bool random_ok = pc > pr && nc > nr;
  const bool time_ok = elapsed < 600.0;
  const bool pass = win_ok && mean_ok && node_ok && random_ok && time_ok;

  const std::string detail = fmt(
      "planted_b6k4: cnas>=fixed in %d/%d seeds (win fraction %.2f, need "
      ">=0.70) [%s]; cnas mean %.4f vs fixed mean %.4f [%s]; node_b7k3: cnas "
      "mean %.4f vs node mean %.4f [%s]; cnas vs random: %.4f > %.4f and "
      "%.4f > %.4f [%s]; %.1fs (bound 600s)",
      wins, seeds, frac, win_ok ? "ok" : "FAIL", pc, pf,
      mean_ok ? "ok" : "FAIL", nc, nn, node_ok ? "ok" : "FAIL", pc, pr, nc,
      nr, random_ok ? "ok" : "FAIL", elapsed);
  return {pass, detail};
}

// --- criterion 7: warmup ablation -------------------------------------------

Outcome criterion7(const Options& options) {
  const ExperimentSpec warm =
      load_spec(options.presets + "/warmup_ablation.json");

  // The no-warmup arm reallocates the warmup budget to weight iterations so
  // both arms evaluate the same number of architectures per stage.
  ExperimentSpec cold = warm;
  cold.curriculum.weight_iters_per_stage += cold.curriculum.warmup_iters;
  cold.curriculum.warmup_iters = 0;

  int wins = 0;
  double warm_mean = 0.0, cold_mean = 0.0;
  for (long long seed : warm.seeds) {
    const double with_warmup =
        run_trial(warm, "cnas", seed).final_answer().reward;
    const double without =
        run_trial(cold, "cnas", seed).final_answer().reward;
    warm_mean += with_warmup;
    cold_mean += without;
    if (with_warmup >= without) ++wins;
  }
  const int seeds = static_cast<int>(warm.seeds.size());
  warm_mean /= seeds;
  cold_mean /= seeds;
  const double frac = static_cast<double>(wins) / seeds;
  if (frac < 0.70)
    return {false, fmt("with-warmup >= without in %d/%d seeds (%.2f, need "
                       ">=0.70); means %.4f vs %.4f",
                       wins, seeds, frac, warm_mean, cold_mean)};
  return {true, fmt("with-warmup >= without-warmup in %d/%d seeds (%.2f, "
                    "need >=0.70); means %.4f vs %.4f",
                    wins, seeds, frac, warm_mean, cold_mean)};
}

// --- criterion 8: order insensitivity ---------------------------------------

Outcome criterion8(const Options& options) {
  const ExperimentSpec spec =
      load_spec(options.presets + "/order_sensitivity.json");
  std::vector<double> finals;
  std::vector<std::vector<int>> orders;
  for (long long seed : spec.seeds) {
    const SearchTrace trace = run_trial(spec, "cnas", seed);
    finals.push_back(trace.final_answer().reward);
    orders.push_back(trace.operation_order);
  }
  std::vector<std::vector<int>> distinct = orders;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());

  double mean = 0.0;
  for (double f : finals) mean += f;
  mean /= static_cast<double>(finals.size());
  double var = 0.0;
  for (double f : finals) var += (f - mean) * (f - mean);
  var /= static_cast<double>(finals.size());
  const double cv = std::sqrt(var) / mean;
  if (cv >= 0.15)
    return {false, fmt("coefficient of variation %.4f over %zu orders "
                       "(bound 0.15)",
                       cv, orders.size())};
  return {true, fmt("coefficient of variation %.4f over %zu runs (%zu "
                    "distinct operation orders, bound 0.15)",
                    cv, orders.size(), distinct.size())};
}

// --- criterion 9: inference order statistics --------------------------------

Outcome criterion9(const Options&) {
  const SearchSpaceStage stage(make_shape(4, 1, 2), 2);
  PlantedLandscape oracle(stage.shape(), 4242, {0.7, 0.3, 0.0});
  Rng eval_rng(0);

  // Exact E[max of 10] over the uniform 16-point reward distribution.
  const auto space = enumerate_space(stage, 100000);
  std::map<double, int> counts;
  for (const Architecture& arch : space) ++counts[oracle.evaluate(arch, eval_rng)];
  const double total = static_cast<double>(space.size());
  double exact = 0.0, cdf_prev = 0.0, cum = 0.0;
  for (const auto& [value, count] : counts) {
    cum += count;
    const double cdf = cum / total;
    exact += value * (std::pow(cdf, 10) - std::pow(cdf_prev, 10));
    cdf_prev = cdf;
  }

  const FactorizedPolicy policy(stage);
  Rng rng(31337);
  const int trials = 100000;
  double sum = 0.0;
  for (int t = 0; t < trials; ++t)
    sum += infer(policy, oracle, 10, rng).second;
  const double empirical = sum / trials;
  const double rel = std::abs(empirical - exact) / exact;
  if (rel > 0.01)
    return {false, fmt("empirical best-of-10 mean %.6f vs exact %.6f, "
                       "relative error %.4f exceeds 0.01",
                       empirical, exact, rel)};
  return {true, fmt("best-of-10 mean over 1e5 trials %.6f vs exact "
                    "order-statistic value %.6f (relative error %.4f, "
                    "bound 0.01)",
                    empirical, exact, rel)};
}

// --- criterion 10: compare determinism --------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Outcome criterion10(const Options& options) {
  if (options.cli.empty())
    return {false, "requires --cli <path to cnas binary>"};

  const fs::path root = fs::temp_directory_path() / "cnas_acceptance_c10";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path out_dir = root / "out";
  const fs::path spec_path = root / "spec.json";
  {
    std::ofstream spec(spec_path);
    spec << "{\n"
         << "  \"version\": 1,\n"
         << "  \"name\": \"determinism\",\n"
         << "  \"methods\": [\"cnas\", \"random\"],\n"
         << "  \"seeds\": [1, 2],\n"
         << "  \"space\": {\"total_nodes\": 5, \"cell_groups\": 1, \"ops\": 2},\n"
         << "  \"curriculum\": {\"warmup_iters\": 2, "
            "\"controller_iters_per_stage\": 4, \"weight_iters_per_stage\": 2, "
            "\"samples_per_controller_iter\": 2, \"infer_samples\": 3},\n"
         << "  \"oracle\": {\"kind\": \"planted\", \"noise_sigma\": 0.02},\n"
         << "  \"output_dir\": \"" << out_dir.string() << "\",\n"
         << "  \"parallelism\": 2\n"
         << "}\n";
  }

  const std::string command = options.cli + " compare --spec " +
                              spec_path.string() + " > /dev/null 2>&1";
  if (std::system(command.c_str()) != 0)
    return {false, "first compare run failed"};
  const fs::path saved = root / "first";
  fs::copy(out_dir, saved, fs::copy_options::recursive);
  if (std::system(command.c_str()) != 0)
    return {false, "second compare run failed"};

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(out_dir))
    names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  std::vector<std::string> saved_names;
  for (const auto& entry : fs::directory_iterator(saved))
    saved_names.push_back(entry.path().filename().string());
  std::sort(saved_names.begin(), saved_names.end());
  if (names != saved_names)
    return {false, "the two runs produced different file sets"};
  for (const std::string& name : names)
    if (slurp(out_dir / name) != slurp(saved / name))
      return {false, fmt("%s differs between runs", name.c_str())};
  fs::remove_all(root);
  return {true, fmt("two compare runs produced byte-identical outputs "
                    "(%zu files)",
                    names.size())};
}

using CriterionFn = Outcome (*)(const Options&);

constexpr CriterionFn kCriteria[] = {
    criterion1, criterion2, criterion3, criterion4, criterion5,
    criterion6, criterion7, criterion8, criterion9, criterion10,
};

}  // namespace

int main(int argc, char** argv) {
  Options options;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      options.criterion = std::atoi(argv[++i]);
      if (options.criterion < 1 || options.criterion > 10) {
        std::fprintf(stderr, "criterion must be 1..10\n");
        return 2;
      }
    } else if (arg == "--presets" && i + 1 < argc) {
      options.presets = argv[++i];
    } else if (arg == "--cli" && i + 1 < argc) {
      options.cli = argv[++i];
    } else {
      std::fprintf(stderr,
                   "usage: acceptance [--criterion N] [--presets DIR] "
                   "[--cli PATH]\n");
      return 2;
    }
  }

  bool all_pass = true;
  for (int n = 1; n <= 10; ++n) {
    if (options.criterion != 0 && options.criterion != n) continue;
    Outcome outcome;
    try {
      outcome = kCriteria[n - 1](options);
    } catch (const std::exception& e) {
      outcome = {false, fmt("unexpected %s", e.what())};
    }
    std::printf("criterion %d: %s - %s\n", n, outcome.pass ? "PASS" : "FAIL",
                outcome.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
