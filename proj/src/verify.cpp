#include "rsd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

#include "rsd/engine.hpp"
#include "rsd/oracle.hpp"
#include "rsd/rng.hpp"

namespace rsd::verify {

namespace {

constexpr std::size_t kMaxFailuresKept = 8;

void record_failure(CampaignResult& res, const std::string& message) {
  res.passed = false;
  if (res.failures.size() < kMaxFailuresKept) res.failures.push_back(message);
}

void track_worst(CampaignResult& res, const std::string& metric, double value) {
  for (auto& [name, v] : res.worst) {
    if (name == metric) {
      v = std::max(v, value);
      return;
    }
  }
  res.worst.emplace_back(metric, value);
}

std::vector<double> random_simplex(std::mt19937_64& rng, int k) {
  std::vector<double> w(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (double& v : w) {
    v = -std::log(1.0 - uniform01(rng));
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

int random_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform01(rng) * (hi - lo + 1));
}

double random_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Weighting variants cycled through the mixture-identity campaign.
WeightingSpec random_weighting(std::mt19937_64& rng, int which) {
  switch (which % 7) {
    case 0: return ConstantWeight{random_in(rng, 0.05, 0.95)};
    case 1: return BinaryStepWeight{random_in(rng, 0.0, 1.0)};
    case 2: return ClipWeight{};
    case 3: return SigmoidalWeight{};
    case 4: return LogisticWeight{random_in(rng, 0.5, 20.0), random_in(rng, 0.0, 1.0)};
    case 5: return LikelihoodRatioWeight{random_in(rng, 0.1, 3.0)};
    default: return HybridWeight{random_in(rng, 0.1, 3.0)};
  }
}

WeightingSpec random_monotone_weighting(std::mt19937_64& rng, int which) {
  switch (which % 4) {
    case 0: return BinaryStepWeight{random_in(rng, 0.0, 1.0)};
    case 1: return ClipWeight{};
    case 2: return SigmoidalWeight{};
    default: return LogisticWeight{random_in(rng, 0.5, 20.0), random_in(rng, 0.0, 1.0)};
  }
}

struct InstanceBackends {
  std::shared_ptr<const TabularWorld> world;
  std::unique_ptr<TabularStepGenerator> draft;
  std::unique_ptr<TabularStepGenerator> target;
  std::unique_ptr<TabularRewardModel> prm;
};

InstanceBackends make_backends(const Instance& inst) {
  InstanceBackends b;
  b.world = std::make_shared<const TabularWorld>(make_instance_world(inst));
  b.draft = std::make_unique<TabularStepGenerator>(b.world, WhichModel::Draft, "draft");
  b.target = std::make_unique<TabularStepGenerator>(b.world, WhichModel::Target, "target");
  b.prm = std::make_unique<TabularRewardModel>(b.world, "prm");
  return b;
}

}  // namespace

Instance random_instance(std::mt19937_64& rng, int min_symbols, int max_symbols) {
  int k = random_int(rng, min_symbols, max_symbols);
  Instance inst;
  inst.p_draft = random_simplex(rng, k);
  inst.p_target = random_simplex(rng, k);
  inst.reward.resize(static_cast<std::size_t>(k));
  for (double& r : inst.reward) r = uniform01(rng);
  return inst;
}

TabularWorld make_instance_world(const Instance& inst, const std::string& prompt_text) {
  std::vector<TabularSymbol> symbols;
  for (std::size_t i = 0; i < inst.p_draft.size(); ++i) {
    symbols.push_back(TabularSymbol{"s" + std::to_string(i), true});
  }
  TabularWorld world(std::move(symbols), 1, RewardScale::UnitInterval);
  world.add_context(prompt_text, ContextTable{inst.p_draft, inst.p_target, inst.reward});
  return world;
}

CampaignResult run_prop1(int instances, std::uint64_t seed, std::int64_t mc_trials) {
  CampaignResult res;
  res.name = "prop1";
  res.instances_requested = instances;
  res.passed = true;
  if (instances <= 0) {
    res.vacuous = true;
    res.note = "0 instances: vacuous pass";
    return res;
  }

  constexpr double kExactTol = 1e-12;
  constexpr double kTvTol = 0.01;

  for (int i = 0; i < instances; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Instance inst = random_instance(rng, 2, 10);
    WeightingSpec weighting = random_weighting(rng, i);
    TabularWorld world = make_instance_world(inst);

    oracle::MixtureResult mix =
        oracle::exact_rsd_distribution(world, instance_context_key(), weighting);
    ++res.instances_checked;

    double sum = std::accumulate(mix.distribution.begin(), mix.distribution.end(), 0.0);
    track_worst(res, "max_sum_residual", std::abs(sum - 1.0));
    res.checks += 1;
    if (std::abs(sum - 1.0) > kExactTol) {
      record_failure(res, "instance " + std::to_string(i) + ": distribution sums to " +
                              std::to_string(sum));
    }

    if (mix.nu < -kExactTol || mix.nu > 1.0 + kExactTol) {
      record_failure(res, "instance " + std::to_string(i) + ": nu out of range");
    }
    res.checks += 1;

    // Recompute the mixture in long double as an independent accumulation
    // path and compare term by term.
    long double nu_ld = 1.0L;
    for (std::size_t y = 0; y < inst.p_draft.size(); ++y) {
      nu_ld -= static_cast<long double>(inst.p_draft[y]) * mix.weights[y];
    }
    double identity_residual = std::abs(static_cast<double>(nu_ld) - mix.nu);
    for (std::size_t y = 0; y < inst.p_draft.size(); ++y) {
      long double expect = static_cast<long double>(mix.weights[y]) * inst.p_draft[y] +
                           nu_ld * static_cast<long double>(inst.p_target[y]);
      identity_residual = std::max(
          identity_residual, std::abs(static_cast<double>(expect - mix.distribution[y])));
    }
    track_worst(res, "max_identity_residual", identity_residual);
    res.checks += 1;
    if (identity_residual > kExactTol) {
      record_failure(res, "instance " + std::to_string(i) + ": mixture identity residual " +
                              std::to_string(identity_residual));
    }

    if (mc_trials > 0) {
      InstanceBackends b = make_backends(inst);
      RsdConfig cfg;
      cfg.weighting = weighting;
      cfg.max_steps = 2;
      cfg.sampling_draft = SamplingParams{1.0, 1.0};
      cfg.sampling_target = SamplingParams{1.0, 1.0};

      std::int64_t trial = 0;
      std::uint64_t instance_seed = derive_seed(seed, 0xA11CE + static_cast<std::uint64_t>(i));
      auto draw = [&]() -> std::size_t {
        cfg.seed = trajectory_seed(instance_seed, static_cast<std::uint64_t>(trial++));
        DecodeTrace t = decode_rsd(Prompt{instance_context_key()}, *b.draft, *b.target, *b.prm, cfg);
        return b.world->symbol_index(t.records.at(0).step.text);
      };
      oracle::EmpiricalResult emp = oracle::empirical_distribution(
          draw, inst.p_draft.size(), mc_trials, mix.distribution);
      track_worst(res, "max_tv", emp.tv);
      res.checks += 1;
      if (emp.tv > kTvTol) {
        record_failure(res, "instance " + std::to_string(i) + " (" + variant_name(weighting) +
                                "): TV " + std::to_string(emp.tv));
      }
    }
  }
  return res;
}

CampaignResult run_prop2(int instances, std::uint64_t seed) {
  CampaignResult res;
  res.name = "prop2";
  res.instances_requested = instances;
  res.passed = true;
  if (instances <= 0) {
    res.vacuous = true;
    res.note = "0 instances: vacuous pass";
    return res;
  }

  constexpr double kTol = 1e-12;
  double worst_dominance = std::numeric_limits<double>::infinity();

  for (int i = 0; i < instances; ++i) {
    std::mt19937_64 rng(derive_seed(seed, 0xD011 + static_cast<std::uint64_t>(i)));
    // Premise filter: resample until the target model has the reward edge.
    Instance inst;
    double e_draft = 0.0, e_target = 0.0;
    for (int tries = 0;; ++tries) {
      inst = random_instance(rng, 2, 10);
      e_draft = oracle::expected_reward(inst.p_draft, inst.reward);
      e_target = oracle::expected_reward(inst.p_target, inst.reward);
      if (e_target >= e_draft) break;
      if (tries > 200) throw Error("prop2: could not sample a premise-satisfying instance");
    }
    TabularWorld world = make_instance_world(inst);
    ++res.instances_checked;

    for (int v = 0; v < 4; ++v) {
      WeightingSpec weighting = random_monotone_weighting(rng, v);
      oracle::DominanceReport rep =
          oracle::check_reward_dominance(world, instance_context_key(), weighting);
      res.checks += 1;
      worst_dominance = std::min(worst_dominance, rep.e_rsd - rep.e_draft);
      if (!rep.premise_monotone || !rep.premise_expectation) {
        record_failure(res, "instance " + std::to_string(i) + ": premise bookkeeping broken");
        continue;
      }
      if (!rep.holds) {
        record_failure(res, "instance " + std::to_string(i) + " (" + variant_name(weighting) +
                                "): dominance violated by " +
                                std::to_string(rep.e_draft - rep.e_rsd));
      }

      // Term-by-term decomposition from the dominance proof:
      //   e_rsd = E_m[w r] + nu E_M[r]
      //   E_m[w r] = Cov_m(w, r) + E_m[w] E_m[r],  Cov >= 0 for monotone w
      //   e_rsd - e_m = Cov + nu (E_M[r] - E_m[r])
      oracle::MixtureResult mix =
          oracle::exact_rsd_distribution(world, instance_context_key(), weighting);
      double term1 = 0.0, mean_w = 0.0;
      for (std::size_t y = 0; y < inst.p_draft.size(); ++y) {
        term1 += inst.p_draft[y] * mix.weights[y] * inst.reward[y];
        mean_w += inst.p_draft[y] * mix.weights[y];
      }
      double decomposition = std::abs(mix.expected_reward - (term1 + mix.nu * e_target));
      double cov = term1 - mean_w * e_draft;
      double gap_identity = std::abs((mix.expected_reward - e_draft) -
                                     (cov + mix.nu * (e_target - e_draft)));
      track_worst(res, "max_decomposition_residual", decomposition);
      track_worst(res, "max_gap_identity_residual", gap_identity);
      track_worst(res, "max_negative_covariance", std::max(0.0, -cov));
      res.checks += 3;
      if (decomposition > kTol) {
        record_failure(res, "instance " + std::to_string(i) + ": term decomposition off by " +
                                std::to_string(decomposition));
      }
      if (cov < -kTol) {
        record_failure(res, "instance " + std::to_string(i) + " (" + variant_name(weighting) +
                                "): covariance negative: " + std::to_string(cov));
      }
      if (gap_identity > kTol) {
        record_failure(res, "instance " + std::to_string(i) + ": gap identity off by " +
                                std::to_string(gap_identity));
      }
    }
  }
  track_worst(res, "min_dominance_slack", worst_dominance);
  return res;
}

namespace {

// Reward of the optimal threshold-form assignment allowing one fractional
// weight at the boundary atom (the continuous-relaxation optimum): accept
// every symbol with reward above the target mean, then fill the acceptance
// quota 1-gamma in descending reward order, fractionally at the boundary.
double lp_threshold_optimum(const Instance& inst, double gamma) {
  double target_mean = oracle::expected_reward(inst.p_target, inst.reward);
  std::vector<std::size_t> order(inst.reward.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inst.reward[a] > inst.reward[b];
  });

  double quota = 1.0 - gamma;  // accepted draft mass must reach this
  double mass = 0.0;
  double value = target_mean;  // + sum over accepted of p_m (r - target_mean)
  for (std::size_t y : order) {
    double gain = inst.reward[y] - target_mean;
    if (gain > 0.0 || mass < quota) {
      double take = inst.p_draft[y];
      if (gain <= 0.0) take = std::min(take, quota - mass);  // fractional boundary
      mass += take;
      value += take * gain;
    }
  }
  return value;
}

}  // namespace

CampaignResult run_prop3(int instances, std::uint64_t seed, int grid) {
  CampaignResult res;
  res.name = "prop3";
  res.instances_requested = instances;
  res.passed = true;
  if (instances <= 0) {
    res.vacuous = true;
    res.note = "0 instances: vacuous pass";
    return res;
  }

  constexpr double kTol = 1e-9;
  int equality_checked = 0;

  for (int i = 0; i < instances; ++i) {
    std::mt19937_64 rng(derive_seed(seed, 0x0317A + static_cast<std::uint64_t>(i)));

    // Resample until some realizable budget satisfies the threshold premise;
    // the unfiltered dominance checks below run on the final sample either way.
    Instance inst;
    std::vector<double> premise_budgets;
    for (int tries = 0; tries < 50; ++tries) {
      inst = random_instance(rng, 2, 8);
      premise_budgets.clear();
      double target_mean = oracle::expected_reward(inst.p_target, inst.reward);
      std::set<double> levels(inst.reward.begin(), inst.reward.end());
      for (double delta : levels) {
        double nu = 0.0;
        double max_rejected = -std::numeric_limits<double>::infinity();
        for (std::size_t y = 0; y < inst.reward.size(); ++y) {
          if (inst.reward[y] < delta) {
            nu += inst.p_draft[y];
            max_rejected = std::max(max_rejected, inst.reward[y]);
          }
        }
        // Premise: the budget is realizable at this cut and binds at or
        // below the target-mean cut (every rejected reward <= E_target[r]).
        if (nu > 0.05 && nu < 0.95 && max_rejected <= target_mean + 1e-12) {
          premise_budgets.push_back(nu);
        }
      }
      if (!premise_budgets.empty()) break;
    }

    TabularWorld world = make_instance_world(inst);
    ++res.instances_checked;

    double gamma_raw = random_in(rng, 0.05, 0.95);
    oracle::ThresholdResult thr_raw =
        oracle::optimal_threshold(world, instance_context_key(), gamma_raw);
    res.checks += 1;
    if (thr_raw.realized_nu > gamma_raw + 1e-12) {
      record_failure(res, "instance " + std::to_string(i) + ": realized nu " +
                              std::to_string(thr_raw.realized_nu) + " over budget " +
                              std::to_string(gamma_raw));
    }

    oracle::BruteForceResult brute_raw =
        oracle::brute_force_optimal_weighting(world, instance_context_key(), gamma_raw, grid);
    res.checks += 1;
    track_worst(res, "max_threshold_over_brute", thr_raw.achieved_reward - brute_raw.reward);
    if (brute_raw.reward < thr_raw.achieved_reward - kTol) {
      record_failure(res, "instance " + std::to_string(i) +
                              ": grid search missed the feasible threshold point");
    }

    double lp = lp_threshold_optimum(inst, gamma_raw);
    res.checks += 1;
    track_worst(res, "max_brute_over_lp", brute_raw.reward - lp);
    if (lp < brute_raw.reward - kTol) {
      record_failure(res, "instance " + std::to_string(i) +
                              ": a grid assignment beat the threshold form by " +
                              std::to_string(brute_raw.reward - lp));
    }

    if (!premise_budgets.empty()) {
      double gamma_snap =
          premise_budgets[static_cast<std::size_t>(uniform01(rng) * premise_budgets.size())];
      oracle::ThresholdResult thr =
          oracle::optimal_threshold(world, instance_context_key(), gamma_snap);
      oracle::BruteForceResult brute =
          oracle::brute_force_optimal_weighting(world, instance_context_key(), gamma_snap, grid);
      double gap = std::abs(thr.achieved_reward - brute.reward);
      track_worst(res, "max_equality_gap", gap);
      res.checks += 2;
      ++equality_checked;
      if (gap > kTol) {
        record_failure(res, "instance " + std::to_string(i) + ": threshold reward " +
                                std::to_string(thr.achieved_reward) + " != brute force " +
                                std::to_string(brute.reward) + " at budget " +
                                std::to_string(gamma_snap));
      }
      if (thr.realized_nu > gamma_snap + 1e-12) {
        record_failure(res, "instance " + std::to_string(i) + ": snapped budget violated");
      }
    }
  }

  res.note = std::to_string(equality_checked) + "/" + std::to_string(res.instances_checked) +
             " instances admitted a premise-satisfying budget for the equality check";
  if (equality_checked < std::max(1, instances / 2)) {
    record_failure(res, "premise-satisfying budgets were too rare: " +
                            std::to_string(equality_checked) + "/" +
                            std::to_string(res.instances_checked));
  }
  return res;
}

CampaignResult run_sd_unbiased(int instances, std::uint64_t seed, std::int64_t mc_trials) {
  CampaignResult res;
  res.name = "sd_unbiased";
  res.instances_requested = instances;
  res.passed = true;
  if (instances <= 0) {
    res.vacuous = true;
    res.note = "0 instances: vacuous pass";
    return res;
  }

  constexpr double kTvTol = 0.02;
  constexpr int kSpec = 7;

  for (int i = 0; i < instances; ++i) {
    std::mt19937_64 rng(derive_seed(seed, 0x5D + static_cast<std::uint64_t>(i)));
    Instance inst = random_instance(rng, 2, 6);
    InstanceBackends b = make_backends(inst);

    RsdConfig cfg;
    cfg.max_steps = 2;
    ++res.instances_checked;

    std::int64_t trial = 0;
    std::uint64_t instance_seed = derive_seed(seed, 0x5D00 + static_cast<std::uint64_t>(i));
    auto draw = [&]() -> std::size_t {
      cfg.seed = trajectory_seed(instance_seed, static_cast<std::uint64_t>(trial++));
      DecodeTrace t = decode_sd(Prompt{instance_context_key()}, *b.draft, *b.target, kSpec, cfg);
      return b.world->symbol_index(t.records.at(0).step.text);
    };
    oracle::EmpiricalResult emp =
        oracle::empirical_distribution(draw, inst.p_draft.size(), mc_trials, inst.p_target);
    track_worst(res, "max_tv", emp.tv);
    res.checks += 1;
    if (emp.tv > kTvTol) {
      record_failure(res,
                     "instance " + std::to_string(i) + ": TV to target distribution " +
                         std::to_string(emp.tv));
    }
  }

  // Proposal-cap check on a world where nothing terminates early: every
  // verification round must propose exactly min(k_spec, remaining budget).
  {
    std::vector<TabularSymbol> symbols{{"a\n\n", false}, {"b\n\n", false}};
    TabularWorld chain(symbols, 1, RewardScale::UnitInterval);
    std::vector<std::string> frontier{"Q"};
    for (int depth = 0; depth < 17; ++depth) {
      std::vector<std::string> next;
      for (const std::string& key : frontier) {
        chain.add_context(key, ContextTable{{0.5, 0.5}, {0.5, 0.5}, {0.9, 0.1}});
        if (depth + 1 < 17) {
          next.push_back(key + "a\n\n");
          next.push_back(key + "b\n\n");
        }
      }
      frontier = std::move(next);
    }
    auto world = std::make_shared<const TabularWorld>(std::move(chain));
    TabularStepGenerator draft(world, WhichModel::Draft, "draft");
    TabularStepGenerator target(world, WhichModel::Target, "target");

    RsdConfig cfg;
    cfg.max_steps = 17;  // emits up to 16 symbols
    cfg.seed = seed;
    SdRoundLog log;
    DecodeTrace t = decode_sd(Prompt{"Q"}, draft, target, kSpec, cfg, &log);
    res.checks += 1;
    // Identical draft/target tables accept every proposal deterministically,
    // so the rounds must be exactly min(7, remaining budget): 7, 7, 2.
    const std::vector<int> expected{7, 7, 2};
    if (log.proposals_per_round != expected || t.records.size() != 16 ||
        has_target_record(t)) {
      std::string got;
      for (int p : log.proposals_per_round) got += std::to_string(p) + " ";
      record_failure(res, "k_spec proposal cap violated: rounds [" + got + "], " +
                              std::to_string(t.records.size()) + " records");
    }
  }
  return res;
}

std::vector<CampaignResult> run_all(int instances, std::uint64_t seed, std::int64_t mc_trials) {
  std::vector<CampaignResult> results;
  results.push_back(run_prop1(instances, seed, mc_trials));
  results.push_back(run_prop2(instances, seed));
  results.push_back(run_prop3(std::min(instances, 200), seed));
  results.push_back(run_sd_unbiased(std::min(instances, 50), seed, mc_trials));
  return results;
}

std::string format_report(const std::vector<CampaignResult>& results) {
  std::ostringstream out;
  for (const CampaignResult& r : results) {
    out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.instances_checked
        << " instances, " << r.checks << " checks";
    if (r.vacuous) out << " [WARNING: vacuous]";
    out << "\n";
    for (const auto& [metric, value] : r.worst) {
      out << "       " << metric << " = " << value << "\n";
    }
    if (!r.note.empty()) out << "       note: " << r.note << "\n";
    for (const std::string& f : r.failures) out << "       failure: " << f << "\n";
  }
  return out.str();
}

}  // namespace rsd::verify
