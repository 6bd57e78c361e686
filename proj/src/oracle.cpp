#include "rsd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace rsd::oracle {

namespace {

std::vector<double> per_symbol_weights(const ContextTable& t, const WeightingSpec& weighting) {
  const bool ratio_variant = needs_likelihood_ratio(weighting);
  std::vector<double> w(t.reward.size());
  for (std::size_t y = 0; y < t.reward.size(); ++y) {
    if (ratio_variant && t.p_draft[y] == 0.0) {
      w[y] = t.p_target[y] == 0.0 ? 0.0 : 1.0;
      continue;
    }
    WeightInput in{t.reward[y], std::nullopt};
    if (ratio_variant) in.likelihood_ratio = t.p_target[y] / t.p_draft[y];
    w[y] = evaluate_weight(weighting, in);
  }
  return w;
}

}  // namespace

MixtureResult exact_rsd_distribution(const TabularWorld& world, const std::string& ctx_key,
                                     const WeightingSpec& weighting) {
  const ContextTable& t = world.context(ctx_key);
  MixtureResult out;
  out.weights = per_symbol_weights(t, weighting);

  double accepted_mass = 0.0;
  for (std::size_t y = 0; y < out.weights.size(); ++y) {
    accepted_mass += t.p_draft[y] * out.weights[y];
  }
  out.nu = 1.0 - accepted_mass;

  out.distribution.resize(out.weights.size());
  for (std::size_t y = 0; y < out.weights.size(); ++y) {
    out.distribution[y] = out.weights[y] * t.p_draft[y] + out.nu * t.p_target[y];
  }
  out.expected_reward = expected_reward(out.distribution, t.reward);
  return out;
}

double expected_reward(const std::vector<double>& distribution,
                       const std::vector<double>& rewards) {
  if (distribution.size() != rewards.size()) {
    throw Error("expected_reward: distribution/reward dimension mismatch");
  }
  double e = 0.0;
  for (std::size_t y = 0; y < distribution.size(); ++y) e += distribution[y] * rewards[y];
  return e;
}

DominanceReport check_reward_dominance(const TabularWorld& world, const std::string& ctx_key,
                                       const WeightingSpec& weighting) {
  const ContextTable& t = world.context(ctx_key);
  MixtureResult mix = exact_rsd_distribution(world, ctx_key, weighting);

  DominanceReport rep;
  rep.e_rsd = mix.expected_reward;
  rep.e_draft = expected_reward(t.p_draft, t.reward);
  rep.e_target = expected_reward(t.p_target, t.reward);
  rep.premise_expectation = rep.e_target >= rep.e_draft;
  rep.premise_monotone = monotone_in_reward(weighting);
  rep.holds = rep.e_rsd >= rep.e_draft - 1e-12;
  return rep;
}

namespace {

// Mixture reward of the binary threshold "accept iff r(y) >= delta".
double threshold_reward(const ContextTable& t, double delta, double target_mean, double* nu_out) {
  double accepted_mass = 0.0;
  double accepted_reward = 0.0;
  for (std::size_t y = 0; y < t.reward.size(); ++y) {
    if (t.reward[y] >= delta) {
      accepted_mass += t.p_draft[y];
      accepted_reward += t.p_draft[y] * t.reward[y];
    }
  }
  double nu = 1.0 - accepted_mass;
  if (nu_out) *nu_out = nu;
  return accepted_reward + nu * target_mean;
}

}  // namespace

ThresholdResult optimal_threshold(const TabularWorld& world, const std::string& ctx_key,
                                  double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in (0, 1)");
  const ContextTable& t = world.context(ctx_key);
  const double target_mean = expected_reward(t.p_target, t.reward);

  // On finite support nu(delta) is a step function, so restricting the
  // candidates to the observed reward values plus +inf loses nothing.
  std::set<double> candidate_set(t.reward.begin(), t.reward.end());
  std::vector<double> candidates(candidate_set.begin(), candidate_set.end());
  candidates.push_back(std::numeric_limits<double>::infinity());

  ThresholdResult best;
  bool found = false;
  for (double delta : candidates) {
    double nu = 0.0;
    double reward = threshold_reward(t, delta, target_mean, &nu);
    if (nu <= gamma + 1e-12 && (!found || delta > best.delta_gamma)) {
      best = ThresholdResult{delta, nu, reward};
      found = true;
    }
  }
  // delta = min reward accepts everything (nu = 0), so a feasible candidate
  // always exists.
  if (!found) throw Error("optimal_threshold: no feasible candidate");
  return best;
}

BruteForceResult brute_force_optimal_weighting(const TabularWorld& world,
                                               const std::string& ctx_key, double gamma,
                                               int grid) {
  // gamma = 1 is allowed here: it searches the unconstrained assignment space.
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (grid < 1) throw ConfigError("grid must be >= 1");
  const ContextTable& t = world.context(ctx_key);
  const std::size_t k = t.reward.size();

  constexpr double kSearchCap = 5e7;
  double space = std::pow(static_cast<double>(grid + 1), static_cast<double>(k));
  if (space > kSearchCap) throw ConfigError("brute force search-space cap exceeded");

  const double target_mean = expected_reward(t.p_target, t.reward);
  std::vector<int> levels(k, 0);
  std::vector<double> w(k, 0.0);

  BruteForceResult best;
  best.reward = -std::numeric_limits<double>::infinity();

  while (true) {
    for (std::size_t y = 0; y < k; ++y) w[y] = static_cast<double>(levels[y]) / grid;
    double accepted_mass = 0.0;
    double accepted_reward = 0.0;
    for (std::size_t y = 0; y < k; ++y) {
      accepted_mass += t.p_draft[y] * w[y];
      accepted_reward += t.p_draft[y] * w[y] * t.reward[y];
    }
    double nu = 1.0 - accepted_mass;
    if (nu <= gamma + 1e-12) {
      double reward = accepted_reward + nu * target_mean;
      if (reward > best.reward) {
        best.reward = reward;
        best.nu = nu;
        best.weights = w;
      }
    }

    // Odometer increment.
    std::size_t pos = 0;
    while (pos < k && levels[pos] == grid) {
      levels[pos] = 0;
      ++pos;
    }
    if (pos == k) break;
    ++levels[pos];
  }

  if (best.weights.empty()) throw Error("brute force found no feasible assignment");
  return best;
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("tv_distance: dimension mismatch");
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(a[i] - b[i]);
  return 0.5 * l1;
}

EmpiricalResult empirical_distribution(const std::function<std::size_t()>& draw,
                                       std::size_t alphabet_size, std::int64_t trials,
                                       const std::vector<double>& reference) {
  if (trials <= 0) throw ConfigError("empirical_distribution requires trials > 0");
  std::vector<std::int64_t> counts(alphabet_size, 0);
  for (std::int64_t i = 0; i < trials; ++i) {
    std::size_t idx = draw();
    if (idx >= alphabet_size) throw Error("empirical_distribution: draw out of range");
    ++counts[idx];
  }
  EmpiricalResult out;
  out.frequencies.resize(alphabet_size);
  for (std::size_t i = 0; i < alphabet_size; ++i) {
    out.frequencies[i] = static_cast<double>(counts[i]) / static_cast<double>(trials);
  }
  out.tv = tv_distance(out.frequencies, reference);
  return out;
}

}  // namespace rsd::oracle
