#pragma once

/**
 * Exact finite-support math: the induced mixture distribution, reward
 * dominance checks, budgeted threshold selection, and a brute-force search
 * over per-symbol weight assignments used as an independent optimality
 * oracle.
 */

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rsd/backends.hpp"
#include "rsd/weighting.hpp"

namespace rsd::oracle {

struct MixtureResult {
  std::vector<double> distribution;  // induced step distribution over the alphabet
  std::vector<double> weights;       // w(r(y)) per symbol
  double nu = 0.0;                   // 1 - E_draft[w]; the target-invocation rate
  double expected_reward = 0.0;
};

struct ThresholdResult {
  double delta_gamma = 0.0;
  double realized_nu = 0.0;
  double achieved_reward = 0.0;
};

struct DominanceReport {
  double e_rsd = 0.0;
  double e_draft = 0.0;
  double e_target = 0.0;
  bool holds = false;             // e_rsd >= e_draft - 1e-12
  bool premise_expectation = false;  // e_target >= e_draft
  bool premise_monotone = false;     // weighting is monotone in the reward
};

struct BruteForceResult {
  std::vector<double> weights;
  double reward = 0.0;
  double nu = 0.0;
};

// Exact induced distribution for one context:
//   P(y) = w(r(y)) * P_draft(y) + nu * P_target(y),  nu = 1 - sum_y P_draft(y) w(r(y)).
// Ratio-based weightings use the table ratio P_target/P_draft with the
// conventions 0/0 -> weight 0 and c/0 -> weight 1.
MixtureResult exact_rsd_distribution(const TabularWorld& world, const std::string& ctx_key,
                                     const WeightingSpec& weighting);

// sum_y dist(y) * reward(y); sizes must match.
double expected_reward(const std::vector<double>& distribution,
                       const std::vector<double>& rewards);

DominanceReport check_reward_dominance(const TabularWorld& world, const std::string& ctx_key,
                                       const WeightingSpec& weighting);

// Largest delta among the distinct reward values plus +inf whose rejected
// draft mass nu(delta) = P_draft{r < delta} stays within the budget gamma.
// Equal-reward symbols move as one block, so nu may land strictly below
// gamma.
ThresholdResult optimal_threshold(const TabularWorld& world, const std::string& ctx_key,
                                  double gamma);

// Exhaustive search over per-symbol weights on the grid {0, 1/g, ..., 1}
// subject to nu <= gamma, maximizing the mixture's expected reward. Throws
// when (g+1)^alphabet exceeds the search cap.
BruteForceResult brute_force_optimal_weighting(const TabularWorld& world,
                                               const std::string& ctx_key, double gamma,
                                               int grid);

// Half L1 distance between probability vectors of equal length.
double tv_distance(const std::vector<double>& a, const std::vector<double>& b);

struct EmpiricalResult {
  std::vector<double> frequencies;
  double tv = 0.0;
};

// Frequency vector of `trials` draws from `draw` (values in
// [0, alphabet_size)), plus its total-variation distance to `reference`.
EmpiricalResult empirical_distribution(const std::function<std::size_t()>& draw,
                                       std::size_t alphabet_size, std::int64_t trials,
                                       const std::vector<double>& reference);

}  // namespace rsd::oracle
