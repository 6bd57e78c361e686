#pragma once

/**
 * Weighting functions w(r) mapping a step reward to an acceptance probability
 * in [0, 1], and the acceptance criterion built on them.
 *
 * The acceptance criterion is deterministic when w(r) is exactly 0 or 1 and a
 * Bernoulli(w(r)) draw otherwise; the deterministic branch consumes no
 * randomness, which keeps binary-threshold decodes bit-stable across runs.
 */

#include <optional>
#include <string>
#include <variant>

#include "rsd/core.hpp"
#include "rsd/rng.hpp"

namespace rsd {

// w(r) = p, ignoring the reward.
struct ConstantWeight {
  double p = 0.5;
};

// w(r) = 1 if r >= delta else 0. Accepts at exactly r == delta; delta may be
// +-inf (all-reject / all-accept limits).
struct BinaryStepWeight {
  double delta = 0.7;
};

// w(r) = min(1, max(0, r)).
struct ClipWeight {};

// w(r) = max(0, r / (1 + r)). Undefined at r = -1; inputs r <= -1 are an
// error (outside the unit-interval reward range this transform is meant for).
struct SigmoidalWeight {};

// w(r) = 1 / (1 + exp(-alpha * (r - delta))).
struct LogisticWeight {
  double alpha = 1.0;
  double delta = 0.7;
};

// w = min(1, alpha * P_target/P_draft); reward is ignored. Requires a
// likelihood ratio at evaluation time.
struct LikelihoodRatioWeight {
  double alpha = 1.0;
};

// w = min(1, beta * r * P_target/P_draft). Requires a likelihood ratio.
struct HybridWeight {
  double beta = 1.0;
};

using WeightingSpec = std::variant<ConstantWeight, BinaryStepWeight, ClipWeight, SigmoidalWeight,
                                   LogisticWeight, LikelihoodRatioWeight, HybridWeight>;

struct WeightInput {
  double reward = 0.0;
  // P_target/P_draft of the candidate step; >= 0, may be +inf (nonzero target
  // probability against zero draft probability).
  std::optional<double> likelihood_ratio;
};

void validate_spec(const WeightingSpec& spec);

bool needs_likelihood_ratio(const WeightingSpec& spec);

// True when the weight is a non-decreasing function of the reward alone
// (the reward-dominance guarantee's precondition). Constant is excluded by
// definition; ratio-based variants depend on the step through the ratio.
bool monotone_in_reward(const WeightingSpec& spec);

std::string variant_name(const WeightingSpec& spec);

// w(r) per the chosen definition, always clamped to [0, 1]. Throws on
// non-finite rewards, a missing/NaN ratio for ratio variants, or r <= -1 for
// the sigmoidal transform.
double evaluate_weight(const WeightingSpec& spec, const WeightInput& input);

// Bernoulli(w) with the deterministic shortcut. Does not touch `rng` when w
// is exactly 0 or 1.
template <class Rng>
bool accept_with_weight(double w, Rng& rng) {
  if (w <= 0.0) return false;
  if (w >= 1.0) return true;
  return w >= uniform01(rng);
}

template <class Rng>
bool accept(const WeightingSpec& spec, const WeightInput& input, Rng& rng) {
  return accept_with_weight(evaluate_weight(spec, input), rng);
}

}  // namespace rsd
