#include "rsd/weighting.hpp"

#include <cmath>

namespace rsd {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

double clamp01(double x) {
  if (x < 0.0) return 0.0;
  if (x > 1.0) return 1.0;
  return x;
}

double checked_ratio(const WeightInput& in, const char* variant) {
  if (!in.likelihood_ratio.has_value()) {
    throw ConfigError(std::string(variant) + " weighting requires a likelihood ratio");
  }
  double ratio = *in.likelihood_ratio;
  if (std::isnan(ratio) || ratio < 0.0) {
    throw ConfigError(std::string(variant) + " weighting got an invalid likelihood ratio");
  }
  return ratio;
}

}  // namespace

void validate_spec(const WeightingSpec& spec) {
  std::visit(Overload{
                 [](const ConstantWeight& c) {
                   if (!(c.p > 0.0 && c.p < 1.0)) {
                     throw ConfigError("constant weighting requires p in (0,1)");
                   }
                 },
                 [](const BinaryStepWeight& b) {
                   // +-inf is allowed: it models the all-accept / all-reject
                   // limits exactly.
                   if (std::isnan(b.delta)) {
                     throw ConfigError("binary_step weighting requires a non-NaN delta");
                   }
                 },
                 [](const LogisticWeight& l) {
                   if (!(l.alpha > 0.0) || !std::isfinite(l.alpha) || !std::isfinite(l.delta)) {
                     throw ConfigError("logistic weighting requires alpha > 0 and finite delta");
                   }
                 },
                 [](const LikelihoodRatioWeight& l) {
                   if (!(l.alpha > 0.0) || !std::isfinite(l.alpha)) {
                     throw ConfigError("likelihood_ratio weighting requires alpha > 0");
                   }
                 },
                 [](const HybridWeight& h) {
                   if (!(h.beta > 0.0) || !std::isfinite(h.beta)) {
                     throw ConfigError("hybrid weighting requires beta > 0");
                   }
                 },
                 [](const auto&) {},
             },
             spec);
}

bool needs_likelihood_ratio(const WeightingSpec& spec) {
  return std::holds_alternative<LikelihoodRatioWeight>(spec) ||
         std::holds_alternative<HybridWeight>(spec);
}

bool monotone_in_reward(const WeightingSpec& spec) {
  return std::holds_alternative<BinaryStepWeight>(spec) ||
         std::holds_alternative<ClipWeight>(spec) ||
         std::holds_alternative<SigmoidalWeight>(spec) ||
         std::holds_alternative<LogisticWeight>(spec);
}

std::string variant_name(const WeightingSpec& spec) {
  return std::visit(Overload{
                        [](const ConstantWeight&) { return "constant"; },
                        [](const BinaryStepWeight&) { return "binary_step"; },
                        [](const ClipWeight&) { return "clip"; },
                        [](const SigmoidalWeight&) { return "sigmoidal"; },
                        [](const LogisticWeight&) { return "logistic"; },
                        [](const LikelihoodRatioWeight&) { return "likelihood_ratio"; },
                        [](const HybridWeight&) { return "hybrid"; },
                    },
                    spec);
}

double evaluate_weight(const WeightingSpec& spec, const WeightInput& input) {
  validate_spec(spec);
  const double r = input.reward;
  // A NaN reward silently mapped to weight 0 would mask a broken reward
  // model, so non-finite rewards are rejected outright.
  if (!std::isfinite(r)) throw ConfigError("non-finite reward passed to weighting function");

  return std::visit(
      Overload{
          [&](const ConstantWeight& c) { return c.p; },
          [&](const BinaryStepWeight& b) { return r >= b.delta ? 1.0 : 0.0; },
          [&](const ClipWeight&) { return clamp01(r); },
          [&](const SigmoidalWeight&) {
            if (r <= -1.0) {
              throw ConfigError("sigmoidal weighting is undefined for rewards <= -1");
            }
            return clamp01(r / (1.0 + r));
          },
          [&](const LogisticWeight& l) {
            // exp overflow saturates to +inf -> weight 0; underflow -> 1.
            return clamp01(1.0 / (1.0 + std::exp(-l.alpha * (r - l.delta))));
          },
          [&](const LikelihoodRatioWeight& l) {
            double ratio = checked_ratio(input, "likelihood_ratio");
            if (std::isinf(ratio)) return 1.0;
            return clamp01(l.alpha * ratio);
          },
          [&](const HybridWeight& h) {
            double ratio = checked_ratio(input, "hybrid");
            if (r <= 0.0) return 0.0;  // also sidesteps 0 * inf
            if (std::isinf(ratio)) return 1.0;
            return clamp01(h.beta * r * ratio);
          },
      },
      spec);
}

}  // namespace rsd
