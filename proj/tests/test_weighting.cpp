#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rsd/rng.hpp"
#include "rsd/weighting.hpp"

using namespace rsd;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double w(const WeightingSpec& spec, double reward) {
  return evaluate_weight(spec, WeightInput{reward, std::nullopt});
}
}  // namespace

TEST_CASE("weighting definitions match their closed forms") {
  CHECK(w(BinaryStepWeight{0.7}, 0.8) == 1.0);
  CHECK(w(BinaryStepWeight{0.7}, 0.69) == 0.0);
  // Accepts at exactly r == delta.
  CHECK(w(BinaryStepWeight{0.7}, 0.7) == 1.0);

  CHECK(w(SigmoidalWeight{}, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w(SigmoidalWeight{}, 0.0) == 0.0);
  CHECK(w(SigmoidalWeight{}, -0.5) == 0.0);  // max(0, .) clamps

  CHECK(w(LogisticWeight{10.0, 0.7}, 0.7) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w(LogisticWeight{10.0, 0.7}, 5.0) > 0.99);

  CHECK(w(ClipWeight{}, 1.3) == 1.0);
  CHECK(w(ClipWeight{}, -0.2) == 0.0);
  CHECK(w(ClipWeight{}, 0.4) == 0.4);

  CHECK(w(ConstantWeight{0.25}, 0.0) == 0.25);
  CHECK(w(ConstantWeight{0.25}, 123.0) == 0.25);

  CHECK(evaluate_weight(LikelihoodRatioWeight{1.0}, WeightInput{0.9, 0.25}) == 0.25);
  CHECK(evaluate_weight(LikelihoodRatioWeight{2.0}, WeightInput{0.0, 0.9}) == 1.0);
  CHECK(evaluate_weight(LikelihoodRatioWeight{1.0}, WeightInput{0.5, kInf}) == 1.0);

  CHECK(evaluate_weight(HybridWeight{1.0}, WeightInput{0.5, 1.0}) == 0.5);
  CHECK(evaluate_weight(HybridWeight{2.0}, WeightInput{0.5, 3.0}) == 1.0);
  CHECK(evaluate_weight(HybridWeight{1.0}, WeightInput{0.0, kInf}) == 0.0);
}

TEST_CASE("binary step accepts the all-accept and all-reject limits") {
  CHECK(w(BinaryStepWeight{-kInf}, -5.0) == 1.0);
  CHECK(w(BinaryStepWeight{kInf}, 5.0) == 0.0);
}

TEST_CASE("invalid inputs are rejected, not coerced") {
  CHECK_THROWS_AS(w(ClipWeight{}, kNan), ConfigError);
  CHECK_THROWS_AS(w(ClipWeight{}, kInf), ConfigError);
  CHECK_THROWS_AS(w(BinaryStepWeight{0.5}, -kInf), ConfigError);
  CHECK_THROWS_AS(w(SigmoidalWeight{}, -1.0), ConfigError);
  CHECK_THROWS_AS(w(SigmoidalWeight{}, -1.5), ConfigError);
  CHECK_THROWS_AS(w(ConstantWeight{0.0}, 0.5), ConfigError);
  CHECK_THROWS_AS(w(ConstantWeight{1.0}, 0.5), ConfigError);
  CHECK_THROWS_AS(w(LogisticWeight{0.0, 0.5}, 0.5), ConfigError);
  // Ratio variants need a ratio.
  CHECK_THROWS_AS(w(LikelihoodRatioWeight{1.0}, 0.5), ConfigError);
  CHECK_THROWS_AS(w(HybridWeight{1.0}, 0.5), ConfigError);
  CHECK_THROWS_AS(evaluate_weight(LikelihoodRatioWeight{1.0}, WeightInput{0.5, -0.5}),
                  ConfigError);
  CHECK_THROWS_AS(evaluate_weight(HybridWeight{1.0}, WeightInput{0.5, kNan}), ConfigError);
}

TEST_CASE("weights stay in [0,1] for random finite inputs") {
  std::mt19937_64 rng(11);
  std::vector<WeightingSpec> specs{ConstantWeight{0.3},    BinaryStepWeight{0.4}, ClipWeight{},
                                   SigmoidalWeight{},      LogisticWeight{7.0, 0.2},
                                   LikelihoodRatioWeight{0.7}, HybridWeight{1.3}};
  for (int i = 0; i < 5000; ++i) {
    double r = (uniform01(rng) - 0.2) * 10.0;
    double ratio = uniform01(rng) * 5.0;
    for (const auto& spec : specs) {
      if (std::holds_alternative<SigmoidalWeight>(spec) && r <= -1.0) continue;
      WeightInput in{r, needs_likelihood_ratio(spec) ? std::optional<double>(ratio)
                                                     : std::nullopt};
      double value = evaluate_weight(spec, in);
      CHECK(value >= 0.0);
      CHECK(value <= 1.0);
    }
  }
}

TEST_CASE("non-constant reward-only variants are non-decreasing in r") {
  std::mt19937_64 rng(13);
  std::vector<WeightingSpec> specs{BinaryStepWeight{0.4}, ClipWeight{}, SigmoidalWeight{},
                                   LogisticWeight{3.0, 0.6}};
  for (const auto& spec : specs) {
    CHECK(monotone_in_reward(spec));
    for (int i = 0; i < 2000; ++i) {
      double r1 = uniform01(rng) * 4.0 - 0.5;
      double r2 = r1 + uniform01(rng) * 2.0;
      CHECK(w(spec, r1) <= w(spec, r2) + 1e-15);
    }
  }
  CHECK_FALSE(monotone_in_reward(WeightingSpec{ConstantWeight{0.5}}));
  CHECK_FALSE(monotone_in_reward(WeightingSpec{LikelihoodRatioWeight{1.0}}));
  CHECK_FALSE(monotone_in_reward(WeightingSpec{HybridWeight{1.0}}));
}

TEST_CASE("acceptance is deterministic and draw-free when the weight is 0 or 1") {
  CountingRng64 rng(3);
  CHECK_FALSE(accept(WeightingSpec{BinaryStepWeight{0.7}}, WeightInput{0.69, std::nullopt}, rng));
  CHECK(accept(WeightingSpec{BinaryStepWeight{0.7}}, WeightInput{0.9, std::nullopt}, rng));
  CHECK(accept(WeightingSpec{ClipWeight{}}, WeightInput{1.8, std::nullopt}, rng));
  CHECK_FALSE(accept(WeightingSpec{ClipWeight{}}, WeightInput{-4.0, std::nullopt}, rng));
  CHECK(rng.draws() == 0);

  // Fractional weights draw exactly once.
  CHECK_NOTHROW(accept(WeightingSpec{ConstantWeight{0.5}}, WeightInput{0.0, std::nullopt}, rng));
  CHECK(rng.draws() == 1);
}

TEST_CASE("empirical acceptance frequency matches the weight") {
  // Bernoulli mean within 3 sigma at 1e5 draws, for a sweep of constants.
  const int n = 100'000;
  for (double p : {0.1, 0.37, 0.5, 0.9, 0.99}) {
    std::mt19937_64 rng(derive_seed(2024, static_cast<std::uint64_t>(p * 1000)));
    WeightingSpec spec = ConstantWeight{p};
    int accepted = 0;
    for (int i = 0; i < n; ++i) {
      if (accept(spec, WeightInput{0.0, std::nullopt}, rng)) ++accepted;
    }
    double freq = static_cast<double>(accepted) / n;
    double tol = 3.0 * std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(freq - p) <= tol);
  }

  // Same for a mid-range logistic weight.
  WeightingSpec logistic = LogisticWeight{4.0, 0.5};
  double expected = evaluate_weight(logistic, WeightInput{0.62, std::nullopt});
  std::mt19937_64 rng(555);
  int accepted = 0;
  for (int i = 0; i < n; ++i) {
    if (accept(logistic, WeightInput{0.62, std::nullopt}, rng)) ++accepted;
  }
  CHECK(std::abs(static_cast<double>(accepted) / n - expected) <=
        3.0 * std::sqrt(expected * (1.0 - expected) / n));
}

TEST_CASE("acceptance sequences are identical under a fixed seed") {
  WeightingSpec spec = ConstantWeight{0.42};
  std::mt19937_64 a(777), b(777);
  for (int i = 0; i < 1000; ++i) {
    CHECK(accept(spec, WeightInput{0.0, std::nullopt}, a) ==
          accept(spec, WeightInput{0.0, std::nullopt}, b));
  }
}
