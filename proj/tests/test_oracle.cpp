#include <doctest.h>

#include <cmath>
#include <limits>

#include "rsd/oracle.hpp"
#include "rsd/verify.hpp"
#include "test_worlds.hpp"

using namespace rsd;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("mixture distribution on the worked two-symbol instance") {
  auto world = testing::worked_instance_world();
  oracle::MixtureResult mix =
      oracle::exact_rsd_distribution(*world, "Q", BinaryStepWeight{0.7});

  // Hand-summed: w = (1, 0), nu = 1 - 0.6 = 0.4,
  // P = (1*0.6 + 0.4*0.1, 0 + 0.4*0.9) = (0.64, 0.36), reward 0.684.
  CHECK(mix.weights[0] == 1.0);
  CHECK(mix.weights[1] == 0.0);
  CHECK(mix.nu == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(mix.distribution[0] == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(mix.distribution[1] == doctest::Approx(0.36).epsilon(1e-14));
  CHECK(mix.expected_reward == doctest::Approx(0.684).epsilon(1e-14));
}

TEST_CASE("full acceptance and full rejection limits") {
  auto world = testing::worked_instance_world();

  oracle::MixtureResult all_accept =
      oracle::exact_rsd_distribution(*world, "Q", BinaryStepWeight{-kInf});
  CHECK(all_accept.nu == 0.0);
  CHECK(all_accept.distribution[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(all_accept.distribution[1] == doctest::Approx(0.4).epsilon(1e-14));

  oracle::MixtureResult all_reject =
      oracle::exact_rsd_distribution(*world, "Q", BinaryStepWeight{kInf});
  CHECK(all_reject.nu == 1.0);
  CHECK(all_reject.distribution[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(all_reject.distribution[1] == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("ratio conventions on zero draft probability") {
  // p_draft = (1, 0): the second symbol has ratio c/0 -> weight 1; a third
  // symbol with 0/0 -> weight 0.
  auto world = testing::one_step_world({1.0, 0.0, 0.0}, {0.2, 0.8, 0.0}, {0.5, 0.5, 0.5});
  oracle::MixtureResult mix =
      oracle::exact_rsd_distribution(*world, "Q", LikelihoodRatioWeight{1.0});
  CHECK(mix.weights[0] == doctest::Approx(0.2).epsilon(1e-14));  // min(1, 0.2/1)
  CHECK(mix.weights[1] == 1.0);                                  // 0.8/0
  CHECK(mix.weights[2] == 0.0);                                  // 0/0
}

TEST_CASE("expected_reward is the dot product") {
  CHECK(oracle::expected_reward({1.0}, {0.9}) == 0.9);
  CHECK(oracle::expected_reward({0.5, 0.5}, {0.0, 1.0}) == 0.5);
  CHECK(oracle::expected_reward({0.64, 0.36}, {0.9, 0.3}) ==
        doctest::Approx(0.684).epsilon(1e-14));
  CHECK_THROWS_AS(oracle::expected_reward({0.5, 0.5}, {1.0}), Error);
}

TEST_CASE("reward dominance report on degenerate and premise-violating instances") {
  // Equal models: the mixture cannot move the expectation.
  auto equal = testing::one_step_world({0.3, 0.7}, {0.3, 0.7}, {0.8, 0.2});
  oracle::DominanceReport rep = oracle::check_reward_dominance(*equal, "Q", ClipWeight{});
  CHECK(rep.e_draft == doctest::Approx(rep.e_target).epsilon(1e-14));
  CHECK(rep.holds);
  CHECK(rep.premise_expectation);
  CHECK(rep.premise_monotone);

  // The worked instance violates the expectation premise (e_target < e_draft)
  // yet still improves on the draft; the report flags the premise.
  auto world = testing::worked_instance_world();
  oracle::DominanceReport flagged =
      oracle::check_reward_dominance(*world, "Q", BinaryStepWeight{0.7});
  CHECK(flagged.e_draft == doctest::Approx(0.66).epsilon(1e-14));
  CHECK(flagged.e_target == doctest::Approx(0.36).epsilon(1e-14));
  CHECK_FALSE(flagged.premise_expectation);
  CHECK(flagged.e_rsd == doctest::Approx(0.684).epsilon(1e-14));
  CHECK(flagged.holds);
}

TEST_CASE("optimal threshold picks the largest budget-feasible reward cut") {
  auto world = testing::one_step_world({0.5, 0.3, 0.2}, {1.0 / 3, 1.0 / 3, 1.0 / 3},
                                       {0.9, 0.5, 0.1});
  oracle::ThresholdResult thr = oracle::optimal_threshold(*world, "Q", 0.5);
  // nu(0.9) = 1 - 0.5 = 0.5 <= gamma, and no larger cut is feasible.
  CHECK(thr.delta_gamma == 0.9);
  CHECK(thr.realized_nu == doctest::Approx(0.5).epsilon(1e-14));
  double target_mean = (0.9 + 0.5 + 0.1) / 3.0;
  CHECK(thr.achieved_reward == doctest::Approx(0.5 * 0.9 + 0.5 * target_mean).epsilon(1e-12));

  CHECK_THROWS_AS(oracle::optimal_threshold(*world, "Q", 0.0), ConfigError);
  CHECK_THROWS_AS(oracle::optimal_threshold(*world, "Q", 1.0), ConfigError);
}

TEST_CASE("single reward level accepts everything at nu = 0") {
  auto world = testing::one_step_world({0.4, 0.6}, {0.5, 0.5}, {0.3, 0.3});
  oracle::ThresholdResult thr = oracle::optimal_threshold(*world, "Q", 0.2);
  CHECK(thr.delta_gamma == 0.3);
  CHECK(thr.realized_nu == 0.0);
}

TEST_CASE("brute force dominates the feasible threshold and respects the cap") {
  auto world = testing::one_step_world({0.5, 0.3, 0.2}, {1.0 / 3, 1.0 / 3, 1.0 / 3},
                                       {0.9, 0.5, 0.1});
  oracle::ThresholdResult thr = oracle::optimal_threshold(*world, "Q", 0.5);
  oracle::BruteForceResult brute = oracle::brute_force_optimal_weighting(*world, "Q", 0.5, 4);
  CHECK(brute.reward >= thr.achieved_reward - 1e-9);
  CHECK(brute.nu <= 0.5 + 1e-12);

  // Two symbols, gamma near 1: accepting only the higher-reward symbol wins
  // when the target mean exceeds the lower reward.
  auto two = testing::one_step_world({0.5, 0.5}, {0.9, 0.1}, {0.9, 0.2});
  oracle::BruteForceResult best = oracle::brute_force_optimal_weighting(*two, "Q", 0.9, 1);
  CHECK(best.weights == std::vector<double>{1.0, 0.0});

  // Search-space cap: 12 symbols at grid 10 is over the limit.
  std::vector<double> p(12, 1.0 / 12);
  std::vector<double> r(12, 0.5);
  auto big = testing::one_step_world(p, p, r);
  CHECK_THROWS_AS(oracle::brute_force_optimal_weighting(*big, "Q", 0.5, 10), ConfigError);
}

TEST_CASE("empirical distribution helper") {
  std::size_t i = 0;
  auto draw = [&]() -> std::size_t { return i++ % 3; };
  std::vector<double> reference{1.0 / 3, 1.0 / 3, 1.0 / 3};
  oracle::EmpiricalResult emp = oracle::empirical_distribution(draw, 3, 99'999, reference);
  CHECK(emp.tv < 1e-4);

  // Reference equal to itself gives TV exactly 0.
  CHECK(oracle::tv_distance(reference, reference) == 0.0);
  CHECK_THROWS_AS(oracle::empirical_distribution(draw, 3, 0, reference), ConfigError);
}

TEST_CASE("verification campaigns pass at reduced unit-test sizes") {
  // The 0.01 TV tolerance is calibrated for 1e5 trials, so reduced runs
  // shrink the instance count, not the trial count.
  verify::CampaignResult p1 = verify::run_prop1(12, 17, 100'000);
  INFO(verify::format_report({p1}));
  CHECK(p1.passed);

  verify::CampaignResult p2 = verify::run_prop2(150, 18);
  INFO(verify::format_report({p2}));
  CHECK(p2.passed);

  verify::CampaignResult p3 = verify::run_prop3(40, 19);
  INFO(verify::format_report({p3}));
  CHECK(p3.passed);

  verify::CampaignResult sd = verify::run_sd_unbiased(4, 20, 100'000);
  INFO(verify::format_report({sd}));
  CHECK(sd.passed);

  // Zero instances: vacuous pass, flagged.
  verify::CampaignResult empty = verify::run_prop1(0, 1, 0);
  CHECK(empty.passed);
  CHECK(empty.vacuous);
}
