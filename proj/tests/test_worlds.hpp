#pragma once

// Shared tabular fixtures for the test suites.

#include <memory>
#include <string>
#include <vector>

#include "rsd/backends.hpp"

namespace rsd::testing {

// The worked two-symbol instance used across the suites:
//   P_draft = (0.6, 0.4), P_target = (0.1, 0.9), reward = (0.9, 0.3).
// With a binary step at 0.7 the induced mixture is (0.64, 0.36) with
// nu = 0.4 and expected reward 0.684.
inline std::shared_ptr<const TabularWorld> worked_instance_world() {
  std::vector<TabularSymbol> symbols{{"a", true}, {"b", true}};
  TabularWorld world(symbols, 1, RewardScale::UnitInterval);
  world.add_context("Q", ContextTable{{0.6, 0.4}, {0.1, 0.9}, {0.9, 0.3}});
  return std::make_shared<const TabularWorld>(std::move(world));
}

// Single-context world over terminal symbols s0..sk-1.
inline std::shared_ptr<const TabularWorld> one_step_world(std::vector<double> p_draft,
                                                          std::vector<double> p_target,
                                                          std::vector<double> reward,
                                                          const std::string& key = "Q") {
  std::vector<TabularSymbol> symbols;
  for (std::size_t i = 0; i < p_draft.size(); ++i) {
    symbols.push_back({"s" + std::to_string(i), true});
  }
  TabularWorld world(symbols, 1, RewardScale::UnitInterval);
  world.add_context(key, ContextTable{std::move(p_draft), std::move(p_target), std::move(reward)});
  return std::make_shared<const TabularWorld>(std::move(world));
}

// Depth-limited chain world over {good, bad} steps plus terminal answers.
// The draft prefers the bad step, the target the good one; rewards favor
// good. Context keys enumerate the full reachable prefix tree.
inline std::shared_ptr<const TabularWorld> chain_world(int depth, double draft_good_prob,
                                                       double target_good_prob) {
  std::vector<TabularSymbol> symbols{
      {"good\n\n", false},
      {"bad\n\n", false},
      {"done \\boxed{42}", true},
  };
  TabularWorld world(symbols, 1, RewardScale::UnitInterval);

  std::vector<std::string> frontier{"Q"};
  for (int d = 0; d < depth; ++d) {
    std::vector<std::string> next;
    bool last = d + 1 == depth;
    for (const std::string& key : frontier) {
      if (last) {
        // Force termination at the final depth.
        world.add_context(key, ContextTable{{0, 0, 1}, {0, 0, 1}, {0.1, 0.1, 0.95}});
      } else {
        world.add_context(key, ContextTable{{draft_good_prob, 1.0 - draft_good_prob, 0.0},
                                            {target_good_prob, 1.0 - target_good_prob, 0.0},
                                            {0.9, 0.2, 0.95}});
        next.push_back(key + "good\n\n");
        next.push_back(key + "bad\n\n");
      }
    }
    frontier = std::move(next);
  }
  return std::make_shared<const TabularWorld>(std::move(world));
}

struct WorldBackends {
  std::shared_ptr<const TabularWorld> world;
  std::unique_ptr<TabularStepGenerator> draft;
  std::unique_ptr<TabularStepGenerator> target;
  std::unique_ptr<TabularRewardModel> prm;
};

inline WorldBackends backends_for(std::shared_ptr<const TabularWorld> world) {
  WorldBackends b;
  b.world = world;
  b.draft = std::make_unique<TabularStepGenerator>(world, WhichModel::Draft, "draft");
  b.target = std::make_unique<TabularStepGenerator>(world, WhichModel::Target, "target");
  b.prm = std::make_unique<TabularRewardModel>(world, "prm");
  return b;
}

}  // namespace rsd::testing
