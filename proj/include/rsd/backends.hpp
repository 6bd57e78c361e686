#pragma once

/**
 * Model abstractions: step generators and reward models, plus the tabular
 * synthetic backend used for exact math and statistical tests.
 *
 * A TabularWorld is a finite-alphabet world: every reachable context key maps
 * to conditional distributions for the draft and target models and a reward
 * per symbol. Context keys are exactly the rendered context strings, so a
 * fixture enumerates the reachable prefix tree it cares about.
 */

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "rsd/core.hpp"
#include "rsd/rng.hpp"

namespace rsd {

enum class StopReason { Delimiter, Eos, LengthCap };

inline const char* to_string(StopReason s) {
  switch (s) {
    case StopReason::Delimiter: return "delimiter";
    case StopReason::Eos: return "eos";
    default: return "length_cap";
  }
}

struct StepGeneration {
  Step step;
  std::int64_t token_count = 0;
  StopReason stop_reason = StopReason::Delimiter;
  std::optional<std::vector<double>> per_token_logprobs;
  std::optional<std::int64_t> prompt_token_count;
};

struct SamplingParams {
  double temperature = 0.0;
  double top_p = 1.0;
};

void validate_sampling(const SamplingParams& p);

struct GenerationCaps {
  std::int64_t max_step_tokens = 512;
};

enum class RewardScale { UnitInterval, Unbounded };

struct RewardScore {
  double value = 0.0;
  RewardScale scale = RewardScale::UnitInterval;
};

class StepGenerator {
 public:
  virtual ~StepGenerator() = default;
  virtual StepGeneration generate_step(const Context& ctx, const SamplingParams& sampling,
                                       const GenerationCaps& caps, StreamRng& rng) = 0;
  virtual const std::string& id() const = 0;
};

class RewardModel {
 public:
  virtual ~RewardModel() = default;
  virtual RewardScore score_step(const Context& ctx, const Step& step) = 0;
  virtual const std::string& id() const = 0;
};

enum class WhichModel { Draft, Target };

struct TabularSymbol {
  std::string text;
  bool terminal = false;
};

// Conditional tables for one context key; vectors are indexed by symbol.
struct ContextTable {
  std::vector<double> p_draft;
  std::vector<double> p_target;
  std::vector<double> reward;
};

class TabularWorld {
 public:
  TabularWorld(std::vector<TabularSymbol> symbols, std::int64_t token_cost = 1,
               RewardScale reward_scale = RewardScale::UnitInterval);

  // Validates: distributions sum to 1 within 1e-12, probabilities >= 0,
  // rewards finite (and in [0,1] for unit-interval worlds).
  void add_context(std::string key, ContextTable table);

  const std::vector<TabularSymbol>& symbols() const { return symbols_; }
  std::size_t alphabet_size() const { return symbols_.size(); }
  std::int64_t token_cost() const { return token_cost_; }
  RewardScale reward_scale() const { return reward_scale_; }

  bool has_context(const std::string& key) const { return contexts_.count(key) != 0; }
  const ContextTable& context(const std::string& key) const;
  std::vector<std::string> context_keys() const;

  std::optional<std::size_t> find_symbol(const std::string& text) const;
  std::size_t symbol_index(const std::string& text) const;

 private:
  std::vector<TabularSymbol> symbols_;
  std::unordered_map<std::string, ContextTable> contexts_;
  std::unordered_map<std::string, std::size_t> symbol_index_;
  std::int64_t token_cost_ = 1;
  RewardScale reward_scale_ = RewardScale::UnitInterval;
};

// Exact conditional distribution lookup (no sampling).
const std::vector<double>& step_distribution(const TabularWorld& world, WhichModel model,
                                             const std::string& ctx_key);

// Draw an index from `probs` after temperature scaling and top-p truncation.
// temperature == 0 is the argmax (lowest index wins ties); temperature == 1
// with top_p == 1 samples the table as-is.
std::size_t sample_index(const std::vector<double>& probs, const SamplingParams& sampling,
                         StreamRng& rng);

// Capability of backends that can report exact per-step probabilities
// (tabular ones). Ratio-based weightings and the token-level speculative
// baseline require it.
class ExactDistributionSource {
 public:
  virtual ~ExactDistributionSource() = default;
  virtual const std::vector<double>& distribution_at(const Context& ctx) const = 0;
  virtual const TabularWorld& world() const = 0;
};

class TabularStepGenerator : public StepGenerator, public ExactDistributionSource {
 public:
  TabularStepGenerator(std::shared_ptr<const TabularWorld> world, WhichModel which,
                       std::string id);

  StepGeneration generate_step(const Context& ctx, const SamplingParams& sampling,
                               const GenerationCaps& caps, StreamRng& rng) override;
  const std::string& id() const override { return id_; }

  const std::vector<double>& distribution_at(const Context& ctx) const override;
  const TabularWorld& world() const override { return *world_; }

 private:
  std::shared_ptr<const TabularWorld> world_;
  WhichModel which_;
  std::string id_;
};

class TabularRewardModel : public RewardModel {
 public:
  TabularRewardModel(std::shared_ptr<const TabularWorld> world, std::string id);

  RewardScore score_step(const Context& ctx, const Step& step) override;
  const std::string& id() const override { return id_; }

 private:
  std::shared_ptr<const TabularWorld> world_;
  std::string id_;
};

}  // namespace rsd
