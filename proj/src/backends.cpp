#include "rsd/backends.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsd/rng.hpp"

namespace rsd {

namespace {
constexpr double kSumTolerance = 1e-12;
}

void validate_sampling(const SamplingParams& p) {
  if (!(p.temperature >= 0.0) || !std::isfinite(p.temperature)) {
    throw ConfigError("sampling temperature must be finite and >= 0");
  }
  if (!(p.top_p > 0.0 && p.top_p <= 1.0)) {
    throw ConfigError("sampling top_p must be in (0, 1]");
  }
}

TabularWorld::TabularWorld(std::vector<TabularSymbol> symbols, std::int64_t token_cost,
                           RewardScale reward_scale)
    : symbols_(std::move(symbols)), token_cost_(token_cost), reward_scale_(reward_scale) {
  if (symbols_.empty()) throw ConfigError("tabular world needs a non-empty alphabet");
  if (token_cost_ < 1) throw ConfigError("tabular token cost must be >= 1");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].text.empty()) throw ConfigError("tabular symbol text is empty");
    if (!symbol_index_.emplace(symbols_[i].text, i).second) {
      throw ConfigError("duplicate tabular symbol: " + symbols_[i].text);
    }
  }
}

void TabularWorld::add_context(std::string key, ContextTable table) {
  auto check_dist = [&](const std::vector<double>& p, const char* name) {
    if (p.size() != symbols_.size()) {
      throw ConfigError(std::string(name) + " size mismatch for context: " + key);
    }
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(name) + " has a negative or non-finite entry: " + key);
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw ConfigError(std::string(name) + " does not sum to 1 for context: " + key);
    }
  };
  check_dist(table.p_draft, "p_m");
  check_dist(table.p_target, "p_M");
  if (table.reward.size() != symbols_.size()) {
    throw ConfigError("reward table size mismatch for context: " + key);
  }
  for (double r : table.reward) {
    if (!std::isfinite(r)) throw ConfigError("non-finite reward in context: " + key);
    if (reward_scale_ == RewardScale::UnitInterval && (r < 0.0 || r > 1.0)) {
      throw ConfigError("reward outside [0,1] in unit-interval world, context: " + key);
    }
  }
  if (!contexts_.emplace(std::move(key), std::move(table)).second) {
    throw ConfigError("duplicate context key in tabular world");
  }
}

const ContextTable& TabularWorld::context(const std::string& key) const {
  auto it = contexts_.find(key);
  if (it == contexts_.end()) throw ConfigError("unknown tabular context: " + key);
  return it->second;
}

std::vector<std::string> TabularWorld::context_keys() const {
  std::vector<std::string> keys;
  keys.reserve(contexts_.size());
  for (const auto& [k, _] : contexts_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::optional<std::size_t> TabularWorld::find_symbol(const std::string& text) const {
  auto it = symbol_index_.find(text);
  if (it == symbol_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TabularWorld::symbol_index(const std::string& text) const {
  auto idx = find_symbol(text);
  if (!idx) throw ConfigError("unknown tabular symbol: " + text);
  return *idx;
}

const std::vector<double>& step_distribution(const TabularWorld& world, WhichModel model,
                                             const std::string& ctx_key) {
  const ContextTable& t = world.context(ctx_key);
  return model == WhichModel::Draft ? t.p_draft : t.p_target;
}

std::size_t sample_index(const std::vector<double>& probs, const SamplingParams& sampling,
                         StreamRng& rng) {
  validate_sampling(sampling);
  if (probs.empty()) throw Error("empty distribution");

  if (sampling.temperature == 0.0) {
    return static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
  }

  std::vector<double> weights(probs.size());
  if (sampling.temperature == 1.0) {
    weights = probs;
  } else {
    double inv_t = 1.0 / sampling.temperature;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      weights[i] = probs[i] > 0.0 ? std::pow(probs[i], inv_t) : 0.0;
    }
  }

  if (sampling.top_p < 1.0) {
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total <= 0.0) throw Error("distribution has zero mass");
    double cum = 0.0;
    std::vector<double> kept(weights.size(), 0.0);
    for (std::size_t i : order) {
      kept[i] = weights[i];
      cum += weights[i] / total;
      if (cum >= sampling.top_p) break;
    }
    weights = std::move(kept);
  }

  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) throw Error("distribution has zero mass");
  double u = uniform01(rng) * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  // Rounding may leave cum fractionally below total; take the last nonzero.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  throw Error("distribution has zero mass");
}

TabularStepGenerator::TabularStepGenerator(std::shared_ptr<const TabularWorld> world,
                                           WhichModel which, std::string id)
    : world_(std::move(world)), which_(which), id_(std::move(id)) {
  if (!world_) throw ConfigError("tabular generator needs a world");
}

const std::vector<double>& TabularStepGenerator::distribution_at(const Context& ctx) const {
  return step_distribution(*world_, which_, render_context(ctx));
}

StepGeneration TabularStepGenerator::generate_step(const Context& ctx,
                                                   const SamplingParams& sampling,
                                                   const GenerationCaps& caps,
                                                   StreamRng& rng) {
  if (caps.max_step_tokens < 1) throw ConfigError("max_step_tokens must be >= 1");
  const std::vector<double>& dist = distribution_at(ctx);
  std::size_t idx = sample_index(dist, sampling, rng);
  const TabularSymbol& sym = world_->symbols()[idx];

  StepGeneration out;
  out.step = Step{sym.text, sym.terminal};
  out.token_count = world_->token_cost();
  out.stop_reason = sym.terminal ? StopReason::Eos : StopReason::Delimiter;
  // Prefill estimate: prompt counts as one symbol, plus one per prior step.
  out.prompt_token_count =
      static_cast<std::int64_t>(1 + ctx.steps.size()) * world_->token_cost();
  return out;
}

TabularRewardModel::TabularRewardModel(std::shared_ptr<const TabularWorld> world, std::string id)
    : world_(std::move(world)), id_(std::move(id)) {
  if (!world_) throw ConfigError("tabular reward model needs a world");
}

RewardScore TabularRewardModel::score_step(const Context& ctx, const Step& step) {
  if (step.text.empty()) throw ConfigError("cannot score an empty step");
  const ContextTable& t = world_->context(render_context(ctx));
  std::size_t idx = world_->symbol_index(step.text);
  return RewardScore{t.reward[idx], world_->reward_scale()};
}

}  // namespace rsd
