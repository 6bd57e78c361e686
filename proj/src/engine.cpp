#include "rsd/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsd/rng.hpp"

namespace rsd {

namespace {

namespace stream_id = rsd::stream;
// Sub-decodes (best-of-n candidates, majority samples) get their own root
// seeds so sibling trajectories never share draws.
constexpr std::uint64_t kCandidateBase = 2'000'000;

struct DecodeStreams {
  StreamRng accept;
  StreamRng draft;
  StreamRng target;

  explicit DecodeStreams(std::uint64_t seed)
      : accept(derive_seed(seed, stream_id::kAccept)),
        draft(derive_seed(seed, stream_id::kDraft)),
        target(derive_seed(seed, stream_id::kTarget)) {}
};

void finish_trace(DecodeTrace& tr) {
  tr.final_text.clear();
  for (const auto& rec : tr.records) tr.final_text += rec.step.text;
}

// Likelihood ratio P_target/P_draft of a drafted step from exact tables.
// 0/0 -> 0 and c/0 -> +inf, which the ratio weightings map to 0 and 1.
double table_likelihood_ratio(const ExactDistributionSource& draft,
                              const ExactDistributionSource& target, const Context& ctx,
                              const Step& step) {
  const TabularWorld& world = draft.world();
  std::size_t idx = world.symbol_index(step.text);
  double pm = draft.distribution_at(ctx)[idx];
  double pM = target.distribution_at(ctx)[idx];
  if (pm == 0.0) {
    return pM == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return pM / pm;
}

}  // namespace

void validate_config(const RsdConfig& cfg) {
  validate_spec(cfg.weighting);
  if (cfg.max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (cfg.max_total_tokens < 1) throw ConfigError("max_total_tokens must be >= 1");
  if (cfg.caps.max_step_tokens < 1) throw ConfigError("max_step_tokens must be >= 1");
  if (cfg.step_delimiter.empty()) throw ConfigError("step delimiter must be non-empty");
  validate_sampling(cfg.sampling_draft);
  validate_sampling(cfg.sampling_target);
}

namespace {

// The step exactly as sent to the reward model.
Step step_for_scoring(const Step& step, const RsdConfig& cfg) {
  if (!cfg.strip_delimiter_before_scoring) return step;
  const std::string& delim = cfg.step_delimiter;
  if (step.text.size() > delim.size() &&
      step.text.compare(step.text.size() - delim.size(), delim.size(), delim) == 0) {
    return Step{step.text.substr(0, step.text.size() - delim.size()), step.terminal};
  }
  return step;
}

}  // namespace

DecodeTrace decode_rsd(const Prompt& prompt, StepGenerator& draft, StepGenerator& target,
                       RewardModel& prm, const RsdConfig& cfg) {
  validate_prompt(prompt);
  validate_config(cfg);

  const bool wants_ratio = needs_likelihood_ratio(cfg.weighting);
  const ExactDistributionSource* draft_src = nullptr;
  const ExactDistributionSource* target_src = nullptr;
  if (wants_ratio) {
    draft_src = dynamic_cast<const ExactDistributionSource*>(&draft);
    target_src = dynamic_cast<const ExactDistributionSource*>(&target);
    if (!draft_src || !target_src) {
      throw ConfigError("ratio-based weighting requires exact-distribution (tabular) backends");
    }
    if (&draft_src->world() != &target_src->world()) {
      throw ConfigError("draft and target backends must share one tabular world");
    }
  }

  DecodeTrace tr;
  tr.draft_model = draft.id();
  tr.target_model = target.id();
  tr.prm_model = prm.id();
  tr.seed = cfg.seed;

  DecodeStreams rng(cfg.seed);
  Context ctx{prompt, {}};
  std::int64_t total_tokens = 0;

  for (int i = 1; i <= cfg.max_steps - 1; ++i) {
    StepRecord rec;
    try {
      StepGeneration draft_gen = draft.generate_step(ctx, cfg.sampling_draft, cfg.caps, rng.draft);
      if (draft_gen.step.text.empty()) {
        tr.error = "empty generation from " + draft.id();
        break;
      }
      RewardScore score = prm.score_step(ctx, step_for_scoring(draft_gen.step, cfg));

      WeightInput in{score.value, std::nullopt};
      if (wants_ratio) {
        in.likelihood_ratio = table_likelihood_ratio(*draft_src, *target_src, ctx, draft_gen.step);
      }
      double w = evaluate_weight(cfg.weighting, in);
      bool accepted = accept_with_weight(w, rng.accept);

      rec.reward = score.value;
      rec.weight = w;
      rec.draft_tokens = draft_gen.token_count;
      rec.draft_prompt_tokens = draft_gen.prompt_token_count;
      rec.prm_calls = 1;

      if (accepted) {
        rec.step = draft_gen.step;
        rec.origin = StepOrigin::Draft;
      } else {
        StepGeneration target_gen =
            target.generate_step(ctx, cfg.sampling_target, cfg.caps, rng.target);
        if (target_gen.step.text.empty()) {
          tr.error = "empty generation from " + target.id();
          break;
        }
        rec.step = target_gen.step;
        rec.origin = StepOrigin::Target;
        rec.draft_candidate = draft_gen.step;
        rec.target_tokens = target_gen.token_count;
        rec.target_prompt_tokens = target_gen.prompt_token_count;
        if (cfg.score_target_steps) {
          rec.target_reward = prm.score_step(ctx, step_for_scoring(target_gen.step, cfg)).value;
          rec.prm_calls += 1;
        }
      }
    } catch (const TransportError& e) {
      tr.error = e.what();
      break;
    }

    total_tokens += rec.draft_tokens + rec.target_tokens;
    ctx.steps.push_back(rec.step);
    tr.records.push_back(std::move(rec));

    if (tr.records.back().step.terminal) {
      tr.stopped_by = StoppedBy::Eos;
      break;
    }
    if (total_tokens >= cfg.max_total_tokens) break;
  }

  finish_trace(tr);
  return tr;
}

DecodeTrace decode_single(const Prompt& prompt, StepGenerator& model, const RsdConfig& cfg,
                          SingleRole role) {
  validate_prompt(prompt);
  validate_config(cfg);

  DecodeTrace tr;
  tr.seed = cfg.seed;
  const bool as_target = role == SingleRole::Target;
  (as_target ? tr.target_model : tr.draft_model) = model.id();
  const SamplingParams& sampling = as_target ? cfg.sampling_target : cfg.sampling_draft;

  StreamRng rng(
      derive_seed(cfg.seed, as_target ? stream_id::kTarget : stream_id::kDraft));
  Context ctx{prompt, {}};
  std::int64_t total_tokens = 0;

  for (int i = 1; i <= cfg.max_steps - 1; ++i) {
    StepRecord rec;
    try {
      StepGeneration gen = model.generate_step(ctx, sampling, cfg.caps, rng);
      if (gen.step.text.empty()) {
        tr.error = "empty generation from " + model.id();
        break;
      }
      rec.step = gen.step;
      rec.origin = as_target ? StepOrigin::Target : StepOrigin::Draft;
      (as_target ? rec.target_tokens : rec.draft_tokens) = gen.token_count;
      (as_target ? rec.target_prompt_tokens : rec.draft_prompt_tokens) = gen.prompt_token_count;
    } catch (const TransportError& e) {
      tr.error = e.what();
      break;
    }

    total_tokens += rec.draft_tokens + rec.target_tokens;
    ctx.steps.push_back(rec.step);
    tr.records.push_back(std::move(rec));

    if (tr.records.back().step.terminal) {
      tr.stopped_by = StoppedBy::Eos;
      break;
    }
    if (total_tokens >= cfg.max_total_tokens) break;
  }

  finish_trace(tr);
  return tr;
}

BestOfNResult decode_best_of_n(const Prompt& prompt, StepGenerator& model, RewardModel& prm,
                               int n, const RsdConfig& cfg) {
  if (n < 1) throw ConfigError("best-of-n requires n >= 1");
  if (n > 1 && cfg.sampling_draft.temperature == 0.0) {
    throw ConfigError("best-of-n with n > 1 requires temperature > 0 for diversity");
  }

  BestOfNResult out;
  out.candidates.reserve(static_cast<std::size_t>(n));
  out.final_rewards.assign(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::quiet_NaN());

  for (int i = 0; i < n; ++i) {
    RsdConfig sub = cfg;
    sub.seed = derive_seed(cfg.seed, kCandidateBase + static_cast<std::uint64_t>(i));
    out.candidates.push_back(decode_single(prompt, model, sub));
  }

  bool any = false;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    DecodeTrace& cand = out.candidates[i];
    if (cand.error || cand.records.empty()) continue;
    Context ctx{prompt, {}};
    for (std::size_t s = 0; s + 1 < cand.records.size(); ++s) {
      ctx.steps.push_back(cand.records[s].step);
    }
    try {
      RewardScore score = prm.score_step(ctx, cand.records.back().step);
      out.final_rewards[i] = score.value;
      cand.records.back().prm_calls += 1;
      cand.prm_model = prm.id();
      if (!any || score.value > best) {
        any = true;
        best = score.value;
        out.chosen_index = i;
      }
    } catch (const TransportError& e) {
      cand.error = e.what();
    }
  }
  if (!any) throw Error("best-of-n: all candidates failed");
  return out;
}

MajorityVoteResult decode_majority_voting(const Prompt& prompt, StepGenerator& model, int n,
                                          const AnswerExtractor& extract, const RsdConfig& cfg) {
  if (n < 1) throw ConfigError("majority voting requires n >= 1");
  if (!extract) throw ConfigError("majority voting requires an answer extractor");

  MajorityVoteResult out;
  out.samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RsdConfig sub = cfg;
    sub.seed = derive_seed(cfg.seed, kCandidateBase + static_cast<std::uint64_t>(i));
    out.samples.push_back(decode_single(prompt, model, sub));
  }

  for (const DecodeTrace& sample : out.samples) {
    if (sample.error) {
      ++out.abstentions;
      continue;
    }
    std::optional<std::string> answer = extract(sample.final_text);
    if (!answer) {
      ++out.abstentions;
      continue;
    }
    auto it = std::find_if(out.votes.begin(), out.votes.end(),
                           [&](const auto& v) { return v.first == *answer; });
    if (it == out.votes.end()) {
      out.votes.emplace_back(*answer, 1);
    } else {
      ++it->second;
    }
  }

  if (out.votes.empty()) throw Error("majority voting: every sample abstained");
  // Ties break toward the first-seen answer; votes are in occurrence order.
  int best = 0;
  for (const auto& [answer, count] : out.votes) {
    if (count > best) {
      best = count;
      out.answer = answer;
    }
  }
  return out;
}

DecodeTrace decode_process_best_of_n(const Prompt& prompt, StepGenerator& model,
                                     RewardModel& prm, int n_per_step, const RsdConfig& cfg) {
  if (n_per_step < 1) throw ConfigError("process best-of-n requires n_per_step >= 1");
  validate_prompt(prompt);
  validate_config(cfg);

  DecodeTrace tr;
  tr.draft_model = model.id();
  tr.prm_model = prm.id();
  tr.seed = cfg.seed;

  StreamRng rng(derive_seed(cfg.seed, stream_id::kDraft));
  Context ctx{prompt, {}};
  std::int64_t total_tokens = 0;

  for (int i = 1; i <= cfg.max_steps - 1; ++i) {
    StepRecord rec;
    try {
      std::int64_t step_tokens = 0;
      bool have_best = false;
      double best_reward = 0.0;
      StepGeneration best_gen;
      for (int c = 0; c < n_per_step; ++c) {
        StepGeneration gen = model.generate_step(ctx, cfg.sampling_draft, cfg.caps, rng);
        if (gen.step.text.empty()) throw TransportError("empty generation from " + model.id());
        step_tokens += gen.token_count;
        double reward = prm.score_step(ctx, step_for_scoring(gen.step, cfg)).value;
        if (!have_best || reward > best_reward) {
          have_best = true;
          best_reward = reward;
          best_gen = std::move(gen);
        }
      }
      rec.step = best_gen.step;
      rec.reward = best_reward;
      rec.origin = StepOrigin::Draft;
      // All candidate tokens were spent, not only the winner's.
      rec.draft_tokens = step_tokens;
      rec.draft_prompt_tokens = best_gen.prompt_token_count;
      rec.prm_calls = n_per_step;
    } catch (const TransportError& e) {
      tr.error = e.what();
      break;
    }

    total_tokens += rec.draft_tokens;
    ctx.steps.push_back(rec.step);
    tr.records.push_back(std::move(rec));

    if (tr.records.back().step.terminal) {
      tr.stopped_by = StoppedBy::Eos;
      break;
    }
    if (total_tokens >= cfg.max_total_tokens) break;
  }

  finish_trace(tr);
  return tr;
}

DecodeTrace decode_sd(const Prompt& prompt, StepGenerator& draft, StepGenerator& target,
                      int k_spec, const RsdConfig& cfg, SdRoundLog* rounds) {
  if (k_spec < 1) throw ConfigError("speculative decoding requires k_spec >= 1");
  validate_prompt(prompt);
  validate_config(cfg);

  const auto* draft_src = dynamic_cast<const ExactDistributionSource*>(&draft);
  const auto* target_src = dynamic_cast<const ExactDistributionSource*>(&target);
  if (!draft_src || !target_src) {
    throw ConfigError(
        "speculative decoding needs exact next-step distributions; only tabular backends "
        "expose them");
  }
  if (&draft_src->world() != &target_src->world()) {
    throw ConfigError("draft and target backends must share one tabular world");
  }
  const TabularWorld& world = draft_src->world();
  const std::int64_t cost = world.token_cost();

  DecodeTrace tr;
  tr.draft_model = draft.id();
  tr.target_model = target.id();
  tr.seed = cfg.seed;

  DecodeStreams rng(cfg.seed);
  const SamplingParams table_as_is{1.0, 1.0};
  Context ctx{prompt, {}};
  std::int64_t total_tokens = 0;
  int emitted = 0;
  bool done = false;

  while (!done && emitted < cfg.max_steps - 1 && total_tokens < cfg.max_total_tokens) {
    // Proposal phase: up to k_spec draft symbols from the current context,
    // stopping early at a terminal symbol or the step budget.
    std::vector<std::size_t> proposal_idx;
    std::vector<Context> proposal_ctx;
    Context sim = ctx;
    int budget = std::min(k_spec, cfg.max_steps - 1 - emitted);
    for (int j = 0; j < budget; ++j) {
      const std::vector<double>& pm = draft_src->distribution_at(sim);
      std::size_t idx = sample_index(pm, table_as_is, rng.draft);
      proposal_idx.push_back(idx);
      proposal_ctx.push_back(sim);
      const TabularSymbol& sym = world.symbols()[idx];
      if (sym.terminal) break;
      sim.steps.push_back(Step{sym.text, false});
    }
    if (rounds) rounds->proposals_per_round.push_back(static_cast<int>(proposal_idx.size()));

    // The target verifies every proposed position in one pass, so the round
    // costs |proposals| tokens on each side regardless of where the first
    // rejection lands; waste is attributed to the round's last emitted
    // record below.
    const std::int64_t round_cost = cost * static_cast<std::int64_t>(proposal_idx.size());
    std::int64_t attributed = 0;

    for (std::size_t j = 0; j < proposal_idx.size(); ++j) {
      const Context& here = proposal_ctx[j];
      std::size_t idx = proposal_idx[j];
      const std::vector<double>& pm = draft_src->distribution_at(here);
      const std::vector<double>& pM = target_src->distribution_at(here);
      double accept_prob = pm[idx] > 0.0 ? std::min(1.0, pM[idx] / pm[idx]) : 1.0;

      bool accepted = accept_prob >= 1.0 || uniform01(rng.accept) < accept_prob;
      StepRecord rec;
      rec.weight = accept_prob;
      rec.draft_tokens = cost;
      rec.target_tokens = cost;
      attributed += cost;

      if (accepted) {
        const TabularSymbol& sym = world.symbols()[idx];
        rec.step = Step{sym.text, sym.terminal};
        rec.origin = StepOrigin::Draft;
      } else {
        std::vector<double> residual(pM.size());
        double z = 0.0;
        for (std::size_t y = 0; y < pM.size(); ++y) {
          residual[y] = std::max(0.0, pM[y] - pm[y]);
          z += residual[y];
        }
        if (z <= 0.0) throw Error("speculative residual is empty despite a rejection");
        std::size_t ridx = sample_index(residual, table_as_is, rng.target);
        const TabularSymbol& sym = world.symbols()[ridx];
        rec.step = Step{sym.text, sym.terminal};
        rec.origin = StepOrigin::Target;
        rec.draft_candidate = Step{world.symbols()[idx].text, world.symbols()[idx].terminal};
      }

      total_tokens += rec.draft_tokens + rec.target_tokens;
      ctx.steps.push_back(rec.step);
      tr.records.push_back(std::move(rec));
      ++emitted;

      if (tr.records.back().step.terminal) {
        tr.stopped_by = StoppedBy::Eos;
        done = true;
        break;
      }
      if (emitted >= cfg.max_steps - 1 || total_tokens >= cfg.max_total_tokens) {
        done = true;
        break;
      }
      if (tr.records.back().origin == StepOrigin::Target) break;  // round over
    }

    if (attributed < round_cost && !tr.records.empty()) {
      StepRecord& last = tr.records.back();
      last.draft_tokens += round_cost - attributed;
      last.target_tokens += round_cost - attributed;
      total_tokens += 2 * (round_cost - attributed);
    }
  }

  finish_trace(tr);
  return tr;
}

std::optional<std::string> extract_boxed_answer(const std::string& text) {
  const std::string marker = "\\boxed{";
  std::size_t start = text.rfind(marker);
  if (start == std::string::npos) return std::nullopt;
  std::size_t pos = start + marker.size();
  int depth = 1;
  std::string answer;
  while (pos < text.size()) {
    char c = text[pos];
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return answer;
    }
    answer += c;
    ++pos;
  }
  return std::nullopt;  // unbalanced braces
}

}  // namespace rsd
