#pragma once

/**
 * Decoding strategies: the reward-guided draft/target loop plus the baseline
 * decoders it is benchmarked against (single model, best-of-n, majority
 * voting, per-step best-of-n, and token-level speculative decoding on
 * tabular backends).
 *
 * A single decode is strictly sequential. All functions are reentrant over
 * shared backend handles; randomness comes from streams derived from
 * cfg.seed (accept / draft / target), so traces are bit-reproducible with
 * deterministic backends.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rsd/backends.hpp"
#include "rsd/core.hpp"
#include "rsd/weighting.hpp"

namespace rsd {

struct RsdConfig {
  WeightingSpec weighting = BinaryStepWeight{0.7};
  // Loop bound N: a decode emits at most N-1 steps.
  int max_steps = 64;
  std::int64_t max_total_tokens = 1 << 20;
  SamplingParams sampling_draft{0.0, 1.0};
  SamplingParams sampling_target{0.0, 1.0};
  GenerationCaps caps{};
  std::uint64_t seed = 0;
  // Score target replacement steps too (trace analytics only; acceptance
  // never re-checks them).
  bool score_target_steps = false;
  // Steps are scored as generated, delimiter included, by default. Setting
  // this strips one trailing delimiter from the text sent to the reward
  // model (HTTP scorers only; tabular reward tables key on the full symbol).
  bool strip_delimiter_before_scoring = false;
  std::string step_delimiter = kDefaultStepDelimiter;
};

void validate_config(const RsdConfig& cfg);

// The reward-guided loop: per step, the draft proposes, the reward model
// scores the proposal, and the acceptance criterion keeps it or swaps in a
// freshly generated target step. Rejected candidates are dropped from the
// context but kept in the trace. Backend transport failures and empty
// generations end the decode early with trace.error set.
DecodeTrace decode_rsd(const Prompt& prompt, StepGenerator& draft, StepGenerator& target,
                       RewardModel& prm, const RsdConfig& cfg);

// Which derived rng stream (and token column) a single-model decode uses.
// Draft matches the reward-guided loop's draft stream; Target matches its
// target stream, making the all-reject reduction reproducible step-for-step.
enum class SingleRole { Draft, Target };

DecodeTrace decode_single(const Prompt& prompt, StepGenerator& model, const RsdConfig& cfg,
                          SingleRole role = SingleRole::Draft);

struct BestOfNResult {
  std::size_t chosen_index = 0;
  std::vector<DecodeTrace> candidates;
  std::vector<double> final_rewards;  // NaN for failed candidates

  const DecodeTrace& chosen() const { return candidates[chosen_index]; }
};

// n independent decodes; returns the candidate whose final step scores
// highest, ties broken by lowest index. Requires temperature > 0 when n > 1.
BestOfNResult decode_best_of_n(const Prompt& prompt, StepGenerator& model, RewardModel& prm,
                               int n, const RsdConfig& cfg);

using AnswerExtractor = std::function<std::optional<std::string>(const std::string&)>;

struct MajorityVoteResult {
  std::string answer;
  // (answer, count) in first-occurrence order.
  std::vector<std::pair<std::string, int>> votes;
  std::vector<DecodeTrace> samples;
  int abstentions = 0;
};

// Most frequent extracted answer wins; ties go to the answer seen first;
// samples the extractor cannot parse abstain. Throws when every sample
// abstains.
MajorityVoteResult decode_majority_voting(const Prompt& prompt, StepGenerator& model, int n,
                                          const AnswerExtractor& extract, const RsdConfig& cfg);

// Per step, draws n_per_step candidates from the single model and appends
// the one with the highest reward (ties to the lowest candidate index).
DecodeTrace decode_process_best_of_n(const Prompt& prompt, StepGenerator& model,
                                     RewardModel& prm, int n_per_step, const RsdConfig& cfg);

struct SdRoundLog {
  std::vector<int> proposals_per_round;
};

// Token-level speculative decoding at symbol granularity, tabular backends
// only: the draft proposes up to k_spec symbols, each is kept with
// probability min(1, P_target/P_draft), and the first rejection is replaced
// by a draw from the normalized residual max(0, P_target - P_draft). The
// emitted distribution is exactly the target model's. Proposal sampling uses
// the exact tables; cfg sampling parameters are ignored.
DecodeTrace decode_sd(const Prompt& prompt, StepGenerator& draft, StepGenerator& target,
                      int k_spec, const RsdConfig& cfg, SdRoundLog* rounds = nullptr);

// `\boxed{...}` answer extractor (the default grader input).
std::optional<std::string> extract_boxed_answer(const std::string& text);

}  // namespace rsd
