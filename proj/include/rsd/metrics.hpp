#pragma once

/**
 * FLOPs accounting under the 2N-per-token approximation and acceptance /
 * draft-only statistics aggregated over decode traces. Aggregation is a pure
 * fold, so partial stats from concurrent workers merge exactly.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsd/core.hpp"

namespace rsd::metrics {

struct ModelFlops {
  std::int64_t tokens = 0;
  std::int64_t params = 0;
  double flops = 0.0;  // 2 * params * tokens
};

struct FlopsReport {
  std::map<std::string, ModelFlops> per_model;
  double total_flops = 0.0;
  bool includes_prompt_tokens = false;
};

struct FlopsOptions {
  // A scoring call is costed like generating this many tokens at the reward
  // model's parameter count. Real forward passes consume the full context;
  // this is a knob, not a claim.
  std::int64_t prm_tokens_per_call = 1;
  // Also count prefill (prompt) tokens where backends reported them. Off by
  // default: completion tokens only.
  bool include_prompt_tokens = false;
};

// Sums draft, target, and reward-model token usage across traces and applies
// 2N per token. Every model id referenced by a trace must have a profile.
FlopsReport flops_of(const std::vector<DecodeTrace>& traces,
                     const std::map<std::string, ModelProfile>& profiles,
                     const FlopsOptions& options = {});

struct RunStats {
  double step_accept_rate = 0.0;       // draft-origin records / records
  double draft_only_solve_rate = 0.0;  // trajectories with no target record
  double mean_steps = 0.0;
  // Mean reward of emitted steps. Draft-origin records use the recorded
  // reward; target-origin records contribute only when they were scored.
  double mean_reward = 0.0;
  std::int64_t n_traces = 0;
  std::int64_t n_records = 0;
  std::int64_t n_rewarded_records = 0;
  std::int64_t n_errors = 0;
};

RunStats summarize(const std::vector<DecodeTrace>& traces);

// Count-weighted combination; summarize(A ++ B) == merge(summarize(A), summarize(B)).
RunStats merge_stats(const RunStats& a, const RunStats& b);

}  // namespace rsd::metrics
