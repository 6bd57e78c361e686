#include "rsd/metrics.hpp"

namespace rsd::metrics {

namespace {

void add_tokens(std::map<std::string, std::int64_t>& usage, const std::string& model,
                std::int64_t tokens) {
  if (model.empty()) {
    if (tokens != 0) throw ConfigError("trace has token usage without a model id");
    return;
  }
  usage[model] += tokens;
}

}  // namespace

FlopsReport flops_of(const std::vector<DecodeTrace>& traces,
                     const std::map<std::string, ModelProfile>& profiles,
                     const FlopsOptions& options) {
  if (options.prm_tokens_per_call < 0) {
    throw ConfigError("prm_tokens_per_call must be >= 0");
  }

  std::map<std::string, std::int64_t> usage;
  for (const DecodeTrace& t : traces) {
    // Referenced models appear in the report even at zero tokens.
    if (!t.draft_model.empty()) usage[t.draft_model];
    if (!t.target_model.empty()) usage[t.target_model];
    if (!t.prm_model.empty()) usage[t.prm_model];
    for (const StepRecord& r : t.records) {
      add_tokens(usage, t.draft_model, r.draft_tokens);
      add_tokens(usage, t.target_model, r.target_tokens);
      add_tokens(usage, t.prm_model, r.prm_calls * options.prm_tokens_per_call);
      if (options.include_prompt_tokens) {
        if (r.draft_prompt_tokens) add_tokens(usage, t.draft_model, *r.draft_prompt_tokens);
        if (r.target_prompt_tokens) add_tokens(usage, t.target_model, *r.target_prompt_tokens);
      }
    }
  }

  FlopsReport report;
  report.includes_prompt_tokens = options.include_prompt_tokens;
  for (const auto& [model, tokens] : usage) {
    auto it = profiles.find(model);
    if (it == profiles.end()) {
      throw ConfigError("no model profile for '" + model + "' referenced by traces");
    }
    validate_profile(it->second);
    ModelFlops entry;
    entry.tokens = tokens;
    entry.params = it->second.param_count;
    entry.flops = 2.0 * static_cast<double>(entry.params) * static_cast<double>(entry.tokens);
    report.total_flops += entry.flops;
    report.per_model.emplace(model, entry);
  }
  return report;
}

RunStats summarize(const std::vector<DecodeTrace>& traces) {
  if (traces.empty()) throw ConfigError("summarize requires at least one trace");

  RunStats s;
  s.n_traces = static_cast<std::int64_t>(traces.size());
  std::int64_t draft_records = 0;
  std::int64_t draft_only = 0;
  double reward_sum = 0.0;

  for (const DecodeTrace& t : traces) {
    if (t.error) ++s.n_errors;
    if (!has_target_record(t)) ++draft_only;
    s.n_records += static_cast<std::int64_t>(t.records.size());
    for (const StepRecord& r : t.records) {
      if (r.origin == StepOrigin::Draft) {
        ++draft_records;
        if (r.prm_calls > 0) {
          reward_sum += r.reward;
          ++s.n_rewarded_records;
        }
      } else if (r.target_reward) {
        reward_sum += *r.target_reward;
        ++s.n_rewarded_records;
      }
    }
  }

  s.step_accept_rate =
      s.n_records > 0 ? static_cast<double>(draft_records) / static_cast<double>(s.n_records)
                      : 0.0;
  s.draft_only_solve_rate = static_cast<double>(draft_only) / static_cast<double>(s.n_traces);
  s.mean_steps = static_cast<double>(s.n_records) / static_cast<double>(s.n_traces);
  s.mean_reward =
      s.n_rewarded_records > 0 ? reward_sum / static_cast<double>(s.n_rewarded_records) : 0.0;
  return s;
}

RunStats merge_stats(const RunStats& a, const RunStats& b) {
  if (a.n_traces == 0) return b;
  if (b.n_traces == 0) return a;

  RunStats m;
  m.n_traces = a.n_traces + b.n_traces;
  m.n_records = a.n_records + b.n_records;
  m.n_rewarded_records = a.n_rewarded_records + b.n_rewarded_records;
  m.n_errors = a.n_errors + b.n_errors;

  auto weighted = [](double va, std::int64_t na, double vb, std::int64_t nb) {
    std::int64_t n = na + nb;
    if (n == 0) return 0.0;
    return (va * static_cast<double>(na) + vb * static_cast<double>(nb)) /
           static_cast<double>(n);
  };
  m.step_accept_rate = weighted(a.step_accept_rate, a.n_records, b.step_accept_rate, b.n_records);
  m.draft_only_solve_rate =
      weighted(a.draft_only_solve_rate, a.n_traces, b.draft_only_solve_rate, b.n_traces);
  m.mean_steps = weighted(a.mean_steps, a.n_traces, b.mean_steps, b.n_traces);
  m.mean_reward = weighted(a.mean_reward, a.n_rewarded_records, b.mean_reward,
                           b.n_rewarded_records);
  return m;
}

}  // namespace rsd::metrics
