#pragma once

/**
 * Core domain types for reward-guided speculative decoding.
 *
 * Everything here is an immutable-by-convention value type: decodes copy and
 * extend contexts instead of mutating shared state, so traces and contexts
 * can be handed between worker threads freely.
 */

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsd {

// Base error. ConfigError maps to CLI exit code 2, as does TransportError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, fixture, or argument.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// HTTP backend failure after retries (5xx/timeout) or fatal 4xx.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Default reasoning-step delimiter: a generation ending in a blank line.
inline constexpr const char* kDefaultStepDelimiter = "\n\n";

struct Prompt {
  std::string text;
};

// One reasoning step. `terminal` marks an end-of-sequence step; non-terminal
// segmented steps end with the step delimiter.
struct Step {
  std::string text;
  bool terminal = false;

  friend bool operator==(const Step&, const Step&) = default;
};

// Prompt plus the accepted steps so far (the generation context).
struct Context {
  Prompt prompt;
  std::vector<Step> steps;
};

inline bool is_blank(const std::string& s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\f' && c != '\v') return false;
  }
  return true;
}

inline void validate_prompt(const Prompt& p) {
  if (is_blank(p.text)) throw ConfigError("prompt is empty after whitespace trimming");
}

// Deterministic byte-stable concatenation: prompt text followed by the step
// texts in order.
inline std::string render_context(const Context& ctx) {
  std::string out = ctx.prompt.text;
  for (const Step& s : ctx.steps) out += s.text;
  return out;
}

enum class StepOrigin { Draft, Target };

inline const char* to_string(StepOrigin o) {
  return o == StepOrigin::Draft ? "draft" : "target";
}

// Ledger entry for one decoded step: which model produced it, the reward the
// draft candidate scored, and what it cost.
struct StepRecord {
  Step step;
  double reward = 0.0;  // reward of the draft candidate at this position
  double weight = 1.0;  // acceptance probability assigned to the candidate
  StepOrigin origin = StepOrigin::Draft;
  std::optional<Step> draft_candidate;   // the rejected candidate when origin == Target
  std::optional<double> target_reward;   // analytics only, when target steps are scored
  std::int64_t draft_tokens = 0;
  std::int64_t target_tokens = 0;
  std::int64_t prm_calls = 0;
  std::optional<std::int64_t> draft_prompt_tokens;
  std::optional<std::int64_t> target_prompt_tokens;
};

enum class StoppedBy { Eos, MaxLength };

inline const char* to_string(StoppedBy s) {
  return s == StoppedBy::Eos ? "eos" : "max_length";
}

// Full per-step ledger of one decode.
struct DecodeTrace {
  std::vector<StepRecord> records;
  StoppedBy stopped_by = StoppedBy::MaxLength;
  std::string final_text;  // concatenation of the emitted step texts
  std::string draft_model;
  std::string target_model;
  std::string prm_model;
  std::uint64_t seed = 0;
  // Set when a backend failed mid-decode; records cover the prefix that
  // completed before the failure.
  std::optional<std::string> error;
};

inline std::int64_t total_draft_tokens(const DecodeTrace& t) {
  std::int64_t n = 0;
  for (const auto& r : t.records) n += r.draft_tokens;
  return n;
}

inline std::int64_t total_target_tokens(const DecodeTrace& t) {
  std::int64_t n = 0;
  for (const auto& r : t.records) n += r.target_tokens;
  return n;
}

inline std::int64_t total_prm_calls(const DecodeTrace& t) {
  std::int64_t n = 0;
  for (const auto& r : t.records) n += r.prm_calls;
  return n;
}

inline bool has_target_record(const DecodeTrace& t) {
  for (const auto& r : t.records) {
    if (r.origin == StepOrigin::Target) return true;
  }
  return false;
}

// Identity and size of a served model, for FLOPs accounting (2N per token).
struct ModelProfile {
  std::string id;
  std::int64_t param_count = 0;
};

inline void validate_profile(const ModelProfile& p) {
  if (p.id.empty()) throw ConfigError("model profile id is empty");
  if (p.param_count <= 0) throw ConfigError("model profile param_count must be > 0: " + p.id);
}

}  // namespace rsd
