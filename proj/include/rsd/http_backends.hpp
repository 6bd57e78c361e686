#pragma once

/**
 * HTTP clients for real served models.
 *
 * Generation speaks the OpenAI-compatible completions protocol
 * (POST /v1/completions) with the step delimiter passed as a stop string, so
 * step segmentation happens server-side. Reward scoring uses a minimal
 * POST /score with {"context", "step"} -> {"reward"} so any reward model can
 * be wrapped in a few lines.
 *
 * Requests are retried on 5xx and transport timeouts with exponential
 * backoff; 4xx responses are fatal. Clients keep no decode state, so a
 * failed request never corrupts a trace and retries are idempotent.
 */

#include <optional>
#include <string>

#include "rsd/backends.hpp"

namespace rsd::http {

struct RetryPolicy {
  int max_attempts = 3;
  int backoff_base_ms = 250;  // doubles per retry
  int timeout_ms = 30'000;
};

struct CompletionsConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8000
  std::string model;
  std::string step_delimiter = kDefaultStepDelimiter;
  // Backend-configured end-of-sequence text; a step containing it is
  // terminal. Servers reporting a null stop_reason on "stop" also mark the
  // step terminal.
  std::optional<std::string> eos_text;
  RetryPolicy retry;
};

struct ScoreConfig {
  std::string base_url;
  RewardScale scale = RewardScale::UnitInterval;
  RetryPolicy retry;
};

class HttpStepGenerator : public StepGenerator {
 public:
  explicit HttpStepGenerator(CompletionsConfig config);

  StepGeneration generate_step(const Context& ctx, const SamplingParams& sampling,
                               const GenerationCaps& caps, StreamRng& rng) override;
  const std::string& id() const override { return id_; }

 private:
  CompletionsConfig config_;
  std::string id_;
};

class HttpRewardModel : public RewardModel {
 public:
  explicit HttpRewardModel(ScoreConfig config, std::string id = "prm");

  RewardScore score_step(const Context& ctx, const Step& step) override;
  const std::string& id() const override { return id_; }

 private:
  ScoreConfig config_;
  std::string id_;
};

// Whitespace-delimited word count, the documented fallback when a server
// response lacks usage.completion_tokens.
std::int64_t approximate_token_count(const std::string& text);

}  // namespace rsd::http
