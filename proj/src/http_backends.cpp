#include "rsd/http_backends.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace rsd::http {

using nlohmann::json;

namespace {

// POST with retries. Returns the body of the first 2xx response; throws
// TransportError after exhausting attempts or on any 4xx.
std::string post_json(const std::string& base_url, const std::string& path,
                      const std::string& body, const RetryPolicy& retry) {
  if (base_url.empty()) throw ConfigError("backend base_url is empty");
  std::string last_failure = "no attempt made";
  for (int attempt = 0; attempt < std::max(1, retry.max_attempts); ++attempt) {
    if (attempt > 0) {
      auto delay = std::chrono::milliseconds(
          static_cast<long long>(retry.backoff_base_ms) * (1LL << (attempt - 1)));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(base_url);
    client.set_connection_timeout(std::chrono::milliseconds(retry.timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(retry.timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(retry.timeout_ms));

    httplib::Result res = client.Post(path, body, "application/json");
    if (!res) {
      last_failure = "transport failure contacting " + base_url + path + ": " +
                     httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    if (res->status >= 400 && res->status < 500) {
      throw TransportError("fatal HTTP " + std::to_string(res->status) + " from " + base_url +
                           path + ": " + res->body);
    }
    last_failure = "HTTP " + std::to_string(res->status) + " from " + base_url + path;
  }
  throw TransportError(last_failure + " (after " + std::to_string(retry.max_attempts) +
                       " attempts)");
}

json parse_response(const std::string& body, const std::string& where) {
  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) {
    throw TransportError("malformed JSON from " + where);
  }
  return parsed;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::int64_t approximate_token_count(const std::string& text) {
  std::int64_t words = 0;
  bool in_word = false;
  for (char c : text) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!ws && !in_word) ++words;
    in_word = !ws;
  }
  return std::max<std::int64_t>(words, 1);
}

HttpStepGenerator::HttpStepGenerator(CompletionsConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("completions endpoint missing: base_url");
  if (config_.model.empty()) throw ConfigError("completions config missing: model");
  if (config_.step_delimiter.empty()) throw ConfigError("step delimiter must be non-empty");
  id_ = config_.model;
}

StepGeneration HttpStepGenerator::generate_step(const Context& ctx,
                                                const SamplingParams& sampling,
                                                const GenerationCaps& caps, StreamRng&) {
  validate_sampling(sampling);
  if (caps.max_step_tokens < 1) throw ConfigError("max_step_tokens must be >= 1");

  json request = {
      {"model", config_.model},
      {"prompt", render_context(ctx)},
      {"temperature", sampling.temperature},
      {"top_p", sampling.top_p},
      {"max_tokens", caps.max_step_tokens},
      {"stop", json::array({config_.step_delimiter})},
  };

  std::string body =
      post_json(config_.base_url, "/v1/completions", request.dump(), config_.retry);
  json response = parse_response(body, config_.base_url + "/v1/completions");

  if (!response.contains("choices") || !response["choices"].is_array() ||
      response["choices"].empty()) {
    throw TransportError("completions response has no choices: " + config_.base_url);
  }
  const json& choice = response["choices"][0];
  std::string text = choice.value("text", std::string{});
  std::string finish_reason = choice.value("finish_reason", std::string{"stop"});

  StepGeneration out;
  out.stop_reason = StopReason::Delimiter;
  if (finish_reason == "length") {
    out.stop_reason = StopReason::LengthCap;
  } else {
    // vLLM reports stop_reason: null when generation ended on the EOS token
    // (vs. the matched stop string otherwise).
    bool eos_by_null_stop = choice.contains("stop_reason") && choice["stop_reason"].is_null();
    bool eos_by_text =
        config_.eos_text && !config_.eos_text->empty() &&
        text.find(*config_.eos_text) != std::string::npos;
    if (eos_by_null_stop || eos_by_text) {
      out.stop_reason = StopReason::Eos;
    } else if (!ends_with(text, config_.step_delimiter)) {
      // Servers strip the matched stop string; restore the delimiter so the
      // step stays well formed.
      text += config_.step_delimiter;
    }
  }

  out.step = Step{std::move(text), out.stop_reason == StopReason::Eos};

  if (response.contains("usage") && response["usage"].is_object()) {
    const json& usage = response["usage"];
    if (usage.contains("completion_tokens")) {
      out.token_count = usage["completion_tokens"].get<std::int64_t>();
    }
    if (usage.contains("prompt_tokens")) {
      out.prompt_token_count = usage["prompt_tokens"].get<std::int64_t>();
    }
  }
  if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
      choice["logprobs"].contains("token_logprobs") &&
      choice["logprobs"]["token_logprobs"].is_array()) {
    out.per_token_logprobs = choice["logprobs"]["token_logprobs"].get<std::vector<double>>();
  }
  if (out.token_count <= 0) {
    // Prefer the logprob count over the word-count approximation.
    out.token_count = out.per_token_logprobs
                          ? static_cast<std::int64_t>(out.per_token_logprobs->size())
                          : approximate_token_count(out.step.text);
  }
  if (out.per_token_logprobs &&
      static_cast<std::int64_t>(out.per_token_logprobs->size()) != out.token_count) {
    throw TransportError("completions response disagrees on token count: usage says " +
                         std::to_string(out.token_count) + ", logprobs say " +
                         std::to_string(out.per_token_logprobs->size()));
  }
  return out;
}

HttpRewardModel::HttpRewardModel(ScoreConfig config, std::string id)
    : config_(std::move(config)), id_(std::move(id)) {
  if (config_.base_url.empty()) throw ConfigError("PRM endpoint missing: base_url");
}

RewardScore HttpRewardModel::score_step(const Context& ctx, const Step& step) {
  if (step.text.empty()) throw ConfigError("cannot score an empty step");

  json request = {
      {"context", render_context(ctx)},
      {"step", step.text},
  };
  std::string body = post_json(config_.base_url, "/score", request.dump(), config_.retry);
  json response = parse_response(body, config_.base_url + "/score");

  if (!response.contains("reward") || !response["reward"].is_number()) {
    throw TransportError("score response missing numeric 'reward': " + config_.base_url);
  }
  double value = response["reward"].get<double>();
  if (!std::isfinite(value)) {
    throw TransportError("score response is non-finite: " + config_.base_url);
  }
  if (config_.scale == RewardScale::UnitInterval && (value < 0.0 || value > 1.0)) {
    throw TransportError("reward " + std::to_string(value) +
                         " outside declared unit-interval scale: " + config_.base_url);
  }
  return RewardScore{value, config_.scale};
}

}  // namespace rsd::http
