#include <doctest.h>

#include <random>

#include "mock_servers.hpp"
#include "rsd/http_backends.hpp"

using namespace rsd;
using rsd::testing::CompletionReply;
using rsd::testing::CompletionScript;
using rsd::testing::MockHttpServer;
using rsd::testing::ScoreScript;

namespace {

http::RetryPolicy fast_retry() {
  http::RetryPolicy r;
  r.max_attempts = 3;
  r.backoff_base_ms = 1;
  r.timeout_ms = 2000;
  return r;
}

http::CompletionsConfig generator_config(const MockHttpServer& server) {
  http::CompletionsConfig c;
  c.base_url = server.base_url();
  c.model = "mock-model";
  c.retry = fast_retry();
  return c;
}

}  // namespace

TEST_CASE("completions client consumes a scripted step") {
  MockHttpServer server;
  CompletionScript script;
  script.per_model["mock-model"].push_back(
      CompletionReply{"step one\n\n", "stop", CompletionReply::StopField::MatchedStop, 4, 12});
  install_completions(server, script);
  server.start();

  http::HttpStepGenerator gen(generator_config(server));
  StreamRng rng(1);
  StepGeneration out =
      gen.generate_step(Context{Prompt{"solve it\n"}, {}}, SamplingParams{0.0, 1.0}, {}, rng);

  CHECK(out.step.text == "step one\n\n");
  CHECK(out.stop_reason == StopReason::Delimiter);
  CHECK_FALSE(out.step.terminal);
  CHECK(out.token_count == 4);
  REQUIRE(out.prompt_token_count.has_value());
  CHECK(*out.prompt_token_count == 12);
  CHECK(script.prompts_seen.at(0) == "solve it\n");
}

TEST_CASE("stripped stop strings are restored on the step text") {
  MockHttpServer server;
  CompletionScript script;
  script.per_model["mock-model"].push_back(
      CompletionReply{"bare step", "stop", CompletionReply::StopField::MatchedStop, 2, 1});
  install_completions(server, script);
  server.start();

  http::HttpStepGenerator gen(generator_config(server));
  StreamRng rng(1);
  StepGeneration out =
      gen.generate_step(Context{Prompt{"p"}, {}}, SamplingParams{0.0, 1.0}, {}, rng);
  CHECK(out.step.text == "bare step\n\n");
  CHECK(out.stop_reason == StopReason::Delimiter);
}

TEST_CASE("null stop_reason and eos_text both mark terminal steps") {
  MockHttpServer server;
  CompletionScript script;
  script.per_model["mock-model"].push_back(
      CompletionReply{"the answer", "stop", CompletionReply::StopField::Null, 2, 1});
  script.per_model["mock-model"].push_back(
      CompletionReply{"done<|eot|>", "stop", CompletionReply::StopField::Absent, 2, 1});
  install_completions(server, script);
  server.start();

  http::CompletionsConfig cfg = generator_config(server);
  cfg.eos_text = "<|eot|>";
  http::HttpStepGenerator gen(cfg);
  StreamRng rng(1);

  StepGeneration eos_by_null =
      gen.generate_step(Context{Prompt{"p"}, {}}, SamplingParams{0.0, 1.0}, {}, rng);
  CHECK(eos_by_null.stop_reason == StopReason::Eos);
  CHECK(eos_by_null.step.terminal);
  CHECK(eos_by_null.step.text == "the answer");

  StepGeneration eos_by_text =
      gen.generate_step(Context{Prompt{"p"}, {}}, SamplingParams{0.0, 1.0}, {}, rng);
  CHECK(eos_by_text.stop_reason == StopReason::Eos);
  CHECK(eos_by_text.step.terminal);
}

TEST_CASE("length-capped generations report LengthCap and fall back to word counts") {
  MockHttpServer server;
  CompletionScript script;
  script.per_model["mock-model"].push_back(
      CompletionReply{"one two  three\nfour", "length", CompletionReply::StopField::Absent,
                      std::nullopt, std::nullopt});
  install_completions(server, script);
  server.start();

  http::HttpStepGenerator gen(generator_config(server));
  StreamRng rng(1);
  StepGeneration out =
      gen.generate_step(Context{Prompt{"p"}, {}}, SamplingParams{0.0, 1.0}, {}, rng);
  CHECK(out.stop_reason == StopReason::LengthCap);
  CHECK(out.token_count == 4);  // whitespace-delimited approximation
}

TEST_CASE("score client returns served rewards under the declared scale") {
  MockHttpServer server;
  ScoreScript script;
  script.rewards = {0.73};
  install_score(server, script);
  server.start();

  http::ScoreConfig cfg;
  cfg.base_url = server.base_url();
  cfg.retry = fast_retry();
  http::HttpRewardModel prm(cfg);

  RewardScore score = prm.score_step(Context{Prompt{"ctx"}, {}}, Step{"step\n\n", false});
  CHECK(score.value == 0.73);
  CHECK(score.scale == RewardScale::UnitInterval);
  REQUIRE(script.calls.size() == 1);
  CHECK(script.calls[0].first == "ctx");
  CHECK(script.calls[0].second == "step\n\n");
}

TEST_CASE("outcome-reward mode accepts unbounded scores without clamping") {
  MockHttpServer server;
  ScoreScript script;
  script.rewards = {-2.4};
  install_score(server, script);
  server.start();

  http::ScoreConfig cfg;
  cfg.base_url = server.base_url();
  cfg.scale = RewardScale::Unbounded;
  cfg.retry = fast_retry();
  http::HttpRewardModel prm(cfg, "orm");
  RewardScore score = prm.score_step(Context{Prompt{"ctx"}, {}}, Step{"s", false});
  CHECK(score.value == -2.4);
  CHECK(score.scale == RewardScale::Unbounded);
}

TEST_CASE("scores outside the declared unit interval are an error") {
  MockHttpServer server;
  ScoreScript script;
  script.rewards = {1.7};
  install_score(server, script);
  server.start();

  http::ScoreConfig cfg;
  cfg.base_url = server.base_url();
  cfg.retry = fast_retry();
  http::HttpRewardModel prm(cfg);
  CHECK_THROWS_AS(prm.score_step(Context{Prompt{"c"}, {}}, Step{"s", false}), TransportError);
}

TEST_CASE("transient 5xx responses are retried exactly max_attempts times") {
  MockHttpServer server;
  ScoreScript script;
  script.fail_first = 2;  // two failures, third attempt succeeds
  script.rewards = {0.9};
  install_score(server, script);
  server.start();

  http::ScoreConfig cfg;
  cfg.base_url = server.base_url();
  cfg.retry = fast_retry();
  http::HttpRewardModel prm(cfg);
  RewardScore score = prm.score_step(Context{Prompt{"c"}, {}}, Step{"s", false});
  CHECK(score.value == 0.9);
  CHECK(script.requests == 3);

  // A server that never recovers exhausts exactly max_attempts requests.
  script.fail_first = 100;
  int before = script.requests;
  CHECK_THROWS_AS(prm.score_step(Context{Prompt{"c"}, {}}, Step{"s", false}), TransportError);
  CHECK(script.requests - before == 3);
}

TEST_CASE("4xx responses are fatal without retries") {
  MockHttpServer server;
  ScoreScript script;
  script.fail_first = 5;
  script.fail_status = 404;
  install_score(server, script);
  server.start();

  http::ScoreConfig cfg;
  cfg.base_url = server.base_url();
  cfg.retry = fast_retry();
  http::HttpRewardModel prm(cfg);
  CHECK_THROWS_AS(prm.score_step(Context{Prompt{"c"}, {}}, Step{"s", false}), TransportError);
  CHECK(script.requests == 1);
}

TEST_CASE("per-token logprobs fill in and cross-check token counts") {
  MockHttpServer server;
  CompletionScript script;
  CompletionReply with_logprobs{"a b\n\n", "stop", CompletionReply::StopField::MatchedStop,
                                std::nullopt, std::nullopt};
  with_logprobs.token_logprobs = std::vector<double>{-0.1, -0.5, -0.01};
  CompletionReply mismatched{"a b\n\n", "stop", CompletionReply::StopField::MatchedStop, 7,
                             std::nullopt};
  mismatched.token_logprobs = std::vector<double>{-0.1, -0.5};
  script.per_model["mock-model"] = {with_logprobs, mismatched};
  install_completions(server, script);
  server.start();

  http::HttpStepGenerator gen(generator_config(server));
  StreamRng rng(1);
  StepGeneration out =
      gen.generate_step(Context{Prompt{"p"}, {}}, SamplingParams{0.0, 1.0}, {}, rng);
  CHECK(out.token_count == 3);  // from the logprob count, not word count
  REQUIRE(out.per_token_logprobs.has_value());
  CHECK(out.per_token_logprobs->size() == 3);

  CHECK_THROWS_AS(gen.generate_step(Context{Prompt{"p"}, {}}, SamplingParams{0.0, 1.0}, {}, rng),
                  TransportError);
}

TEST_CASE("token approximation counts whitespace-delimited words") {
  CHECK(http::approximate_token_count("one two three") == 3);
  CHECK(http::approximate_token_count("  padded   words \n here ") == 3);
  CHECK(http::approximate_token_count("") == 1);  // floor of one token
}
