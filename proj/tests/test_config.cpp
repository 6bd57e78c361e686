#include <doctest.h>

#include "rsd/run_config.hpp"
#include "rsd/serialize.hpp"
#include "test_worlds.hpp"

using namespace rsd;

namespace {

const char* kTabularConfig = R"({
  "backend": {"kind": "tabular", "fixture": "unused.json"},
  "weighting": {"variant": "binary_step", "delta": 0.7},
  "rsd": {"max_steps": 32, "seed": 9,
          "sampling_draft": {"temperature": 0, "top_p": 1}},
  "method": "rsd",
  "dataset": "d.jsonl",
  "output": "o.jsonl",
  "concurrency": 3,
  "profiles": {"draft": 1500000000, "target": 7000000000, "prm": 7000000000},
  "deltas": [0, 0.5, 0.7, 1.0]
})";

}  // namespace

TEST_CASE("run config parses backends, weighting, and defaults") {
  RunConfig cfg = run_config_from_json_text(kTabularConfig);
  REQUIRE(cfg.tabular.has_value());
  CHECK(cfg.tabular->fixture == "unused.json");
  CHECK(std::get<BinaryStepWeight>(cfg.rsd.weighting).delta == 0.7);
  CHECK(cfg.rsd.max_steps == 32);
  CHECK(cfg.rsd.seed == 9);
  CHECK(cfg.method == Method::Rsd);
  CHECK(cfg.concurrency == 3);
  CHECK(cfg.sweep_deltas == std::vector<double>{0, 0.5, 0.7, 1.0});
  CHECK(cfg.profiles.at("draft").param_count == 1'500'000'000);

  // Defaults mirror the standard setting: greedy decode sampling for the
  // guided loop, diverse sampling for the sampling baselines, 7 speculative
  // symbols.
  CHECK(cfg.rsd.sampling_draft.temperature == 0.0);
  CHECK(cfg.rsd.sampling_draft.top_p == 1.0);
  CHECK(cfg.sampling_baselines.temperature == 0.7);
  CHECK(cfg.sampling_baselines.top_p == 0.8);
  CHECK(cfg.sd_k_spec == 7);
  CHECK(cfg.flops.prm_tokens_per_call == 1);
}

TEST_CASE("weighting defaults to the binary step at 0.7") {
  RunConfig cfg = run_config_from_json_text(R"({
    "backend": {"kind": "tabular", "fixture": "w.json"}})");
  auto* binary = std::get_if<BinaryStepWeight>(&cfg.rsd.weighting);
  REQUIRE(binary != nullptr);
  CHECK(binary->delta == 0.7);
}

TEST_CASE("config errors carry actionable diagnostics") {
  CHECK_THROWS_AS(run_config_from_json_text("{"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json_text("{}"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json_text(R"({"backend": {"kind": "weird"}})"), ConfigError);

  // Missing PRM endpoint is reported by name.
  RunConfig missing_prm = run_config_from_json_text(R"({
    "backend": {"kind": "http",
      "draft": {"base_url": "http://127.0.0.1:1", "model": "m1"},
      "target": {"base_url": "http://127.0.0.1:2", "model": "m2"}},
    "method": "rsd"})");
  try {
    build_backends(missing_prm);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("backend.prm") != std::string::npos);
  }
}

TEST_CASE("the speculative method refuses HTTP backends") {
  RunConfig cfg = run_config_from_json_text(R"({
    "backend": {"kind": "http",
      "draft": {"base_url": "http://127.0.0.1:1", "model": "m1"},
      "target": {"base_url": "http://127.0.0.1:2", "model": "m2"}},
    "method": "sd"})");
  try {
    build_backends(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("tabular") != std::string::npos);
  }
}

TEST_CASE("baseline methods get the diverse sampling parameters") {
  RunConfig cfg = run_config_from_json_text(kTabularConfig);
  cfg.method = Method::BestOfN;
  BatchOptions opt = batch_options(cfg);
  CHECK(opt.cfg.sampling_draft.temperature == 0.7);
  CHECK(opt.cfg.sampling_draft.top_p == 0.8);

  cfg.method = Method::Rsd;
  opt = batch_options(cfg);
  CHECK(opt.cfg.sampling_draft.temperature == 0.0);
}

TEST_CASE("dataset parsing reads jsonl with optional answers") {
  std::string text = R"({"id": "p1", "prompt": "Q1", "answer": "42"}
{"id": "p2", "prompt": "Q2"}
)";
  std::vector<DatasetRecord> dataset = dataset_from_jsonl_text(text);
  REQUIRE(dataset.size() == 2);
  CHECK(dataset[0].id == "p1");
  CHECK(dataset[0].answer == "42");
  CHECK_FALSE(dataset[1].answer.has_value());

  CHECK_THROWS_AS(dataset_from_jsonl_text(""), ConfigError);
  CHECK_THROWS_AS(dataset_from_jsonl_text("{bad json}\n"), ConfigError);
  CHECK_THROWS_AS(dataset_from_jsonl_text(R"({"id": "x"})"), ConfigError);  // no prompt
}

TEST_CASE("weighting specs round-trip through JSON") {
  std::vector<WeightingSpec> specs{
      ConstantWeight{0.3},          BinaryStepWeight{0.7},      ClipWeight{},
      SigmoidalWeight{},            LogisticWeight{10.0, 0.7},  LikelihoodRatioWeight{1.5},
      HybridWeight{0.8},
  };
  for (const WeightingSpec& spec : specs) {
    WeightingSpec back = weighting_from_json_text(weighting_to_json_text(spec));
    CHECK(variant_name(back) == variant_name(spec));
    CHECK(weighting_to_json_text(back) == weighting_to_json_text(spec));
  }
  CHECK_THROWS_AS(weighting_from_json_text(R"({"variant": "nope"})"), ConfigError);
  CHECK_THROWS_AS(weighting_from_json_text(R"({"variant": "constant", "p": 1.5})"),
                  ConfigError);
}

TEST_CASE("traces round-trip through their JSON lines") {
  auto world = testing::chain_world(3, 0.5, 0.8);
  auto b = testing::backends_for(world);
  RsdConfig cfg;
  cfg.weighting = BinaryStepWeight{0.5};
  cfg.sampling_draft = SamplingParams{1.0, 1.0};
  cfg.sampling_target = SamplingParams{1.0, 1.0};
  cfg.seed = 1234;
  cfg.score_target_steps = true;
  DecodeTrace t = decode_rsd(Prompt{"Q"}, *b.draft, *b.target, *b.prm, cfg);

  std::string line = trace_to_json_line(t);
  DecodeTrace back = trace_from_json_line(line);
  CHECK(trace_to_json_line(back) == line);
  CHECK(back.records.size() == t.records.size());
  CHECK(back.final_text == t.final_text);
  CHECK(back.seed == t.seed);
}

TEST_CASE("batch runs are reproducible and order-stable under concurrency") {
  auto world = testing::chain_world(4, 0.5, 0.8);
  auto b = testing::backends_for(world);
  Backends handles{b.draft.get(), b.target.get(), b.prm.get()};

  std::vector<DatasetRecord> dataset{
      {"p0", "Q", std::nullopt}, {"p1", "Q", std::nullopt}, {"p2", "Q", std::nullopt}};
  BatchOptions options;
  options.cfg.weighting = BinaryStepWeight{0.5};
  options.cfg.sampling_draft = SamplingParams{1.0, 1.0};
  options.cfg.sampling_target = SamplingParams{1.0, 1.0};
  options.cfg.seed = 31337;
  options.trials_per_prompt = 4;

  options.concurrency = 1;
  std::vector<PromptRun> serial = run_batch(dataset, handles, options);
  options.concurrency = 8;
  std::vector<PromptRun> parallel = run_batch(dataset, handles, options);

  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].record.id == parallel[i].record.id);
    CHECK(trace_to_json_line(serial[i].primary_trace()) ==
          trace_to_json_line(parallel[i].primary_trace()));
  }
}
