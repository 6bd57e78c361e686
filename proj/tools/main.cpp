// Command-line runner: single decodes, batch benchmarks, property
// verification campaigns, and threshold sweeps over one JSON run config.
//
// Exit codes: 0 success, 1 verification/assertion failure, 2 configuration
// or transport error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsd/harness.hpp"
#include "rsd/run_config.hpp"
#include "rsd/serialize.hpp"
#include "rsd/verify.hpp"

namespace {

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> concurrency;
  std::optional<std::string> output;
};

rsd::RunConfig load_config(const GlobalFlags& flags) {
  if (flags.config_path.empty()) throw rsd::ConfigError("--config is required");
  rsd::RunConfig cfg = rsd::load_run_config(flags.config_path);
  if (flags.seed) cfg.rsd.seed = *flags.seed;
  if (flags.concurrency) cfg.concurrency = *flags.concurrency;
  if (flags.output) cfg.output_path = *flags.output;
  return cfg;
}

}  // namespace

// One benchmark result row; the record layout is the CLI's output contract.
static std::string bench_line(const rsd::PromptRun& run) {
  nlohmann::json row;
  row["id"] = run.record.id;
  row["seed"] = run.seed;
  if (run.answer) row["answer"] = *run.answer;
  if (run.correct) row["correct"] = *run.correct;
  if (run.record.answer) row["gold"] = *run.record.answer;
  if (run.error) row["error"] = *run.error;
  if (!run.traces.empty()) {
    const rsd::DecodeTrace& t = run.primary_trace();
    row["final_text"] = t.final_text;
    row["steps"] = t.records.size();
    row["stopped_by"] = rsd::to_string(t.stopped_by);
    std::int64_t draft_tokens = 0, target_tokens = 0, prm_calls = 0;
    for (const rsd::DecodeTrace& trace : run.traces) {
      draft_tokens += rsd::total_draft_tokens(trace);
      target_tokens += rsd::total_target_tokens(trace);
      prm_calls += rsd::total_prm_calls(trace);
    }
    row["draft_tokens"] = draft_tokens;
    row["target_tokens"] = target_tokens;
    row["prm_calls"] = prm_calls;
  }
  return row.dump();
}

static int cmd_decode(const GlobalFlags& flags, const std::string& prompt_text) {
  rsd::RunConfig config = load_config(flags);
  rsd::BackendSet backends = build_backends(config);
  rsd::BatchOptions options = batch_options(config);

  std::vector<rsd::DatasetRecord> dataset{{"prompt-0", prompt_text, std::nullopt}};
  std::vector<rsd::PromptRun> runs = run_batch(dataset, backends.handles(), options);
  const rsd::PromptRun& run = runs.front();

  if (run.error && run.traces.empty()) {
    std::cerr << "decode failed: " << *run.error << "\n";
    return 2;
  }

  std::cout << run.primary_trace().final_text << "\n";

  std::string output = config.output_path.empty() ? "trace.jsonl" : config.output_path;
  std::string lines;
  for (const rsd::DecodeTrace& t : run.traces) lines += rsd::trace_to_json_line(t) + "\n";
  rsd::write_file(output, lines);
  std::cerr << "trace written to " << output << "\n";

  if (run.error) {
    std::cerr << "decode ended early: " << *run.error << "\n";
    return 2;
  }
  return 0;
}

static int cmd_bench(const GlobalFlags& flags) {
  rsd::RunConfig config = load_config(flags);
  if (config.dataset_path.empty()) throw rsd::ConfigError("bench needs a dataset path");
  std::vector<rsd::DatasetRecord> dataset = rsd::load_dataset(config.dataset_path);

  rsd::BackendSet backends = build_backends(config);
  rsd::BatchOptions options = batch_options(config);
  std::vector<rsd::PromptRun> runs = run_batch(dataset, backends.handles(), options);

  std::string lines;
  std::vector<std::string> failures;
  for (const rsd::PromptRun& run : runs) {
    lines += bench_line(run) + "\n";
    if (run.error) failures.push_back(run.record.id + ": " + *run.error);
  }
  if (!config.output_path.empty()) {
    rsd::write_file(config.output_path, lines);
    std::cerr << "results written to " << config.output_path << "\n";
  } else {
    std::cout << lines;
  }

  std::vector<rsd::DecodeTrace> traces = collect_traces(runs);
  rsd::metrics::RunStats stats = rsd::metrics::summarize(traces);
  std::cout << "stats: " << rsd::stats_to_json_text(stats) << "\n";
  if (auto accuracy = grade_accuracy(runs)) {
    std::cout << "accuracy: " << *accuracy << "\n";
  }
  std::printf("%-10s %10s %12s %11s %10s %12s\n", "method", "traces", "accept_rate",
              "draft_only", "mean_steps", "mean_reward");
  std::printf("%-10s %10lld %12.4f %11.4f %10.2f %12.4f\n", rsd::to_string(config.method),
              static_cast<long long>(stats.n_traces), stats.step_accept_rate,
              stats.draft_only_solve_rate, stats.mean_steps, stats.mean_reward);
  if (!config.profiles.empty()) {
    rsd::metrics::FlopsReport flops =
        rsd::metrics::flops_of(traces, config.profiles, config.flops);
    std::cout << "flops: " << rsd::flops_to_json_text(flops) << "\n";
    std::printf("%-10s %14s %16s %14s\n", "model", "tokens", "params", "flops");
    for (const auto& [model, entry] : flops.per_model) {
      std::printf("%-10s %14lld %16lld %14.4e\n", model.c_str(),
                  static_cast<long long>(entry.tokens), static_cast<long long>(entry.params),
                  entry.flops);
    }
    std::printf("%-10s %14s %16s %14.4e\n", "total", "", "", flops.total_flops);
  } else {
    std::cout << "flops: skipped (no model profiles configured)\n";
  }
  if (!failures.empty()) {
    std::cout << failures.size() << " prompt(s) failed:\n";
    for (const std::string& f : failures) std::cout << "  " << f << "\n";
  }
  return 0;
}

static int cmd_verify(const std::string& scope, int instances, std::uint64_t seed,
                      std::int64_t trials, int grid) {
  std::vector<rsd::verify::CampaignResult> results;
  if (scope == "prop1") {
    results.push_back(rsd::verify::run_prop1(instances, seed, trials));
  } else if (scope == "prop2") {
    results.push_back(rsd::verify::run_prop2(instances, seed));
  } else if (scope == "prop3") {
    results.push_back(rsd::verify::run_prop3(instances, seed, grid));
  } else if (scope == "sd_unbiased") {
    results.push_back(rsd::verify::run_sd_unbiased(instances, seed, trials));
  } else if (scope == "all") {
    results = rsd::verify::run_all(instances, seed, trials);
  } else {
    throw rsd::ConfigError("unknown verify scope: " + scope);
  }

  std::cout << rsd::verify::format_report(results);
  for (const auto& r : results) {
    if (!r.passed) return 1;
  }
  return 0;
}

static int cmd_sweep(const GlobalFlags& flags, const std::string& deltas_arg) {
  rsd::RunConfig config = load_config(flags);
  if (config.dataset_path.empty()) throw rsd::ConfigError("sweep needs a dataset path");
  std::vector<rsd::DatasetRecord> dataset = rsd::load_dataset(config.dataset_path);

  std::vector<double> deltas = config.sweep_deltas;
  if (!deltas_arg.empty()) {
    deltas.clear();
    std::istringstream in(deltas_arg);
    std::string token;
    while (std::getline(in, token, ',')) {
      if (token.empty()) continue;
      try {
        deltas.push_back(std::stod(token));
      } catch (const std::exception&) {
        throw rsd::ConfigError("cannot parse delta: " + token);
      }
    }
  }
  if (deltas.empty()) throw rsd::ConfigError("sweep needs deltas (config 'deltas' or --deltas)");
  if (config.profiles.empty()) {
    throw rsd::ConfigError("sweep needs model profiles for FLOPs accounting");
  }

  rsd::BackendSet backends = build_backends(config);
  rsd::BatchOptions options = batch_options(config);
  std::vector<rsd::SweepPoint> points =
      delta_sweep(dataset, backends.handles(), options, deltas, config.profiles, config.flops);

  std::string csv = sweep_to_csv(points);
  if (!config.output_path.empty()) {
    rsd::write_file(config.output_path, csv);
    std::cerr << "sweep CSV written to " << config.output_path << "\n";
  }

  std::printf("%8s %10s %16s %12s %14s\n", "delta", "accuracy", "draft_only_rate", "accept_rate",
              "total_flops");
  for (const rsd::SweepPoint& p : points) {
    std::printf("%8.3f %10s %16.4f %12.4f %14.4e\n", p.delta,
                p.accuracy ? std::to_string(*p.accuracy).c_str() : "-",
                p.stats.draft_only_solve_rate, p.stats.step_accept_rate, p.flops.total_flops);
  }
  return 0;
}

int main(int argc, char** argv) {
  CLI::App app{"reward-guided speculative decoding engine"};
  app.require_subcommand(1);

  GlobalFlags flags;
  std::uint64_t seed_flag = 0;
  int concurrency_flag = 0;
  std::string output_flag;

  app.add_option("--config", flags.config_path, "run config file (JSON)");
  auto* seed_opt = app.add_option("--seed", seed_flag, "root seed override");
  auto* conc_opt = app.add_option("--concurrency", concurrency_flag, "worker pool size override");
  auto* out_opt = app.add_option("--output", output_flag, "output path override");
  app.fallthrough();

  auto* decode = app.add_subcommand("decode", "decode one prompt and write its trace");
  std::string prompt_text;
  std::string prompt_file;
  decode->add_option("--prompt", prompt_text, "prompt text");
  decode->add_option("--prompt-file", prompt_file, "file containing the prompt text");

  auto* bench = app.add_subcommand("bench", "run the configured method over a dataset");

  auto* verify = app.add_subcommand("verify", "run property verification campaigns");
  std::string scope = "all";
  int instances = -1;
  std::uint64_t verify_seed = 1;
  std::int64_t trials = 100'000;
  int grid = 4;
  verify->add_option("--scope", scope, "prop1|prop2|prop3|sd_unbiased|all");
  verify->add_option("--instances", instances, "instances per campaign");
  verify->add_option("--trials", trials, "Monte-Carlo trials per instance");
  verify->add_option("--grid", grid, "brute-force weight grid resolution");

  auto* sweep = app.add_subcommand("sweep", "sweep binary-step thresholds over a dataset");
  std::string deltas_arg;
  sweep->add_option("--deltas", deltas_arg, "comma-separated threshold list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*seed_opt) flags.seed = seed_flag;
  if (*conc_opt) flags.concurrency = concurrency_flag;
  if (*out_opt) flags.output = output_flag;

  try {
    if (decode->parsed()) {
      if (prompt_text.empty() && !prompt_file.empty()) {
        prompt_text = rsd::read_file(prompt_file);
      }
      if (prompt_text.empty()) throw rsd::ConfigError("decode needs --prompt or --prompt-file");
      return cmd_decode(flags, prompt_text);
    }
    if (bench->parsed()) return cmd_bench(flags);
    if (verify->parsed()) {
      std::uint64_t s = flags.seed.value_or(verify_seed);
      if (instances < 0) instances = scope == "prop2" ? 1000 : scope == "prop3" ? 200
                                     : scope == "sd_unbiased"                   ? 50
                                                                                : 500;
      return cmd_verify(scope, instances, s, trials, grid);
    }
    if (sweep->parsed()) return cmd_sweep(flags, deltas_arg);
  } catch (const rsd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rsd::TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return 2;
  } catch (const rsd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
