#include "rsd/harness.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "rsd/rng.hpp"

namespace rsd {

Method method_from_string(const std::string& name) {
  if (name == "rsd") return Method::Rsd;
  if (name == "single") return Method::Single;
  if (name == "best_of_n") return Method::BestOfN;
  if (name == "majority") return Method::Majority;
  if (name == "process_best_of_n") return Method::ProcessBestOfN;
  if (name == "sd") return Method::Sd;
  throw ConfigError("unknown method: " + name);
}

const char* to_string(Method m) {
  switch (m) {
    case Method::Rsd: return "rsd";
    case Method::Single: return "single";
    case Method::BestOfN: return "best_of_n";
    case Method::Majority: return "majority";
    case Method::ProcessBestOfN: return "process_best_of_n";
    default: return "sd";
  }
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

PromptRun run_one(const DatasetRecord& record, std::uint64_t seed, const Backends& b,
                  const BatchOptions& options) {
  PromptRun run;
  run.record = record;
  run.seed = seed;
  RsdConfig cfg = options.cfg;
  cfg.seed = seed;
  Prompt prompt{record.prompt};

  try {
    switch (options.method) {
      case Method::Rsd: {
        require(b.draft && b.target && b.prm, "rsd needs draft, target, and reward backends");
        run.traces.push_back(decode_rsd(prompt, *b.draft, *b.target, *b.prm, cfg));
        break;
      }
      case Method::Single: {
        require(b.target != nullptr, "single-model decoding needs a target backend");
        run.traces.push_back(decode_single(prompt, *b.target, cfg, SingleRole::Target));
        break;
      }
      case Method::BestOfN: {
        require(b.draft && b.prm, "best-of-n needs draft and reward backends");
        BestOfNResult r = decode_best_of_n(prompt, *b.draft, *b.prm, options.best_of_n, cfg);
        run.traces = std::move(r.candidates);
        run.primary = r.chosen_index;
        break;
      }
      case Method::Majority: {
        require(b.draft != nullptr, "majority voting needs a draft backend");
        MajorityVoteResult r =
            decode_majority_voting(prompt, *b.draft, options.best_of_n, options.extractor, cfg);
        run.traces = std::move(r.samples);
        run.answer = r.answer;
        // Report the first sample that voted for the winning answer.
        for (std::size_t i = 0; i < run.traces.size(); ++i) {
          auto extracted = options.extractor(run.traces[i].final_text);
          if (extracted && *extracted == r.answer) {
            run.primary = i;
            break;
          }
        }
        break;
      }
      case Method::ProcessBestOfN: {
        require(b.draft && b.prm, "process best-of-n needs draft and reward backends");
        run.traces.push_back(
            decode_process_best_of_n(prompt, *b.draft, *b.prm, options.process_n_per_step, cfg));
        break;
      }
      case Method::Sd: {
        require(b.draft && b.target, "speculative decoding needs draft and target backends");
        run.traces.push_back(decode_sd(prompt, *b.draft, *b.target, options.sd_k_spec, cfg));
        break;
      }
    }
  } catch (const Error& e) {
    run.error = e.what();
    return run;
  }

  if (!run.answer && options.extractor && !run.traces.empty()) {
    run.answer = options.extractor(run.primary_trace().final_text);
  }
  if (run.answer && record.answer) run.correct = *run.answer == *record.answer;
  if (!run.traces.empty() && run.primary_trace().error) run.error = run.primary_trace().error;
  return run;
}

}  // namespace

std::vector<PromptRun> run_batch(const std::vector<DatasetRecord>& dataset,
                                 const Backends& backends, const BatchOptions& options) {
  if (dataset.empty()) throw ConfigError("batch run needs a non-empty dataset");
  if (options.trials_per_prompt < 1) throw ConfigError("trials_per_prompt must be >= 1");
  if (options.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  validate_config(options.cfg);

  const std::size_t total = dataset.size() * static_cast<std::size_t>(options.trials_per_prompt);
  std::vector<PromptRun> results(total);

  auto work = [&](std::size_t index) {
    const DatasetRecord& record = dataset[index / options.trials_per_prompt];
    std::uint64_t seed = trajectory_seed(options.cfg.seed, static_cast<std::uint64_t>(index));
    results[index] = run_one(record, seed, backends, options);
  };

  int workers = std::min<int>(options.concurrency, static_cast<int>(total));
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= total) return;
          work(i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  return results;
}

std::vector<DecodeTrace> collect_traces(const std::vector<PromptRun>& runs) {
  std::vector<DecodeTrace> traces;
  for (const PromptRun& run : runs) {
    for (const DecodeTrace& t : run.traces) traces.push_back(t);
  }
  return traces;
}

std::optional<double> grade_accuracy(const std::vector<PromptRun>& runs) {
  std::int64_t graded = 0;
  std::int64_t correct = 0;
  for (const PromptRun& run : runs) {
    if (!run.record.answer) continue;
    ++graded;
    if (run.correct.value_or(false)) ++correct;
  }
  if (graded == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(graded);
}

std::vector<SweepPoint> delta_sweep(const std::vector<DatasetRecord>& dataset,
                                    const Backends& backends, const BatchOptions& options,
                                    const std::vector<double>& deltas,
                                    const std::map<std::string, ModelProfile>& profiles,
                                    const metrics::FlopsOptions& flops_options) {
  if (deltas.empty()) throw ConfigError("delta sweep needs at least one delta");
  if (!std::holds_alternative<BinaryStepWeight>(options.cfg.weighting)) {
    throw ConfigError("delta sweep requires the binary-step weighting");
  }

  std::vector<SweepPoint> points;
  points.reserve(deltas.size());
  for (double delta : deltas) {
    BatchOptions opt = options;
    opt.method = Method::Rsd;
    opt.cfg.weighting = BinaryStepWeight{delta};  // shared root seed across deltas

    std::vector<PromptRun> runs = run_batch(dataset, backends, opt);
    std::vector<DecodeTrace> traces = collect_traces(runs);

    SweepPoint point;
    point.delta = delta;
    point.stats = metrics::summarize(traces);
    point.flops = metrics::flops_of(traces, profiles, flops_options);
    point.accuracy = grade_accuracy(runs);
    point.target_invocation_rate = 1.0 - point.stats.step_accept_rate;
    points.push_back(std::move(point));
  }
  return points;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "delta,accuracy,draft_only_rate,accept_rate,total_flops\n";
  for (const SweepPoint& p : points) {
    out << p.delta << ",";
    if (p.accuracy) {
      out << *p.accuracy;
    } else {
      out << "nan";
    }
    out << "," << p.stats.draft_only_solve_rate << "," << p.stats.step_accept_rate << ","
        << p.flops.total_flops << "\n";
  }
  return out.str();
}

}  // namespace rsd
