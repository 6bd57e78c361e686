#pragma once

/**
 * Batch benchmark harness: fans prompt trajectories out to a bounded worker
 * pool, grades answers, and aggregates stats/FLOPs. Per-trajectory seeds are
 * derived from (root seed, input index), so results are reproducible under
 * any concurrency level, and output order always follows input order.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsd/backends.hpp"
#include "rsd/engine.hpp"
#include "rsd/metrics.hpp"
#include "rsd/serialize.hpp"

namespace rsd {

enum class Method { Rsd, Single, BestOfN, Majority, ProcessBestOfN, Sd };

Method method_from_string(const std::string& name);
const char* to_string(Method m);

struct BatchOptions {
  Method method = Method::Rsd;
  RsdConfig cfg;
  int trials_per_prompt = 1;
  int concurrency = 1;
  int best_of_n = 16;
  int process_n_per_step = 8;
  int sd_k_spec = 7;
  // Grader: extracted answer compared to the dataset's gold answer.
  AnswerExtractor extractor = extract_boxed_answer;
};

struct PromptRun {
  DatasetRecord record;
  std::uint64_t seed = 0;
  // All decoded trajectories for this prompt (candidates/samples included);
  // `primary` indexes the one reported as the outcome.
  std::vector<DecodeTrace> traces;
  std::size_t primary = 0;
  std::optional<std::string> answer;
  std::optional<bool> correct;
  std::optional<std::string> error;  // whole-prompt failure

  const DecodeTrace& primary_trace() const { return traces[primary]; }
};

struct Backends {
  StepGenerator* draft = nullptr;
  StepGenerator* target = nullptr;
  RewardModel* prm = nullptr;
};

// Runs `options.method` over every (record, trial) pair. Per-prompt failures
// are recorded in the item and the run continues.
std::vector<PromptRun> run_batch(const std::vector<DatasetRecord>& dataset,
                                 const Backends& backends, const BatchOptions& options);

std::vector<DecodeTrace> collect_traces(const std::vector<PromptRun>& runs);

// Fraction of graded runs whose extracted answer matched the gold answer;
// empty when nothing was gradable.
std::optional<double> grade_accuracy(const std::vector<PromptRun>& runs);

struct SweepPoint {
  double delta = 0.0;
  metrics::RunStats stats;
  metrics::FlopsReport flops;
  std::optional<double> accuracy;
  double target_invocation_rate = 0.0;  // target-origin records / records
};

// Runs the reward-guided decode once per delta over the whole dataset with a
// shared root seed (monotone coupling across deltas). Requires a binary-step
// weighting template and a non-empty delta list.
std::vector<SweepPoint> delta_sweep(const std::vector<DatasetRecord>& dataset,
                                    const Backends& backends, const BatchOptions& options,
                                    const std::vector<double>& deltas,
                                    const std::map<std::string, ModelProfile>& profiles,
                                    const metrics::FlopsOptions& flops_options);

// Plot-ready CSV with the fixed header
// delta,accuracy,draft_only_rate,accept_rate,total_flops.
std::string sweep_to_csv(const std::vector<SweepPoint>& points);

}  // namespace rsd
