#pragma once

/**
 * Run configuration: one JSON file selecting a backend family (tabular
 * fixture or HTTP endpoints), the weighting, decode parameters, dataset and
 * output paths. Command-line flags override file values, so a config file is
 * a complete, reproducible experiment record.
 */

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rsd/backends.hpp"
#include "rsd/harness.hpp"
#include "rsd/http_backends.hpp"
#include "rsd/metrics.hpp"

namespace rsd {

struct TabularBackendConfig {
  std::string fixture;  // world file path
  std::string draft_id = "draft";
  std::string target_id = "target";
  std::string prm_id = "prm";
};

struct HttpBackendConfig {
  std::optional<http::CompletionsConfig> draft;
  std::optional<http::CompletionsConfig> target;
  std::optional<http::ScoreConfig> prm;
  std::string prm_id = "prm";
};

struct RunConfig {
  // Exactly one backend family.
  std::optional<TabularBackendConfig> tabular;
  std::optional<HttpBackendConfig> http;

  Method method = Method::Rsd;
  RsdConfig rsd;
  // Sampling for the high-diversity baselines (majority, best-of-n variants).
  SamplingParams sampling_baselines{0.7, 0.8};
  int best_of_n = 16;
  int process_n_per_step = 8;
  int sd_k_spec = 7;
  int trials_per_prompt = 1;
  int concurrency = 1;

  std::string dataset_path;
  std::string output_path;

  std::map<std::string, ModelProfile> profiles;
  metrics::FlopsOptions flops;
  std::vector<double> sweep_deltas;
};

RunConfig run_config_from_json_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Backend instances built per the config; owns the world for tabular runs.
struct BackendSet {
  std::shared_ptr<const TabularWorld> world;
  std::unique_ptr<StepGenerator> draft;
  std::unique_ptr<StepGenerator> target;
  std::unique_ptr<RewardModel> prm;

  Backends handles() const {
    return Backends{draft.get(), target.get(), prm.get()};
  }
};

// Validates that the selected method's backends are present (diagnostics name
// the missing endpoint) and constructs them.
BackendSet build_backends(const RunConfig& config);

// Batch options implied by the config: baselines that sample for diversity
// get the baseline sampling parameters.
BatchOptions batch_options(const RunConfig& config);

}  // namespace rsd
