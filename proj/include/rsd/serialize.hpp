#pragma once

/**
 * JSON (de)serialization: tabular world fixtures, weighting specs, decode
 * traces, stats/FLOPs reports, and line-delimited datasets. Trace and result
 * records serialize one-per-line for streaming post-processing; dumps are
 * deterministic (sorted keys, fixed float formatting from the JSON library),
 * which is what makes "same seed, same bytes" testable.
 */

#include <optional>
#include <string>
#include <vector>

#include "rsd/backends.hpp"
#include "rsd/core.hpp"
#include "rsd/metrics.hpp"
#include "rsd/weighting.hpp"

namespace rsd {

struct DatasetRecord {
  std::string id;
  std::string prompt;
  std::optional<std::string> answer;
};

// --- tabular world fixtures -------------------------------------------------
//
// {
//   "token_cost": 1,
//   "reward_scale": "unit_interval" | "unbounded",
//   "symbols": [{"text": "...", "terminal": false}, ...],
//   "contexts": {
//     "<rendered context string>": {
//       "p_m": [...], "p_M": [...], "reward": [...]
//     }
//   }
// }

TabularWorld world_from_json_text(const std::string& text);
TabularWorld load_world(const std::string& path);
std::string world_to_json_text(const TabularWorld& world);

// --- weighting specs ---------------------------------------------------------
//
// {"variant": "binary_step", "delta": 0.7}, {"variant": "constant", "p": 0.5},
// {"variant": "clip"}, {"variant": "sigmoidal"},
// {"variant": "logistic", "alpha": 10, "delta": 0.7},
// {"variant": "likelihood_ratio", "alpha": 1}, {"variant": "hybrid", "beta": 1}

WeightingSpec weighting_from_json_text(const std::string& text);
std::string weighting_to_json_text(const WeightingSpec& spec);

// --- traces / reports --------------------------------------------------------

std::string trace_to_json_line(const DecodeTrace& trace);
DecodeTrace trace_from_json_line(const std::string& line);

std::string stats_to_json_text(const metrics::RunStats& stats);
std::string flops_to_json_text(const metrics::FlopsReport& report);

// --- datasets ----------------------------------------------------------------
//
// One record per line: {"id": "...", "prompt": "...", "answer": "..."?}

std::vector<DatasetRecord> dataset_from_jsonl_text(const std::string& text);
std::vector<DatasetRecord> load_dataset(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace rsd
