#include "rsd/run_config.hpp"

#include <json.hpp>

#include "rsd/serialize.hpp"

namespace rsd {

using nlohmann::json;

namespace {

SamplingParams sampling_from_json(const json& j, SamplingParams defaults) {
  SamplingParams p = defaults;
  if (j.contains("temperature")) p.temperature = j["temperature"].get<double>();
  if (j.contains("top_p")) p.top_p = j["top_p"].get<double>();
  validate_sampling(p);
  return p;
}

http::RetryPolicy retry_from_json(const json& j) {
  http::RetryPolicy r;
  if (j.contains("max_attempts")) r.max_attempts = j["max_attempts"].get<int>();
  if (j.contains("backoff_base_ms")) r.backoff_base_ms = j["backoff_base_ms"].get<int>();
  if (j.contains("timeout_ms")) r.timeout_ms = j["timeout_ms"].get<int>();
  if (r.max_attempts < 1) throw ConfigError("retry max_attempts must be >= 1");
  return r;
}

http::CompletionsConfig completions_from_json(const json& j, const std::string& where) {
  http::CompletionsConfig c;
  if (!j.contains("base_url")) throw ConfigError("missing endpoint: " + where + ".base_url");
  c.base_url = j["base_url"].get<std::string>();
  if (!j.contains("model")) throw ConfigError("missing field: " + where + ".model");
  c.model = j["model"].get<std::string>();
  if (j.contains("step_delimiter")) c.step_delimiter = j["step_delimiter"].get<std::string>();
  if (j.contains("eos_text")) c.eos_text = j["eos_text"].get<std::string>();
  c.retry = retry_from_json(j);
  return c;
}

http::ScoreConfig score_from_json(const json& j, const std::string& where) {
  http::ScoreConfig c;
  if (!j.contains("base_url")) throw ConfigError("missing PRM endpoint: " + where + ".base_url");
  c.base_url = j["base_url"].get<std::string>();
  std::string scale = j.value("scale", std::string{"unit_interval"});
  if (scale == "unit_interval") {
    c.scale = RewardScale::UnitInterval;
  } else if (scale == "unbounded") {
    c.scale = RewardScale::Unbounded;
  } else {
    throw ConfigError("unknown PRM scale: " + scale);
  }
  c.retry = retry_from_json(j);
  return c;
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("malformed JSON in run config");

  try {
  RunConfig cfg;

  if (!doc.contains("backend") || !doc["backend"].is_object()) {
    throw ConfigError("run config needs a 'backend' object");
  }
  const json& backend = doc["backend"];
  std::string kind = backend.value("kind", std::string{});
  if (kind == "tabular") {
    TabularBackendConfig t;
    if (!backend.contains("fixture")) throw ConfigError("tabular backend needs 'fixture' path");
    t.fixture = backend["fixture"].get<std::string>();
    t.draft_id = backend.value("draft_id", t.draft_id);
    t.target_id = backend.value("target_id", t.target_id);
    t.prm_id = backend.value("prm_id", t.prm_id);
    cfg.tabular = std::move(t);
  } else if (kind == "http") {
    HttpBackendConfig h;
    if (backend.contains("draft")) h.draft = completions_from_json(backend["draft"], "backend.draft");
    if (backend.contains("target")) {
      h.target = completions_from_json(backend["target"], "backend.target");
    }
    if (backend.contains("prm")) h.prm = score_from_json(backend["prm"], "backend.prm");
    h.prm_id = backend.value("prm_id", h.prm_id);
    cfg.http = std::move(h);
  } else {
    throw ConfigError("backend.kind must be 'tabular' or 'http'");
  }

  if (doc.contains("weighting")) {
    cfg.rsd.weighting = weighting_from_json_text(doc["weighting"].dump());
  }

  if (doc.contains("rsd")) {
    const json& r = doc["rsd"];
    if (r.contains("max_steps")) cfg.rsd.max_steps = r["max_steps"].get<int>();
    if (r.contains("max_total_tokens")) {
      cfg.rsd.max_total_tokens = r["max_total_tokens"].get<std::int64_t>();
    }
    if (r.contains("max_step_tokens")) {
      cfg.rsd.caps.max_step_tokens = r["max_step_tokens"].get<std::int64_t>();
    }
    if (r.contains("seed")) cfg.rsd.seed = r["seed"].get<std::uint64_t>();
    if (r.contains("sampling_draft")) {
      cfg.rsd.sampling_draft = sampling_from_json(r["sampling_draft"], cfg.rsd.sampling_draft);
    }
    if (r.contains("sampling_target")) {
      cfg.rsd.sampling_target = sampling_from_json(r["sampling_target"], cfg.rsd.sampling_target);
    }
    if (r.contains("score_target_steps")) {
      cfg.rsd.score_target_steps = r["score_target_steps"].get<bool>();
    }
    if (r.contains("step_delimiter")) {
      cfg.rsd.step_delimiter = r["step_delimiter"].get<std::string>();
    }
    if (r.contains("strip_delimiter_before_scoring")) {
      cfg.rsd.strip_delimiter_before_scoring = r["strip_delimiter_before_scoring"].get<bool>();
    }
  }
  validate_config(cfg.rsd);

  if (doc.contains("method")) cfg.method = method_from_string(doc["method"].get<std::string>());
  if (doc.contains("sampling_baselines")) {
    cfg.sampling_baselines = sampling_from_json(doc["sampling_baselines"], cfg.sampling_baselines);
  }
  if (doc.contains("best_of_n")) cfg.best_of_n = doc["best_of_n"].get<int>();
  if (doc.contains("process_best_of_n")) {
    cfg.process_n_per_step = doc["process_best_of_n"].get<int>();
  }
  if (doc.contains("sd_k_spec")) cfg.sd_k_spec = doc["sd_k_spec"].get<int>();
  if (doc.contains("trials_per_prompt")) cfg.trials_per_prompt = doc["trials_per_prompt"].get<int>();
  if (doc.contains("concurrency")) cfg.concurrency = doc["concurrency"].get<int>();
  if (doc.contains("dataset")) cfg.dataset_path = doc["dataset"].get<std::string>();
  if (doc.contains("output")) cfg.output_path = doc["output"].get<std::string>();

  if (doc.contains("profiles")) {
    for (const auto& [id, params] : doc["profiles"].items()) {
      ModelProfile p{id, params.get<std::int64_t>()};
      validate_profile(p);
      cfg.profiles.emplace(id, std::move(p));
    }
  }
  if (doc.contains("prm_tokens_per_call")) {
    cfg.flops.prm_tokens_per_call = doc["prm_tokens_per_call"].get<std::int64_t>();
  }
  if (doc.contains("include_prompt_tokens")) {
    cfg.flops.include_prompt_tokens = doc["include_prompt_tokens"].get<bool>();
  }
  if (doc.contains("deltas")) cfg.sweep_deltas = doc["deltas"].get<std::vector<double>>();

  return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path) {
  try {
    return run_config_from_json_text(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (config file: " + path + ")");
  }
}

BackendSet build_backends(const RunConfig& config) {
  if (config.tabular.has_value() == config.http.has_value()) {
    throw ConfigError("run config must select exactly one backend family");
  }

  BackendSet set;
  if (config.tabular) {
    const TabularBackendConfig& t = *config.tabular;
    set.world = std::make_shared<const TabularWorld>(load_world(t.fixture));
    set.draft = std::make_unique<TabularStepGenerator>(set.world, WhichModel::Draft, t.draft_id);
    set.target = std::make_unique<TabularStepGenerator>(set.world, WhichModel::Target, t.target_id);
    set.prm = std::make_unique<TabularRewardModel>(set.world, t.prm_id);
    return set;
  }

  const HttpBackendConfig& h = *config.http;
  const bool needs_draft = config.method != Method::Single;
  const bool needs_target = config.method == Method::Rsd || config.method == Method::Single ||
                            config.method == Method::Sd;
  const bool needs_prm = config.method == Method::Rsd || config.method == Method::BestOfN ||
                         config.method == Method::ProcessBestOfN;

  if (config.method == Method::Sd) {
    throw ConfigError(
        "method 'sd' needs exact next-step distributions, which HTTP servers do not expose; "
        "use a tabular fixture");
  }
  if (needs_draft && !h.draft) throw ConfigError("missing draft endpoint: backend.draft");
  if (needs_target && !h.target) throw ConfigError("missing target endpoint: backend.target");
  if (needs_prm && !h.prm) throw ConfigError("missing PRM endpoint: backend.prm");

  if (h.draft) set.draft = std::make_unique<http::HttpStepGenerator>(*h.draft);
  if (h.target) set.target = std::make_unique<http::HttpStepGenerator>(*h.target);
  if (h.prm) set.prm = std::make_unique<http::HttpRewardModel>(*h.prm, h.prm_id);
  return set;
}

BatchOptions batch_options(const RunConfig& config) {
  BatchOptions opt;
  opt.method = config.method;
  opt.cfg = config.rsd;
  opt.trials_per_prompt = config.trials_per_prompt;
  opt.concurrency = config.concurrency;
  opt.best_of_n = config.best_of_n;
  opt.process_n_per_step = config.process_n_per_step;
  opt.sd_k_spec = config.sd_k_spec;
  // Sampling baselines draw diverse candidates; the reward-guided loop and
  // the single/speculative baselines keep the config's decode sampling.
  if (config.method == Method::BestOfN || config.method == Method::Majority ||
      config.method == Method::ProcessBestOfN) {
    opt.cfg.sampling_draft = config.sampling_baselines;
    opt.cfg.sampling_target = config.sampling_baselines;
  }
  return opt;
}

}  // namespace rsd
