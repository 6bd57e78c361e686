#include "rsd/serialize.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace rsd {

using nlohmann::json;

namespace {

json parse_or_throw(const std::string& text, const std::string& what) {
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) throw ConfigError("malformed JSON in " + what);
  return parsed;
}

// Missing keys and type mismatches surface as ConfigError, not library
// exceptions.
template <class Fn>
auto converting_json_errors(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

RewardScale scale_from_string(const std::string& s) {
  if (s == "unit_interval") return RewardScale::UnitInterval;
  if (s == "unbounded") return RewardScale::Unbounded;
  throw ConfigError("unknown reward_scale: " + s);
}

const char* scale_to_string(RewardScale s) {
  return s == RewardScale::UnitInterval ? "unit_interval" : "unbounded";
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
  if (!out) throw ConfigError("failed writing file: " + path);
}

TabularWorld world_from_json_text(const std::string& text) {
  json doc = parse_or_throw(text, "tabular world");
  return converting_json_errors("tabular world", [&]() -> TabularWorld {
    if (!doc.contains("symbols") || !doc["symbols"].is_array()) {
      throw ConfigError("tabular world needs a 'symbols' array");
    }

    std::vector<TabularSymbol> symbols;
    for (const json& s : doc["symbols"]) {
      TabularSymbol sym;
      sym.text = s.at("text").get<std::string>();
      sym.terminal = s.value("terminal", false);
      symbols.push_back(std::move(sym));
    }

    TabularWorld world(std::move(symbols), doc.value("token_cost", std::int64_t{1}),
                       scale_from_string(doc.value("reward_scale", std::string{"unit_interval"})));

    if (!doc.contains("contexts") || !doc["contexts"].is_object()) {
      throw ConfigError("tabular world needs a 'contexts' object");
    }
    for (const auto& [key, entry] : doc["contexts"].items()) {
      ContextTable table;
      table.p_draft = entry.at("p_m").get<std::vector<double>>();
      table.p_target = entry.at("p_M").get<std::vector<double>>();
      table.reward = entry.at("reward").get<std::vector<double>>();
      world.add_context(key, std::move(table));
    }
    return world;
  });
}

TabularWorld load_world(const std::string& path) {
  try {
    return world_from_json_text(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (world file: " + path + ")");
  }
}

std::string world_to_json_text(const TabularWorld& world) {
  json doc;
  doc["token_cost"] = world.token_cost();
  doc["reward_scale"] = scale_to_string(world.reward_scale());
  doc["symbols"] = json::array();
  for (const TabularSymbol& s : world.symbols()) {
    doc["symbols"].push_back({{"text", s.text}, {"terminal", s.terminal}});
  }
  doc["contexts"] = json::object();
  for (const std::string& key : world.context_keys()) {
    const ContextTable& t = world.context(key);
    doc["contexts"][key] = {
        {"p_m", t.p_draft}, {"p_M", t.p_target}, {"reward", t.reward}};
  }
  return doc.dump(2);
}

WeightingSpec weighting_from_json_text(const std::string& text) {
  json doc = parse_or_throw(text, "weighting spec");
  return converting_json_errors("weighting spec", [&]() -> WeightingSpec {
  std::string variant = doc.at("variant").get<std::string>();
  WeightingSpec spec;
  if (variant == "constant") {
    spec = ConstantWeight{doc.at("p").get<double>()};
  } else if (variant == "binary_step") {
    spec = BinaryStepWeight{doc.at("delta").get<double>()};
  } else if (variant == "clip") {
    spec = ClipWeight{};
  } else if (variant == "sigmoidal") {
    spec = SigmoidalWeight{};
  } else if (variant == "logistic") {
    spec = LogisticWeight{doc.at("alpha").get<double>(), doc.at("delta").get<double>()};
  } else if (variant == "likelihood_ratio") {
    spec = LikelihoodRatioWeight{doc.at("alpha").get<double>()};
  } else if (variant == "hybrid") {
    spec = HybridWeight{doc.at("beta").get<double>()};
  } else {
    throw ConfigError("unknown weighting variant: " + variant);
  }
  validate_spec(spec);
  return spec;
  });
}

std::string weighting_to_json_text(const WeightingSpec& spec) {
  json doc;
  doc["variant"] = variant_name(spec);
  if (const auto* c = std::get_if<ConstantWeight>(&spec)) {
    doc["p"] = c->p;
  } else if (const auto* b = std::get_if<BinaryStepWeight>(&spec)) {
    doc["delta"] = b->delta;
  } else if (const auto* l = std::get_if<LogisticWeight>(&spec)) {
    doc["alpha"] = l->alpha;
    doc["delta"] = l->delta;
  } else if (const auto* l = std::get_if<LikelihoodRatioWeight>(&spec)) {
    doc["alpha"] = l->alpha;
  } else if (const auto* h = std::get_if<HybridWeight>(&spec)) {
    doc["beta"] = h->beta;
  }
  return doc.dump();
}

namespace {

json record_to_json(const StepRecord& r) {
  json out;
  out["text"] = r.step.text;
  out["terminal"] = r.step.terminal;
  out["reward"] = r.reward;
  out["weight"] = r.weight;
  out["origin"] = to_string(r.origin);
  if (r.draft_candidate) out["draft_candidate"] = r.draft_candidate->text;
  if (r.target_reward) out["target_reward"] = *r.target_reward;
  out["draft_tokens"] = r.draft_tokens;
  out["target_tokens"] = r.target_tokens;
  out["prm_calls"] = r.prm_calls;
  if (r.draft_prompt_tokens) out["draft_prompt_tokens"] = *r.draft_prompt_tokens;
  if (r.target_prompt_tokens) out["target_prompt_tokens"] = *r.target_prompt_tokens;
  return out;
}

StepRecord record_from_json(const json& j) {
  StepRecord r;
  r.step.text = j.at("text").get<std::string>();
  r.step.terminal = j.value("terminal", false);
  r.reward = j.value("reward", 0.0);
  r.weight = j.value("weight", 1.0);
  r.origin = j.value("origin", std::string{"draft"}) == "target" ? StepOrigin::Target
                                                                 : StepOrigin::Draft;
  if (j.contains("draft_candidate")) {
    r.draft_candidate = Step{j["draft_candidate"].get<std::string>(), false};
  }
  if (j.contains("target_reward")) r.target_reward = j["target_reward"].get<double>();
  r.draft_tokens = j.value("draft_tokens", std::int64_t{0});
  r.target_tokens = j.value("target_tokens", std::int64_t{0});
  r.prm_calls = j.value("prm_calls", std::int64_t{0});
  if (j.contains("draft_prompt_tokens")) {
    r.draft_prompt_tokens = j["draft_prompt_tokens"].get<std::int64_t>();
  }
  if (j.contains("target_prompt_tokens")) {
    r.target_prompt_tokens = j["target_prompt_tokens"].get<std::int64_t>();
  }
  return r;
}

}  // namespace

std::string trace_to_json_line(const DecodeTrace& trace) {
  json out;
  out["records"] = json::array();
  for (const StepRecord& r : trace.records) out["records"].push_back(record_to_json(r));
  out["stopped_by"] = to_string(trace.stopped_by);
  out["final_text"] = trace.final_text;
  out["draft_model"] = trace.draft_model;
  out["target_model"] = trace.target_model;
  out["prm_model"] = trace.prm_model;
  out["seed"] = trace.seed;
  if (trace.error) out["error"] = *trace.error;
  return out.dump();
}

DecodeTrace trace_from_json_line(const std::string& line) {
  json doc = parse_or_throw(line, "decode trace");
  return converting_json_errors("decode trace", [&]() -> DecodeTrace {
  DecodeTrace t;
  for (const json& r : doc.value("records", json::array())) {
    t.records.push_back(record_from_json(r));
  }
  t.stopped_by = doc.value("stopped_by", std::string{"max_length"}) == "eos"
                     ? StoppedBy::Eos
                     : StoppedBy::MaxLength;
  t.final_text = doc.value("final_text", std::string{});
  t.draft_model = doc.value("draft_model", std::string{});
  t.target_model = doc.value("target_model", std::string{});
  t.prm_model = doc.value("prm_model", std::string{});
  t.seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("error")) t.error = doc["error"].get<std::string>();
  return t;
  });
}

std::string stats_to_json_text(const metrics::RunStats& stats) {
  json out;
  out["step_accept_rate"] = stats.step_accept_rate;
  out["draft_only_solve_rate"] = stats.draft_only_solve_rate;
  out["mean_steps"] = stats.mean_steps;
  out["mean_reward"] = stats.mean_reward;
  out["n_traces"] = stats.n_traces;
  out["n_records"] = stats.n_records;
  out["n_rewarded_records"] = stats.n_rewarded_records;
  out["n_errors"] = stats.n_errors;
  return out.dump();
}

std::string flops_to_json_text(const metrics::FlopsReport& report) {
  json out;
  out["total_flops"] = report.total_flops;
  out["includes_prompt_tokens"] = report.includes_prompt_tokens;
  out["per_model"] = json::object();
  for (const auto& [model, entry] : report.per_model) {
    out["per_model"][model] = {
        {"tokens", entry.tokens}, {"params", entry.params}, {"flops", entry.flops}};
  }
  return out.dump();
}

std::vector<DatasetRecord> dataset_from_jsonl_text(const std::string& text) {
  std::vector<DatasetRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || is_blank(line)) continue;
    std::string what = "dataset line " + std::to_string(line_no);
    json doc = parse_or_throw(line, what);
    records.push_back(converting_json_errors(what.c_str(), [&]() -> DatasetRecord {
      DatasetRecord rec;
      rec.id = doc.at("id").is_string() ? doc["id"].get<std::string>() : doc["id"].dump();
      rec.prompt = doc.at("prompt").get<std::string>();
      if (doc.contains("answer")) {
        rec.answer = doc["answer"].is_string() ? doc["answer"].get<std::string>()
                                               : doc["answer"].dump();
      }
      return rec;
    }));
  }
  if (records.empty()) throw ConfigError("dataset is empty");
  return records;
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  try {
    return dataset_from_jsonl_text(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()) + " (dataset file: " + path + ")");
  }
}

}  // namespace rsd
