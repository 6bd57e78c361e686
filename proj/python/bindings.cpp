// Python bindings for the decoding engine: weighting functions, tabular
// worlds, the exact oracles, the decode strategies, and FLOPs/stats
// aggregation. Thin wrappers over the C++ API; tabular worlds come in as
// JSON text or file paths.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rsd/engine.hpp"
#include "rsd/harness.hpp"
#include "rsd/metrics.hpp"
#include "rsd/oracle.hpp"
#include "rsd/serialize.hpp"
#include "rsd/verify.hpp"

namespace py = pybind11;
using namespace rsd;

namespace {

WeightingSpec spec_from_json(const std::string& text) { return weighting_from_json_text(text); }

std::map<std::string, ModelProfile> profiles_from_map(
    const std::map<std::string, std::int64_t>& params) {
  std::map<std::string, ModelProfile> out;
  for (const auto& [id, count] : params) out.emplace(id, ModelProfile{id, count});
  return out;
}

struct PyWorld {
  std::shared_ptr<const TabularWorld> world;
  TabularStepGenerator draft;
  TabularStepGenerator target;
  TabularRewardModel prm;

  explicit PyWorld(std::shared_ptr<const TabularWorld> w)
      : world(std::move(w)),
        draft(world, WhichModel::Draft, "draft"),
        target(world, WhichModel::Target, "target"),
        prm(world, "prm") {}
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "reward-guided speculative decoding engine";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TransportError>(m, "TransportError", PyExc_RuntimeError);

  // --- weighting -------------------------------------------------------------
  // Each variant is its own class; functions taking a WeightingSpec accept
  // any of them through the std::variant caster.
  py::class_<ConstantWeight>(m, "ConstantWeight")
      .def(py::init<double>(), py::arg("p"))
      .def_readonly("p", &ConstantWeight::p);
  py::class_<BinaryStepWeight>(m, "BinaryStepWeight")
      .def(py::init<double>(), py::arg("delta"))
      .def_readonly("delta", &BinaryStepWeight::delta);
  py::class_<ClipWeight>(m, "ClipWeight").def(py::init<>());
  py::class_<SigmoidalWeight>(m, "SigmoidalWeight").def(py::init<>());
  py::class_<LogisticWeight>(m, "LogisticWeight")
      .def(py::init<double, double>(), py::arg("alpha"), py::arg("delta"))
      .def_readonly("alpha", &LogisticWeight::alpha)
      .def_readonly("delta", &LogisticWeight::delta);
  py::class_<LikelihoodRatioWeight>(m, "LikelihoodRatioWeight")
      .def(py::init<double>(), py::arg("alpha"))
      .def_readonly("alpha", &LikelihoodRatioWeight::alpha);
  py::class_<HybridWeight>(m, "HybridWeight")
      .def(py::init<double>(), py::arg("beta"))
      .def_readonly("beta", &HybridWeight::beta);

  m.def("weighting_from_json", &spec_from_json, py::arg("json_text"));
  m.def("weighting_to_json", &weighting_to_json_text, py::arg("spec"));
  m.def("variant_name", &variant_name, py::arg("spec"));
  m.def("needs_likelihood_ratio", &needs_likelihood_ratio, py::arg("spec"));
  m.def("monotone_in_reward", &monotone_in_reward, py::arg("spec"));

  m.def(
      "evaluate_weight",
      [](const WeightingSpec& spec, double reward, std::optional<double> likelihood_ratio) {
        return evaluate_weight(spec, WeightInput{reward, likelihood_ratio});
      },
      py::arg("spec"), py::arg("reward"), py::arg("likelihood_ratio") = std::optional<double>());

  m.def(
      "accept",
      [](const WeightingSpec& spec, double reward, std::optional<double> likelihood_ratio,
         std::uint64_t seed) {
        StreamRng rng(seed);
        return accept(spec, WeightInput{reward, likelihood_ratio}, rng);
      },
      py::arg("spec"), py::arg("reward"), py::arg("likelihood_ratio") = std::optional<double>(),
      py::arg("seed") = 0,
      "Acceptance criterion: deterministic when the weight is 0 or 1, otherwise a "
      "Bernoulli draw from the seeded stream.");

  // --- core types ------------------------------------------------------------
  py::class_<Step>(m, "Step")
      .def(py::init([](std::string text, bool terminal) {
             return Step{std::move(text), terminal};
           }),
           py::arg("text"), py::arg("terminal") = false)
      .def_readonly("text", &Step::text)
      .def_readonly("terminal", &Step::terminal);

  py::class_<StepRecord>(m, "StepRecord")
      .def_property_readonly("text", [](const StepRecord& r) { return r.step.text; })
      .def_property_readonly("terminal", [](const StepRecord& r) { return r.step.terminal; })
      .def_readonly("reward", &StepRecord::reward)
      .def_readonly("weight", &StepRecord::weight)
      .def_property_readonly(
          "origin", [](const StepRecord& r) { return std::string(to_string(r.origin)); })
      .def_property_readonly("draft_candidate",
                             [](const StepRecord& r) -> std::optional<std::string> {
                               if (!r.draft_candidate) return std::nullopt;
                               return r.draft_candidate->text;
                             })
      .def_readonly("target_reward", &StepRecord::target_reward)
      .def_readonly("draft_tokens", &StepRecord::draft_tokens)
      .def_readonly("target_tokens", &StepRecord::target_tokens)
      .def_readonly("prm_calls", &StepRecord::prm_calls);

  py::class_<DecodeTrace>(m, "DecodeTrace")
      .def_readonly("records", &DecodeTrace::records)
      .def_property_readonly(
          "stopped_by", [](const DecodeTrace& t) { return std::string(to_string(t.stopped_by)); })
      .def_readonly("final_text", &DecodeTrace::final_text)
      .def_readonly("seed", &DecodeTrace::seed)
      .def_readonly("error", &DecodeTrace::error)
      .def_property_readonly("draft_tokens", &total_draft_tokens)
      .def_property_readonly("target_tokens", &total_target_tokens)
      .def_property_readonly("prm_calls", &total_prm_calls)
      .def_property_readonly("has_target_record", &has_target_record)
      .def("to_json", &trace_to_json_line);

  // --- decode configuration ----------------------------------------------------
  py::class_<RsdConfig>(m, "RsdConfig")
      .def(py::init([](WeightingSpec weighting, int max_steps, std::int64_t max_total_tokens,
                       double draft_temperature, double draft_top_p, double target_temperature,
                       double target_top_p, std::uint64_t seed, bool score_target_steps) {
             RsdConfig cfg;
             cfg.weighting = std::move(weighting);
             cfg.max_steps = max_steps;
             cfg.max_total_tokens = max_total_tokens;
             cfg.sampling_draft = SamplingParams{draft_temperature, draft_top_p};
             cfg.sampling_target = SamplingParams{target_temperature, target_top_p};
             cfg.seed = seed;
             cfg.score_target_steps = score_target_steps;
             validate_config(cfg);
             return cfg;
           }),
           py::arg("weighting") = BinaryStepWeight{0.7},
           py::arg("max_steps") = 64, py::arg("max_total_tokens") = std::int64_t{1} << 20,
           py::arg("draft_temperature") = 0.0, py::arg("draft_top_p") = 1.0,
           py::arg("target_temperature") = 0.0, py::arg("target_top_p") = 1.0,
           py::arg("seed") = 0, py::arg("score_target_steps") = false)
      .def_readwrite("weighting", &RsdConfig::weighting)
      .def_readwrite("max_steps", &RsdConfig::max_steps)
      .def_readwrite("seed", &RsdConfig::seed);

  // --- tabular worlds -----------------------------------------------------------
  py::class_<PyWorld>(m, "TabularWorld")
      .def_static(
          "from_json",
          [](const std::string& text) {
            return PyWorld(std::make_shared<const TabularWorld>(world_from_json_text(text)));
          },
          py::arg("json_text"))
      .def_static(
          "load",
          [](const std::string& path) {
            return PyWorld(std::make_shared<const TabularWorld>(load_world(path)));
          },
          py::arg("path"))
      .def("to_json", [](const PyWorld& w) { return world_to_json_text(*w.world); })
      .def_property_readonly("symbols",
                             [](const PyWorld& w) {
                               std::vector<std::string> out;
                               for (const auto& s : w.world->symbols()) out.push_back(s.text);
                               return out;
                             })
      .def_property_readonly(
          "context_keys", [](const PyWorld& w) { return w.world->context_keys(); })
      .def("draft_distribution",
           [](const PyWorld& w, const std::string& key) {
             return step_distribution(*w.world, WhichModel::Draft, key);
           })
      .def("target_distribution",
           [](const PyWorld& w, const std::string& key) {
             return step_distribution(*w.world, WhichModel::Target, key);
           })
      .def("rewards",
           [](const PyWorld& w, const std::string& key) { return w.world->context(key).reward; });

  // --- exact oracles --------------------------------------------------------------
  py::class_<oracle::MixtureResult>(m, "MixtureResult")
      .def_readonly("distribution", &oracle::MixtureResult::distribution)
      .def_readonly("weights", &oracle::MixtureResult::weights)
      .def_readonly("nu", &oracle::MixtureResult::nu)
      .def_readonly("expected_reward", &oracle::MixtureResult::expected_reward);

  py::class_<oracle::ThresholdResult>(m, "ThresholdResult")
      .def_readonly("delta_gamma", &oracle::ThresholdResult::delta_gamma)
      .def_readonly("realized_nu", &oracle::ThresholdResult::realized_nu)
      .def_readonly("achieved_reward", &oracle::ThresholdResult::achieved_reward);

  py::class_<oracle::DominanceReport>(m, "DominanceReport")
      .def_readonly("e_rsd", &oracle::DominanceReport::e_rsd)
      .def_readonly("e_draft", &oracle::DominanceReport::e_draft)
      .def_readonly("e_target", &oracle::DominanceReport::e_target)
      .def_readonly("holds", &oracle::DominanceReport::holds)
      .def_readonly("premise_expectation", &oracle::DominanceReport::premise_expectation)
      .def_readonly("premise_monotone", &oracle::DominanceReport::premise_monotone);

  py::class_<oracle::BruteForceResult>(m, "BruteForceResult")
      .def_readonly("weights", &oracle::BruteForceResult::weights)
      .def_readonly("reward", &oracle::BruteForceResult::reward)
      .def_readonly("nu", &oracle::BruteForceResult::nu);

  m.def(
      "exact_rsd_distribution",
      [](const PyWorld& w, const std::string& key, const WeightingSpec& spec) {
        return oracle::exact_rsd_distribution(*w.world, key, spec);
      },
      py::arg("world"), py::arg("context_key"), py::arg("weighting"));
  m.def("expected_reward", &oracle::expected_reward, py::arg("distribution"),
        py::arg("rewards"));
  m.def(
      "check_reward_dominance",
      [](const PyWorld& w, const std::string& key, const WeightingSpec& spec) {
        return oracle::check_reward_dominance(*w.world, key, spec);
      },
      py::arg("world"), py::arg("context_key"), py::arg("weighting"));
  m.def(
      "optimal_threshold",
      [](const PyWorld& w, const std::string& key, double gamma) {
        return oracle::optimal_threshold(*w.world, key, gamma);
      },
      py::arg("world"), py::arg("context_key"), py::arg("gamma"));
  m.def(
      "brute_force_optimal_weighting",
      [](const PyWorld& w, const std::string& key, double gamma, int grid) {
        return oracle::brute_force_optimal_weighting(*w.world, key, gamma, grid);
      },
      py::arg("world"), py::arg("context_key"), py::arg("gamma"), py::arg("grid") = 4);
  m.def("tv_distance", &oracle::tv_distance, py::arg("a"), py::arg("b"));

  // --- decoding --------------------------------------------------------------------
  m.def(
      "decode_rsd",
      [](PyWorld& w, const std::string& prompt, const RsdConfig& cfg) {
        return decode_rsd(Prompt{prompt}, w.draft, w.target, w.prm, cfg);
      },
      py::arg("world"), py::arg("prompt"), py::arg("config"),
      "Reward-guided decode over a tabular world (draft proposes, the reward "
      "model scores, rejected steps are regenerated by the target).");
  m.def(
      "decode_single",
      [](PyWorld& w, const std::string& prompt, const RsdConfig& cfg, const std::string& role) {
        if (role == "draft") return decode_single(Prompt{prompt}, w.draft, cfg, SingleRole::Draft);
        if (role == "target") {
          return decode_single(Prompt{prompt}, w.target, cfg, SingleRole::Target);
        }
        throw ConfigError("role must be 'draft' or 'target'");
      },
      py::arg("world"), py::arg("prompt"), py::arg("config"), py::arg("role") = "target");
  m.def(
      "decode_sd",
      [](PyWorld& w, const std::string& prompt, const RsdConfig& cfg, int k_spec) {
        return decode_sd(Prompt{prompt}, w.draft, w.target, k_spec, cfg);
      },
      py::arg("world"), py::arg("prompt"), py::arg("config"), py::arg("k_spec") = 7);
  m.def(
      "decode_best_of_n",
      [](PyWorld& w, const std::string& prompt, int n, const RsdConfig& cfg) {
        BestOfNResult r = decode_best_of_n(Prompt{prompt}, w.draft, w.prm, n, cfg);
        return py::make_tuple(r.chosen_index, r.candidates, r.final_rewards);
      },
      py::arg("world"), py::arg("prompt"), py::arg("n"), py::arg("config"));
  m.def(
      "decode_process_best_of_n",
      [](PyWorld& w, const std::string& prompt, int n_per_step, const RsdConfig& cfg) {
        return decode_process_best_of_n(Prompt{prompt}, w.draft, w.prm, n_per_step, cfg);
      },
      py::arg("world"), py::arg("prompt"), py::arg("n_per_step"), py::arg("config"));
  m.def(
      "decode_majority_voting",
      [](PyWorld& w, const std::string& prompt, int n, const RsdConfig& cfg,
         std::optional<AnswerExtractor> extractor) {
        MajorityVoteResult r = decode_majority_voting(
            Prompt{prompt}, w.draft, n, extractor ? *extractor : extract_boxed_answer, cfg);
        return py::make_tuple(r.answer, r.votes, r.samples, r.abstentions);
      },
      py::arg("world"), py::arg("prompt"), py::arg("n"), py::arg("config"),
      py::arg("extractor") = std::optional<AnswerExtractor>(),
      "Returns (answer, votes, samples, abstentions); the extractor defaults "
      "to boxed-answer matching.");
  m.def("extract_boxed_answer", &extract_boxed_answer, py::arg("text"));
  m.def(
      "render_context",
      [](const std::string& prompt, const std::vector<std::string>& steps) {
        Context ctx{Prompt{prompt}, {}};
        for (const std::string& s : steps) ctx.steps.push_back(Step{s, false});
        return render_context(ctx);
      },
      py::arg("prompt"), py::arg("steps") = std::vector<std::string>());

  // --- metrics -----------------------------------------------------------------------
  py::class_<metrics::RunStats>(m, "RunStats")
      .def_readonly("step_accept_rate", &metrics::RunStats::step_accept_rate)
      .def_readonly("draft_only_solve_rate", &metrics::RunStats::draft_only_solve_rate)
      .def_readonly("mean_steps", &metrics::RunStats::mean_steps)
      .def_readonly("mean_reward", &metrics::RunStats::mean_reward)
      .def_readonly("n_traces", &metrics::RunStats::n_traces)
      .def_readonly("n_records", &metrics::RunStats::n_records);

  m.def("summarize", &metrics::summarize, py::arg("traces"));
  m.def(
      "delta_sweep",
      [](PyWorld& w, const std::vector<std::string>& prompts, const std::vector<double>& deltas,
         const RsdConfig& cfg, int trials_per_prompt,
         const std::map<std::string, std::int64_t>& profiles) {
        std::vector<DatasetRecord> dataset;
        for (std::size_t i = 0; i < prompts.size(); ++i) {
          dataset.push_back(DatasetRecord{"p" + std::to_string(i), prompts[i], std::nullopt});
        }
        BatchOptions options;
        options.cfg = cfg;
        options.trials_per_prompt = trials_per_prompt;
        Backends handles{&w.draft, &w.target, &w.prm};
        std::vector<SweepPoint> points = delta_sweep(dataset, handles, options, deltas,
                                                     profiles_from_map(profiles), {});
        py::list out;
        for (const SweepPoint& p : points) {
          out.append(py::dict(
              py::arg("delta") = p.delta, py::arg("stats") = p.stats,
              py::arg("total_flops") = p.flops.total_flops,
              py::arg("accuracy") = p.accuracy,
              py::arg("target_invocation_rate") = p.target_invocation_rate));
        }
        return out;
      },
      py::arg("world"), py::arg("prompts"), py::arg("deltas"), py::arg("config"),
      py::arg("trials_per_prompt"), py::arg("profiles"),
      "Runs the guided decode once per threshold with a shared root seed; "
      "config.weighting must be a binary step.");
  m.def(
      "flops_of",
      [](const std::vector<DecodeTrace>& traces,
         const std::map<std::string, std::int64_t>& profiles, std::int64_t prm_tokens_per_call,
         bool include_prompt_tokens) {
        metrics::FlopsReport report =
            metrics::flops_of(traces, profiles_from_map(profiles),
                              metrics::FlopsOptions{prm_tokens_per_call, include_prompt_tokens});
        py::dict per_model;
        for (const auto& [id, entry] : report.per_model) {
          per_model[py::str(id)] =
              py::dict(py::arg("tokens") = entry.tokens, py::arg("params") = entry.params,
                       py::arg("flops") = entry.flops);
        }
        return py::make_tuple(report.total_flops, per_model);
      },
      py::arg("traces"), py::arg("profiles"), py::arg("prm_tokens_per_call") = 1,
      py::arg("include_prompt_tokens") = false,
      "Returns (total_flops, per_model) under the 2N-per-token approximation; "
      "profiles map model id -> parameter count.");

  // --- verification campaigns ----------------------------------------------------------
  py::class_<verify::CampaignResult>(m, "CampaignResult")
      .def_readonly("name", &verify::CampaignResult::name)
      .def_readonly("passed", &verify::CampaignResult::passed)
      .def_readonly("instances_checked", &verify::CampaignResult::instances_checked)
      .def_readonly("checks", &verify::CampaignResult::checks)
      .def_readonly("failures", &verify::CampaignResult::failures)
      .def_readonly("worst", &verify::CampaignResult::worst)
      .def_readonly("note", &verify::CampaignResult::note);

  m.def("verify_prop1", &verify::run_prop1, py::arg("instances") = 500, py::arg("seed") = 1,
        py::arg("mc_trials") = 100'000);
  m.def("verify_prop2", &verify::run_prop2, py::arg("instances") = 1000, py::arg("seed") = 1);
  m.def("verify_prop3", &verify::run_prop3, py::arg("instances") = 200, py::arg("seed") = 1,
        py::arg("grid") = 4);
  m.def("verify_sd_unbiased", &verify::run_sd_unbiased, py::arg("instances") = 50,
        py::arg("seed") = 1, py::arg("mc_trials") = 100'000);
}
