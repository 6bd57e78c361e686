"""Smoke tests for the python bindings."""

import json
import math
import os

import pytest

import rsd

ROOT = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

WORKED_INSTANCE = {
    "token_cost": 1,
    "reward_scale": "unit_interval",
    "symbols": [
        {"text": "a", "terminal": True},
        {"text": "b", "terminal": True},
    ],
    "contexts": {
        "Q": {"p_m": [0.6, 0.4], "p_M": [0.1, 0.9], "reward": [0.9, 0.3]}
    },
}


def worked_world():
    return rsd.TabularWorld.from_json(json.dumps(WORKED_INSTANCE))


def test_weighting_definitions():
    assert rsd.evaluate_weight(rsd.WeightingSpec.binary_step(0.7), 0.8) == 1.0
    assert rsd.evaluate_weight(rsd.WeightingSpec.binary_step(0.7), 0.69) == 0.0
    assert rsd.evaluate_weight(rsd.WeightingSpec.sigmoidal(), 1.0) == pytest.approx(0.5)
    assert rsd.evaluate_weight(rsd.WeightingSpec.clip(), 1.3) == 1.0
    assert rsd.evaluate_weight(
        rsd.WeightingSpec.likelihood_ratio(1.0), 0.9, likelihood_ratio=0.25
    ) == 0.25
    with pytest.raises(ValueError):
        rsd.evaluate_weight(rsd.WeightingSpec.clip(), float("nan"))


def test_acceptance_criterion_deterministic_branch():
    spec = rsd.WeightingSpec.binary_step(0.7)
    assert rsd.accept(spec, 0.9) is True
    assert rsd.accept(spec, 0.69) is False


def test_exact_mixture_matches_hand_computation():
    world = worked_world()
    mix = rsd.exact_rsd_distribution(world, "Q", rsd.WeightingSpec.binary_step(0.7))
    assert mix.nu == pytest.approx(0.4, abs=1e-12)
    assert mix.distribution == pytest.approx([0.64, 0.36], abs=1e-12)
    assert mix.expected_reward == pytest.approx(0.684, abs=1e-12)


def test_decode_reduction_and_trace_fields():
    world = worked_world()
    cfg = rsd.RsdConfig(
        weighting=rsd.WeightingSpec.binary_step(0.0),
        max_steps=2,
        draft_temperature=1.0,
        seed=7,
    )
    trace = rsd.decode_rsd(world, "Q", cfg)
    assert len(trace.records) == 1
    assert trace.records[0].origin == "draft"
    assert trace.target_tokens == 0
    assert trace.stopped_by == "eos"
    assert trace.final_text in ("a", "b")
    assert json.loads(trace.to_json())["final_text"] == trace.final_text


def test_optimal_threshold_and_brute_force_agree_on_snapped_budget():
    world = rsd.TabularWorld.from_json(json.dumps({
        "token_cost": 1,
        "symbols": [{"text": s, "terminal": True} for s in ("x", "y", "z")],
        "contexts": {
            "Q": {"p_m": [0.5, 0.3, 0.2],
                   "p_M": [1.0 / 3, 1.0 / 3, 1.0 / 3],
                   "reward": [0.9, 0.5, 0.1]}
        },
    }))
    thr = rsd.optimal_threshold(world, "Q", 0.5)
    assert thr.delta_gamma == 0.9
    assert thr.realized_nu == pytest.approx(0.5, abs=1e-12)
    brute = rsd.brute_force_optimal_weighting(world, "Q", 0.5, grid=4)
    assert brute.reward >= thr.achieved_reward - 1e-9


def test_flops_golden_total():
    trace = rsd.decode_rsd(
        worked_world(), "Q",
        rsd.RsdConfig(weighting=rsd.WeightingSpec.binary_step(0.0),
                      max_steps=2, draft_temperature=1.0, seed=1),
    )
    total, per_model = rsd.flops_of([trace], {"draft": 10, "target": 10, "prm": 10})
    # one draft token and one scoring call at 10 params each: 2*10*1 + 2*10*1
    assert total == 40.0
    assert per_model["draft"]["tokens"] == 1

    with pytest.raises(ValueError):
        rsd.flops_of([trace], {"draft": 10})  # missing profiles


def test_desk_fixture_loads_and_decodes():
    world = rsd.TabularWorld.load(os.path.join(ROOT, "data", "worlds", "desk_reasoning.json"))
    prompt = "Problem 0 (easy): evaluate the sequence term.\n"
    cfg = rsd.RsdConfig(
        weighting=rsd.WeightingSpec.binary_step(0.7),
        max_steps=8,
        draft_temperature=1.0,
        target_temperature=1.0,
        seed=123,
        score_target_steps=True,
    )
    trace = rsd.decode_rsd(world, prompt, cfg)
    assert trace.stopped_by == "eos"
    answer = rsd.extract_boxed_answer(trace.final_text)
    assert answer is not None
    stats = rsd.summarize([trace])
    assert 0.0 <= stats.step_accept_rate <= 1.0


def test_speculative_baseline_is_unbiased_on_a_point_mass_draft():
    world = rsd.TabularWorld.from_json(json.dumps({
        "token_cost": 1,
        "symbols": [{"text": "u", "terminal": True}, {"text": "v", "terminal": True}],
        "contexts": {"Q": {"p_m": [1.0, 0.0], "p_M": [0.5, 0.5],
                            "reward": [0.5, 0.5]}},
    }))
    counts = {"u": 0, "v": 0}
    n = 4000
    for i in range(n):
        cfg = rsd.RsdConfig(max_steps=2, seed=i)
        trace = rsd.decode_sd(world, "Q", cfg, k_spec=7)
        counts[trace.records[0].text] += 1
    assert counts["v"] / n == pytest.approx(0.5, abs=0.05)


def test_render_context_concatenates():
    assert rsd.render_context("P", ["a\n\n", "b\n\n"]) == "Pa\n\nb\n\n"
    assert rsd.render_context("P") == "P"


def test_delta_sweep_tracks_the_oracle_rejection_mass():
    world = worked_world()
    cfg = rsd.RsdConfig(
        weighting=rsd.WeightingSpec.binary_step(0.7),
        max_steps=2,
        draft_temperature=1.0,
        target_temperature=1.0,
        seed=5,
    )
    points = rsd.delta_sweep(world, ["Q"], [0.0, 0.7, 1.01], cfg, 20000,
                             {"draft": 1, "target": 1, "prm": 1})
    assert [p["delta"] for p in points] == [0.0, 0.7, 1.01]
    assert points[0]["target_invocation_rate"] == 0.0
    assert points[1]["target_invocation_rate"] == pytest.approx(0.4, abs=0.02)
    assert points[2]["target_invocation_rate"] == 1.0


def test_majority_voting_binding():
    world = worked_world()
    cfg = rsd.RsdConfig(max_steps=2, draft_temperature=1.0, seed=3)
    answer, votes, samples, abstentions = rsd.decode_majority_voting(
        world, "Q", 5, cfg, lambda text: text)
    assert answer in ("a", "b")
    assert sum(count for _, count in votes) + abstentions == 5
    assert len(samples) == 5


def test_verification_campaign_entry_point():
    result = rsd.verify_prop2(instances=50, seed=3)
    assert result.passed
    assert result.instances_checked == 50
