"""Reward-guided speculative decoding engine.

A draft model proposes reasoning steps, a process reward model scores them,
and rejected steps are regenerated by a stronger target model. This package
exposes the C++ engine's main operations: weighting functions and the
acceptance criterion, tabular worlds with exact mixture/threshold oracles,
the decode strategies, FLOPs accounting, and the randomized verification
campaigns.
"""

from ._core import (
    BinaryStepWeight,
    BruteForceResult,
    CampaignResult,
    ClipWeight,
    ConfigError,
    ConstantWeight,
    DecodeTrace,
    DominanceReport,
    HybridWeight,
    LikelihoodRatioWeight,
    LogisticWeight,
    MixtureResult,
    RsdConfig,
    RunStats,
    SigmoidalWeight,
    Step,
    StepRecord,
    TabularWorld,
    ThresholdResult,
    TransportError,
    accept,
    brute_force_optimal_weighting,
    check_reward_dominance,
    decode_best_of_n,
    decode_process_best_of_n,
    decode_majority_voting,
    decode_rsd,
    decode_sd,
    decode_single,
    delta_sweep,
    evaluate_weight,
    exact_rsd_distribution,
    expected_reward,
    extract_boxed_answer,
    flops_of,
    monotone_in_reward,
    needs_likelihood_ratio,
    optimal_threshold,
    render_context,
    summarize,
    tv_distance,
    variant_name,
    verify_prop1,
    verify_prop2,
    verify_prop3,
    verify_sd_unbiased,
    weighting_from_json,
    weighting_to_json,
)


class WeightingSpec:
    """Factory namespace for the weighting-function variants.

    Any of the weight classes can be passed wherever a weighting spec is
    expected; these constructors just group them under one name.
    """

    constant = ConstantWeight
    binary_step = BinaryStepWeight
    clip = ClipWeight
    sigmoidal = SigmoidalWeight
    logistic = LogisticWeight
    likelihood_ratio = LikelihoodRatioWeight
    hybrid = HybridWeight
    from_json = staticmethod(weighting_from_json)


__all__ = [
    "BinaryStepWeight",
    "BruteForceResult",
    "CampaignResult",
    "ClipWeight",
    "ConfigError",
    "ConstantWeight",
    "DecodeTrace",
    "DominanceReport",
    "HybridWeight",
    "LikelihoodRatioWeight",
    "LogisticWeight",
    "MixtureResult",
    "RsdConfig",
    "RunStats",
    "SigmoidalWeight",
    "Step",
    "StepRecord",
    "TabularWorld",
    "ThresholdResult",
    "TransportError",
    "WeightingSpec",
    "accept",
    "brute_force_optimal_weighting",
    "check_reward_dominance",
    "decode_best_of_n",
    "decode_majority_voting",
    "decode_process_best_of_n",
    "decode_rsd",
    "decode_sd",
    "decode_single",
    "delta_sweep",
    "evaluate_weight",
    "exact_rsd_distribution",
    "expected_reward",
    "extract_boxed_answer",
    "flops_of",
    "monotone_in_reward",
    "needs_likelihood_ratio",
    "optimal_threshold",
    "render_context",
    "summarize",
    "tv_distance",
    "variant_name",
    "verify_prop1",
    "verify_prop2",
    "verify_prop3",
    "verify_sd_unbiased",
    "weighting_from_json",
    "weighting_to_json",
]
