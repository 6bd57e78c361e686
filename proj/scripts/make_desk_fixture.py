#!/usr/bin/env python3
"""Regenerates the desk-scale reasoning fixture.

Twenty two-step problems over a shared alphabet. Each problem key is a
context row; appending a step text forms the next row's key. The draft
model's chance of taking the good first step depends on the problem's
difficulty tier, while the target model is reliable everywhere. Rewards
favor the good step and the correct final answer.

Usage: python3 scripts/make_desk_fixture.py
Writes data/worlds/desk_reasoning.json and data/datasets/desk_prompts.jsonl.
"""

import json
import os

GOOD = "work through the relation\n\n"
BAD = "guess at the pattern\n\n"
WRONG = "final answer: \\boxed{mistake}"

# (tier name, draft P(good), count)
TIERS = [
    ("easy", 0.90, 7),
    ("medium", 0.50, 7),
    ("hard", 0.15, 6),
]
TARGET_GOOD = 0.95

R_GOOD, R_BAD = 0.9, 0.2
R_CORRECT, R_WRONG = 0.95, 0.1


def main():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

    answers = [f"a{i}" for i in range(20)]
    correct_symbols = [f"final answer: \\boxed{{{a}}}" for a in answers]

    symbols = [
        {"text": GOOD, "terminal": False},
        {"text": BAD, "terminal": False},
        {"text": WRONG, "terminal": True},
    ] + [{"text": s, "terminal": True} for s in correct_symbols]
    index = {s["text"]: i for i, s in enumerate(symbols)}
    k = len(symbols)

    def row(support):
        p_m = [0.0] * k
        p_M = [0.0] * k
        reward = [0.0] * k
        for text, (pm, pM, r) in support.items():
            p_m[index[text]] = pm
            p_M[index[text]] = pM
            reward[index[text]] = r
        return {"p_m": p_m, "p_M": p_M, "reward": reward}

    contexts = {}
    dataset = []
    problem = 0
    for tier, draft_good, count in TIERS:
        for _ in range(count):
            prompt = f"Problem {problem} ({tier}): evaluate the sequence term.\n"
            correct = correct_symbols[problem]
            # First step: good vs bad working.
            contexts[prompt] = row({
                GOOD: (draft_good, TARGET_GOOD, R_GOOD),
                BAD: (1.0 - draft_good, 1.0 - TARGET_GOOD, R_BAD),
            })
            # Good working makes the right answer likely for either model.
            contexts[prompt + GOOD] = row({
                correct: (0.9, 0.95, R_CORRECT),
                WRONG: (0.1, 0.05, R_WRONG),
            })
            # Bad working mostly dooms the draft; the target still recovers.
            contexts[prompt + BAD] = row({
                correct: (0.2, 0.9, R_CORRECT),
                WRONG: (0.8, 0.1, R_WRONG),
            })
            dataset.append({"id": f"p{problem:02d}", "prompt": prompt,
                            "answer": answers[problem]})
            problem += 1

    world = {
        "token_cost": 1,
        "reward_scale": "unit_interval",
        "symbols": symbols,
        "contexts": contexts,
    }

    world_path = os.path.join(root, "data", "worlds", "desk_reasoning.json")
    with open(world_path, "w") as f:
        json.dump(world, f, indent=1, sort_keys=True)
        f.write("\n")
    dataset_path = os.path.join(root, "data", "datasets", "desk_prompts.jsonl")
    with open(dataset_path, "w") as f:
        for record in dataset:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    print(f"wrote {world_path} ({len(contexts)} contexts) and {dataset_path}")


if __name__ == "__main__":
    main()
