"""Randomized synthetic candidate families.

Instances are built from assignment grids: each decision variable j becomes a
WHERE conjunct "cj = <value>" so the extractor recovers exactly the intended
complete variables. Sampling a strict subset of the full value grid creates
dependent variables (answers to one narrow the feasible values of others).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product

from .candidates import CandidateDistribution, from_weighted
from .evaluation import OracleUser
from .scoring import SelectionStrategy, StrategyKind
from .session import InteractionMode, SessionConfig, run_session
from .tokenizer import tokenize_sql


@dataclass(frozen=True)
class SyntheticInstance:
    distribution: CandidateDistribution
    gold_id: str
    difficulty: str


def _difficulty(n_candidates: int) -> str:
    return {5: "easy", 6: "medium", 7: "hard"}.get(n_candidates, "extra")


def synthetic_instance(
    rng: random.Random,
    n_vars: int | None = None,
    value_counts: list[int] | None = None,
    n_candidates: int | None = None,
) -> SyntheticInstance:
    """One randomized instance; the gold intent is drawn from the candidate
    distribution itself."""
    k = n_vars if n_vars is not None else rng.randint(2, 4)
    counts = value_counts if value_counts is not None else [
        rng.randint(2, 3) for _ in range(k)
    ]
    grid = list(product(*[range(c) for c in counts]))
    n = n_candidates if n_candidates is not None else rng.randint(4, min(8, len(grid)))
    n = min(n, len(grid))

    while True:
        combos = rng.sample(grid, n)
        if all(len({combo[j] for combo in combos}) >= 2 for j in range(k)):
            break

    weights = [rng.randint(1, 20) for _ in combos]
    entries = []
    for i, combo in enumerate(combos):
        cid = f"s{i + 1:02d}"
        conjuncts = " and ".join(f"c{j} = {v}" for j, v in enumerate(combo))
        sql = f"select * from t where {conjuncts}"
        entries.append((cid, sql, tokenize_sql(sql, candidate_id=cid), weights[i]))
    distribution = from_weighted("synthetic", entries)

    ids = [e[0] for e in entries]
    gold_id = rng.choices(ids, weights=weights, k=1)[0]
    return SyntheticInstance(
        distribution=distribution, gold_id=gold_id, difficulty=_difficulty(n)
    )


def dependent_instance(rng: random.Random) -> SyntheticInstance:
    """Three binary variables with a strict subset of the value grid, the
    family where multi-turn memory pays off most."""
    return synthetic_instance(
        rng, n_vars=3, value_counts=[2, 2, 2], n_candidates=rng.randint(5, 7)
    )


def turns_to_resolution(
    instance: SyntheticInstance,
    kind: StrategyKind,
    seed: str,
    mode: InteractionMode = InteractionMode.MULTI_TURN,
    confidence_threshold: float = 1.0,
    max_turns: int = 10,
) -> int:
    config = SessionConfig(
        strategy=SelectionStrategy(kind=kind, seed=seed),
        confidence_threshold=confidence_threshold,
        max_turns=max_turns,
        mode=mode,
    )
    gold = instance.distribution.by_id(instance.gold_id)
    oracle = OracleUser(gold.tokens)
    _, transcript = run_session(config, instance.distribution, oracle)
    return len(transcript.turns)


def strategy_trial(
    samples: int, seed: int, kinds: list[StrategyKind]
) -> dict[str, dict]:
    """Paired mean questions-to-resolution per strategy over one sampled
    family; the same instances and gold intents are reused across strategies."""
    turns: dict[str, list[int]] = {k.value: [] for k in kinds}
    difficulties: list[str] = []
    for i in range(samples):
        rng = random.Random(f"{seed}|instance|{i}")
        instance = synthetic_instance(rng)
        difficulties.append(instance.difficulty)
        for kind in kinds:
            turns[kind.value].append(
                turns_to_resolution(instance, kind, seed=f"{seed}|{i}")
            )
    out: dict[str, dict] = {}
    for kind in kinds:
        per = turns[kind.value]
        cells: dict[str, float | int] = {
            "mean_turns": sum(per) / len(per),
            "count": len(per),
        }
        for difficulty in ("easy", "medium", "hard", "extra"):
            rows = [t for t, d in zip(per, difficulties) if d == difficulty]
            cells[f"mean_turns_{difficulty}"] = (
                sum(rows) / len(rows) if rows else 0.0
            )
            cells[f"count_{difficulty}"] = len(rows)
        out[kind.value] = cells
    return out


def strategy_table(trial: dict[str, dict]) -> str:
    """The trial as a strategies-by-difficulty table (count row first)."""
    columns = ["all", "easy", "medium", "hard", "extra"]
    lines = ["\t".join(["strategy"] + columns)]
    first = next(iter(trial.values()))
    counts = [str(first["count"])] + [str(first[f"count_{d}"]) for d in columns[1:]]
    lines.append("\t".join(["num"] + counts))
    for name, cells in trial.items():
        means = [f"{cells['mean_turns']:.4f}"] + [
            f"{cells[f'mean_turns_{d}']:.4f}" for d in columns[1:]
        ]
        lines.append("\t".join([name] + means))
    return "\n".join(lines) + "\n"


def mode_trial(samples: int, seed: int) -> dict[str, float]:
    """Paired mean turns for single- vs multi-turn sessions on the dependent
    three-variable family."""
    totals = {mode.value: 0 for mode in InteractionMode}
    for i in range(samples):
        rng = random.Random(f"{seed}|mode|{i}")
        instance = dependent_instance(rng)
        for mode in InteractionMode:
            totals[mode.value] += turns_to_resolution(
                instance, StrategyKind.EXPECTED_INFO_GAIN, seed=f"{seed}|{i}", mode=mode
            )
    return {mode: total / samples for mode, total in totals.items()}
