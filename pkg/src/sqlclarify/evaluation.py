"""Simulated-user evaluation: truthful oracles answering from gold SQL,
exact-set-match and execution metrics, the ambiguity filter, and the
strategy/mode ablation runners.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .candidates import normalize
from .errors import ExecutionError, SessionFailed
from .execution import SqliteBackend, execution_match
from .fixtures import FixtureInstance, instance_distribution
from .questions import NONE_OF_THESE, Answer, ClarificationQuestion
from .scoring import SelectionStrategy, StrategyKind
from .session import InteractionMode, SessionConfig, run_session
from .tokenizer import TokenizedQuery, exact_set_match, tokenize_sql
from .variables import UNDEFINED, slot_value

DIFFICULTY_COLUMNS = ("easy", "medium", "hard", "extra")
ALL_COLUMN = "all"


@dataclass(frozen=True)
class OracleUser:
    """Simulated user that answers every question consistently with a
    designated gold query: it picks the option equal to gold's value for the
    variable, falling back to NONE_OF_THESE when gold has no match."""

    gold_tokens: TokenizedQuery

    def __call__(self, question: ClarificationQuestion) -> Answer:
        value = slot_value(self.gold_tokens, question.variable_id)
        if value != UNDEFINED and value in question.option_values():
            return Answer(variable_id=question.variable_id, chosen=value)
        return Answer(variable_id=question.variable_id, chosen=NONE_OF_THESE)


def oracle_answer(oracle: OracleUser, question: ClarificationQuestion) -> Answer:
    return oracle(question)


def ambiguity_filter(
    instances: Iterable[FixtureInstance], threshold: float = 0.7
) -> list[FixtureInstance]:
    """Keep instances whose top normalized candidate probability is strictly
    below the threshold (top p = threshold exactly is dropped)."""
    kept = []
    for instance in instances:
        top = max(normalize([w for _, w in instance.candidates]))
        if top < threshold:
            kept.append(instance)
    return kept


@dataclass(frozen=True)
class EvalConfig:
    confidence_threshold: float = 0.9
    max_turns: int = 5
    mode: InteractionMode = InteractionMode.MULTI_TURN
    seed: int = 0


@dataclass
class InstanceResult:
    instance_id: str
    strategy: str
    mode: str
    difficulty: str
    exact: bool
    execution: bool
    turns: int
    final_entropy: float
    stop_reason: str
    failed: bool
    instance_invalid: bool = False

    def to_dict(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "strategy": self.strategy,
            "mode": self.mode,
            "difficulty": self.difficulty,
            "exact": self.exact,
            "execution": self.execution,
            "turns": self.turns,
            "final_entropy": round(self.final_entropy, 9),
            "stop_reason": self.stop_reason,
            "failed": self.failed,
            "instance_invalid": self.instance_invalid,
        }


@dataclass
class CellStats:
    count: int = 0
    exact_pct: float = 0.0
    execution_pct: float = 0.0
    mean_turns: float = 0.0
    mean_final_entropy: float = 0.0


@dataclass
class AblationReport:
    """Per (strategy x difficulty) aggregate plus full per-instance detail."""

    config: dict
    strategies: list[str]
    results: list[InstanceResult] = field(default_factory=list)

    def cell(self, strategy: str, difficulty: str, mode: str | None = None) -> CellStats:
        rows = [
            r
            for r in self.results
            if r.strategy == strategy
            and (difficulty == ALL_COLUMN or r.difficulty == difficulty)
            and (mode is None or r.mode == mode)
        ]
        stats = CellStats(count=len(rows))
        if rows:
            stats.exact_pct = 100.0 * sum(r.exact for r in rows) / len(rows)
            stats.execution_pct = 100.0 * sum(r.execution for r in rows) / len(rows)
            stats.mean_turns = sum(r.turns for r in rows) / len(rows)
            stats.mean_final_entropy = sum(r.final_entropy for r in rows) / len(rows)
        return stats

    def modes(self) -> list[str]:
        seen: list[str] = []
        for r in self.results:
            if r.mode not in seen:
                seen.append(r.mode)
        return seen

    def to_dict(self) -> dict:
        summary = {}
        for mode in self.modes():
            for strategy in self.strategies:
                key = f"{strategy}@{mode}"
                summary[key] = {}
                for difficulty in (ALL_COLUMN,) + DIFFICULTY_COLUMNS:
                    stats = self.cell(strategy, difficulty, mode)
                    summary[key][difficulty] = {
                        "count": stats.count,
                        "exact_pct": round(stats.exact_pct, 4),
                        "execution_pct": round(stats.execution_pct, 4),
                        "mean_turns": round(stats.mean_turns, 4),
                        "mean_final_entropy": round(stats.mean_final_entropy, 6),
                    }
        return {
            "config": self.config,
            "strategies": self.strategies,
            "summary": summary,
            "instances": [r.to_dict() for r in self.results],
        }

    def to_table(self) -> str:
        """Delimiter-separated summary in the strategy-by-difficulty shape."""
        headers = ["strategy", "mode", "metric"] + [ALL_COLUMN, *DIFFICULTY_COLUMNS]
        lines = ["\t".join(headers)]
        count_row = None
        for mode in self.modes():
            for strategy in self.strategies:
                cells = {
                    d: self.cell(strategy, d, mode)
                    for d in (ALL_COLUMN,) + DIFFICULTY_COLUMNS
                }
                if count_row is None:
                    count_row = ["num", "-", "count"] + [
                        str(cells[d].count) for d in (ALL_COLUMN,) + DIFFICULTY_COLUMNS
                    ]
                    lines.append("\t".join(count_row))
                for metric, getter in (
                    ("exact_pct", lambda s: f"{s.exact_pct:.2f}"),
                    ("execution_pct", lambda s: f"{s.execution_pct:.2f}"),
                    ("mean_turns", lambda s: f"{s.mean_turns:.3f}"),
                    ("mean_final_entropy", lambda s: f"{s.mean_final_entropy:.4f}"),
                ):
                    row = [strategy, mode, metric] + [
                        getter(cells[d]) for d in (ALL_COLUMN,) + DIFFICULTY_COLUMNS
                    ]
                    lines.append("\t".join(row))
        return "\n".join(lines) + "\n"


def _strategy_for(kind: StrategyKind, seed: int, instance_id: str) -> SelectionStrategy:
    return SelectionStrategy(kind=kind, seed=f"{seed}|{instance_id}")


def evaluate_instance(
    instance: FixtureInstance,
    kind: StrategyKind,
    config: EvalConfig,
    mode: InteractionMode | None = None,
) -> InstanceResult:
    """Run one truthful-oracle session and score it against gold."""
    mode = mode if mode is not None else config.mode
    session_config = SessionConfig(
        strategy=_strategy_for(kind, config.seed, instance.instance_id),
        confidence_threshold=config.confidence_threshold,
        max_turns=config.max_turns,
        mode=mode,
    )
    gold_tokens = tokenize_sql(instance.gold_sql)
    oracle = OracleUser(gold_tokens)
    distribution = instance_distribution(instance)
    difficulty = instance.difficulty or "unspecified"

    try:
        final_sql, transcript = run_session(session_config, distribution, oracle)
    except SessionFailed as exc:
        transcript = exc.transcript
        return InstanceResult(
            instance_id=instance.instance_id,
            strategy=kind.value,
            mode=mode.value,
            difficulty=difficulty,
            exact=False,
            execution=False,
            turns=len(transcript.turns) if transcript else 0,
            final_entropy=transcript.entropy_trace[-1] if transcript else 0.0,
            stop_reason="FAILED",
            failed=True,
        )

    exact = exact_set_match(tokenize_sql(final_sql), gold_tokens)
    execution = False
    instance_invalid = False
    backend = SqliteBackend(instance)
    try:
        execution = execution_match(final_sql, instance.gold_sql, backend)
    except ExecutionError as exc:
        execution = False
        instance_invalid = exc.side == "gold"
    finally:
        backend.close()

    return InstanceResult(
        instance_id=instance.instance_id,
        strategy=kind.value,
        mode=mode.value,
        difficulty=difficulty,
        exact=exact,
        execution=execution,
        turns=len(transcript.turns),
        final_entropy=transcript.entropy_trace[-1],
        stop_reason=transcript.stop_reason or "",
        failed=False,
        instance_invalid=instance_invalid,
    )


def run_ablation(
    instances: Sequence[FixtureInstance],
    strategies: Sequence[StrategyKind],
    config: EvalConfig,
) -> AblationReport:
    """Evaluate every strategy over every instance with a truthful oracle;
    per-instance failures are recorded, never raised."""
    report = AblationReport(
        config={
            "confidence_threshold": config.confidence_threshold,
            "max_turns": config.max_turns,
            "mode": config.mode.value,
            "seed": config.seed,
        },
        strategies=[k.value for k in strategies],
    )
    for kind in strategies:
        for instance in instances:
            report.results.append(evaluate_instance(instance, kind, config))
    return report


def compare_modes(
    instances: Sequence[FixtureInstance],
    config: EvalConfig,
    kind: StrategyKind = StrategyKind.EXPECTED_INFO_GAIN,
) -> AblationReport:
    """The same corpus under SINGLE_TURN and MULTI_TURN, paired rows."""
    report = AblationReport(
        config={
            "confidence_threshold": config.confidence_threshold,
            "max_turns": config.max_turns,
            "mode": "BOTH",
            "seed": config.seed,
        },
        strategies=[kind.value],
    )
    for mode in (InteractionMode.SINGLE_TURN, InteractionMode.MULTI_TURN):
        for instance in instances:
            report.results.append(evaluate_instance(instance, kind, config, mode=mode))
    return report
