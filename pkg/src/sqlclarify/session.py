"""The clarification loop: score, ask, filter, repeat until one query wins.

A session stops when (a) the top candidate reaches the confidence threshold,
(b) no askable decision variables remain, or (c) the question budget is spent
(then the current argmax is returned, flagged BUDGET_EXHAUSTED). Multi-turn
sessions filter cumulatively and never re-ask an answered variable;
single-turn sessions rebuild their view from the original distribution using
only the latest answer, so they may re-ask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Union

from .candidates import (
    CandidateDistribution,
    WeightedCandidate,
    entropy,
    filter_and_renormalize,
    top_candidate,
)
from .errors import (
    EmptyFilterResult,
    InconsistentAnswer,
    SessionFailed,
    ValidationError,
)
from .questions import NONE_OF_THESE, Answer, ClarificationQuestion, render_question
from .scoring import SelectionStrategy, select_variable
from .variables import (
    UNDEFINED,
    DecisionVariable,
    extract_decision_variables,
)


class InteractionMode(str, Enum):
    SINGLE_TURN = "SINGLE_TURN"
    MULTI_TURN = "MULTI_TURN"


class SessionStatus(str, Enum):
    AWAITING_ANSWER = "AWAITING_ANSWER"
    FINISHED = "FINISHED"
    FAILED = "FAILED"


class StopReason(str, Enum):
    THRESHOLD = "THRESHOLD"
    NO_VARIABLES = "NO_VARIABLES"
    VARIABLES_EXHAUSTED = "VARIABLES_EXHAUSTED"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"
    FAILED = "FAILED"


@dataclass(frozen=True)
class SessionConfig:
    strategy: SelectionStrategy
    confidence_threshold: float = 0.9
    max_turns: int = 5
    mode: InteractionMode = InteractionMode.MULTI_TURN

    def __post_init__(self):
        if not 0.0 < self.confidence_threshold <= 1.0:
            raise ValueError(
                f"confidence threshold {self.confidence_threshold} outside (0, 1]"
            )
        if self.max_turns < 1:
            raise ValueError("max_turns must be at least 1")


@dataclass
class TurnRecord:
    question: ClarificationQuestion
    answer: Answer | None = None
    post_entropy: float | None = None
    post_top_id: str | None = None
    post_top_probability: float | None = None
    survivor_count: int | None = None


@dataclass
class SessionTranscript:
    """The full interaction record: the query, each question/answer turn with
    its post-turn distribution summary, and the final outcome."""

    question: str
    strategy: str
    seed: str
    confidence_threshold: float
    max_turns: int
    mode: str
    entropy_trace: list[float] = field(default_factory=list)
    turns: list[TurnRecord] = field(default_factory=list)
    final_sql: str | None = None
    final_candidate_id: str | None = None
    stop_reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "config": {
                "strategy": self.strategy,
                "seed": self.seed,
                "confidence_threshold": self.confidence_threshold,
                "max_turns": self.max_turns,
                "mode": self.mode,
            },
            "entropy_trace": [round(h, 12) for h in self.entropy_trace],
            "turns": [
                {
                    "question": {
                        "variable_id": t.question.variable_id,
                        "text": t.question.text,
                        "options": [list(o) for o in t.question.options],
                    },
                    "answer": None if t.answer is None else t.answer.chosen,
                    "post_entropy": None
                    if t.post_entropy is None
                    else round(t.post_entropy, 12),
                    "post_top_id": t.post_top_id,
                    "post_top_probability": None
                    if t.post_top_probability is None
                    else round(t.post_top_probability, 12),
                    "survivor_count": t.survivor_count,
                }
                for t in self.turns
            ],
            "final_sql": self.final_sql,
            "final_candidate_id": self.final_candidate_id,
            "stop_reason": self.stop_reason,
        }


@dataclass(frozen=True)
class QuestionIssued:
    question: ClarificationQuestion


@dataclass(frozen=True)
class Finished:
    candidate: WeightedCandidate
    reason: StopReason


@dataclass(frozen=True)
class Failed:
    reason: str


StepOutcome = Union[QuestionIssued, Finished, Failed]

# threshold comparisons forgive float dust from renormalization chains
_TAU_SLACK = 1e-12


class SessionState:
    """Single-writer state machine for one clarification dialogue."""

    def __init__(self, config: SessionConfig, distribution: CandidateDistribution):
        self.config = config
        self.original = distribution
        self.current = distribution
        self.original_variables = {
            v.id: v for v in extract_decision_variables(distribution)
        }
        self.pending_question: ClarificationQuestion | None = None
        self.pending_variable: DecisionVariable | None = None
        self.asked: set[str] = set()
        self.turns_used = 0
        self.failure_reason: str | None = None
        self.final: WeightedCandidate | None = None
        self.stop_reason: StopReason | None = None
        self.transcript = SessionTranscript(
            question=distribution.question,
            strategy=config.strategy.kind.value,
            seed=str(config.strategy.seed),
            confidence_threshold=config.confidence_threshold,
            max_turns=config.max_turns,
            mode=config.mode.value,
            entropy_trace=[entropy(distribution)],
        )

    @property
    def status(self) -> SessionStatus:
        if self.failure_reason is not None:
            return SessionStatus.FAILED
        if self.final is not None:
            return SessionStatus.FINISHED
        return SessionStatus.AWAITING_ANSWER

    def _finish(self, candidate: WeightedCandidate, reason: StopReason) -> Finished:
        self.final = candidate
        self.stop_reason = reason
        self.transcript.final_sql = candidate.sql_text
        self.transcript.final_candidate_id = candidate.id
        self.transcript.stop_reason = reason.value
        return Finished(candidate=candidate, reason=reason)

    def _fail(self, reason: str) -> None:
        self.failure_reason = reason
        self.transcript.stop_reason = StopReason.FAILED.value


def step(state: SessionState) -> StepOutcome:
    """Advance the session: finish, or issue the next question."""
    if state.status == SessionStatus.FAILED:
        return Failed(reason=state.failure_reason or "failed")
    if state.status == SessionStatus.FINISHED:
        return Finished(candidate=state.final, reason=state.stop_reason)
    if state.pending_question is not None:
        return QuestionIssued(question=state.pending_question)

    top = top_candidate(state.current)
    if top.probability >= state.config.confidence_threshold - _TAU_SLACK:
        return state._finish(top, StopReason.THRESHOLD)

    variables = extract_decision_variables(state.current)
    if not variables:
        return state._finish(top, StopReason.NO_VARIABLES)
    if state.config.mode == InteractionMode.MULTI_TURN:
        askable = [v for v in variables if v.id not in state.asked]
    else:
        askable = variables
    if not askable:
        return state._finish(top, StopReason.VARIABLES_EXHAUSTED)
    if state.turns_used >= state.config.max_turns:
        return state._finish(top, StopReason.BUDGET_EXHAUSTED)

    chosen_id = select_variable(state.current, askable, state.config.strategy)
    variable = next(v for v in askable if v.id == chosen_id)
    question = render_question(variable, state.transcript.question)
    state.pending_question = question
    state.pending_variable = variable
    state.transcript.turns.append(TurnRecord(question=question))
    return QuestionIssued(question=question)


def _retention(variable: DecisionVariable, chosen: str) -> Callable:
    if chosen == NONE_OF_THESE:
        return lambda c: variable.value_of(c.id) == UNDEFINED
    return lambda c: variable.value_of(c.id) in (chosen, UNDEFINED)


def apply_answer(state: SessionState, answer: Answer) -> SessionState:
    """Filter the distribution by the answer and renormalize.

    A chosen value keeps its own candidates plus the unaffected (UNDEFINED)
    ones; NONE_OF_THESE keeps only the unaffected ones. An answer that empties
    the candidate set fails the session and raises InconsistentAnswer.
    """
    if state.status != SessionStatus.AWAITING_ANSWER or state.pending_question is None:
        raise ValidationError("no question is awaiting an answer")
    pending = state.pending_question
    if answer.variable_id != pending.variable_id:
        raise ValidationError(
            f"answer targets {answer.variable_id}, question is {pending.variable_id}"
        )
    if answer.chosen not in pending.option_values():
        raise ValidationError(f"{answer.chosen!r} is not an offered option")

    variable = state.pending_variable
    if state.config.mode == InteractionMode.SINGLE_TURN:
        # rebuild from the original distribution using only this answer
        base = state.original
        base_variable = state.original_variables.get(variable.id, variable)
    else:
        base = state.current
        base_variable = variable

    turn = state.transcript.turns[-1]
    turn.answer = answer
    try:
        survivors = filter_and_renormalize(base, _retention(base_variable, answer.chosen))
    except EmptyFilterResult:
        state._fail(
            f"answer {answer.chosen!r} to {variable.id} is inconsistent with "
            "every candidate"
        )
        raise InconsistentAnswer(
            f"no candidate is consistent with {answer.chosen!r} for {variable.id}"
        )

    state.current = survivors
    state.asked.add(variable.id)
    state.turns_used += 1
    state.pending_question = None
    state.pending_variable = None

    post_entropy = entropy(survivors)
    post_top = top_candidate(survivors)
    turn.post_entropy = post_entropy
    turn.post_top_id = post_top.id
    turn.post_top_probability = post_top.probability
    turn.survivor_count = len(survivors)
    state.transcript.entropy_trace.append(post_entropy)
    return state


def run_session(
    config: SessionConfig,
    distribution: CandidateDistribution,
    user: Callable[[ClarificationQuestion], Answer],
) -> tuple[str, SessionTranscript]:
    """Drive a session to completion against an answer provider.

    Returns (final SQL, transcript); raises SessionFailed carrying the
    transcript when an answer eliminates every candidate.
    """
    state = SessionState(config=config, distribution=distribution)
    while True:
        outcome = step(state)
        if isinstance(outcome, QuestionIssued):
            answer = user(outcome.question)
            try:
                apply_answer(state, answer)
            except InconsistentAnswer as exc:
                raise SessionFailed(str(exc), transcript=state.transcript) from exc
        elif isinstance(outcome, Finished):
            return outcome.candidate.sql_text, state.transcript
        else:
            raise SessionFailed(outcome.reason, transcript=state.transcript)
