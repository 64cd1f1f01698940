"""Probability bookkeeping over candidate SQL queries.

A candidate set is held as a :class:`CandidateDistribution`: an immutable,
normalized, deterministically ordered list of weighted candidates. All
entropies are in bits (log base 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TYPE_CHECKING

from .errors import AllZeroWeights, EmptyFilterResult, NegativeWeight

if TYPE_CHECKING:
    from .tokenizer import TokenizedQuery

PROB_TOLERANCE = 1e-9


def normalize(weights: Sequence[float]) -> list[float]:
    """Scale nonnegative weights so they sum to 1.

    Raises NegativeWeight / AllZeroWeights on bad input.
    """
    if any(w < 0 for w in weights):
        raise NegativeWeight(f"negative weight in {list(weights)}")
    total = math.fsum(weights)
    if total <= 0:
        raise AllZeroWeights("all candidate weights are zero")
    return [w / total for w in weights]


@dataclass(frozen=True)
class WeightedCandidate:
    """One candidate SQL interpretation and its probability."""

    id: str
    sql_text: str
    tokens: "TokenizedQuery"
    probability: float

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


@dataclass(frozen=True)
class CandidateDistribution:
    """A normalized set of weighted candidates for one natural-language query.

    Candidates are ordered by descending probability, ties broken by id, and
    zero-probability candidates are dropped at construction.
    """

    question: str
    candidates: tuple[WeightedCandidate, ...] = field(default=())

    def __post_init__(self):
        kept = tuple(
            sorted(
                (c for c in self.candidates if c.probability > 0.0),
                key=lambda c: (-c.probability, c.id),
            )
        )
        if not kept:
            raise ValueError("a distribution needs at least one candidate")
        ids = [c.id for c in kept]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate candidate ids: {ids}")
        total = math.fsum(c.probability for c in kept)
        if abs(total - 1.0) > PROB_TOLERANCE:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "candidates", kept)

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)

    def by_id(self, candidate_id: str) -> WeightedCandidate:
        for c in self.candidates:
            if c.id == candidate_id:
                return c
        raise KeyError(candidate_id)

    @property
    def probabilities(self) -> list[float]:
        return [c.probability for c in self.candidates]


def from_weighted(
    question: str,
    entries: Iterable[tuple[str, str, "TokenizedQuery", float]],
) -> CandidateDistribution:
    """Build a distribution from (id, sql_text, tokens, raw weight) tuples."""
    entries = list(entries)
    probs = normalize([w for (_, _, _, w) in entries])
    cands = [
        WeightedCandidate(id=i, sql_text=s, tokens=t, probability=p)
        for (i, s, t, _), p in zip(entries, probs)
    ]
    return CandidateDistribution(question=question, candidates=tuple(cands))


def entropy(dist: CandidateDistribution) -> float:
    """Shannon entropy of the candidate distribution, in bits.

    Uses the convention 0 * log2(0) = 0.
    """
    return entropy_of(dist.probabilities)


def entropy_of(probabilities: Iterable[float]) -> float:
    """Shannon entropy in bits of an already-normalized probability list."""
    h = 0.0
    for p in probabilities:
        if p > 0:
            h -= p * math.log2(p)
    return h


def filter_and_renormalize(
    dist: CandidateDistribution,
    keep: Callable[[WeightedCandidate], bool],
) -> CandidateDistribution:
    """Drop candidates failing ``keep`` and rescale the survivors to sum 1.

    Survivor probabilities stay proportional to their priors. Raises
    EmptyFilterResult when nothing survives (the caller decides recovery).
    """
    survivors = [c for c in dist.candidates if keep(c)]
    if not survivors:
        raise EmptyFilterResult("no candidate satisfies the filter")
    total = math.fsum(c.probability for c in survivors)
    rescaled = tuple(
        WeightedCandidate(
            id=c.id,
            sql_text=c.sql_text,
            tokens=c.tokens,
            probability=c.probability / total,
        )
        for c in survivors
    )
    return CandidateDistribution(question=dist.question, candidates=rescaled)


def top_candidate(dist: CandidateDistribution) -> WeightedCandidate:
    """The maximum-probability candidate; ties broken by smallest id."""
    return min(dist.candidates, key=lambda c: (-c.probability, c.id))
