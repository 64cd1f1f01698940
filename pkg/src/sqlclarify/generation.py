"""Candidate sources: the generation-backend interface, fixture replay, and
assembly of raw (sql, weight) pairs into a validated distribution.
"""

from __future__ import annotations

import logging
from typing import Protocol, Sequence, runtime_checkable

from .candidates import CandidateDistribution, from_weighted
from .errors import AllCandidatesUnparseable, ParseError
from .fixtures import FixtureInstance, SchemaDef
from .tokenizer import tokenize_sql
from .variables import duplicate_collapse

logger = logging.getLogger(__name__)


@runtime_checkable
class GenerationBackend(Protocol):
    """Anything that proposes up to n weighted SQL texts for a question."""

    def generate(
        self, question: str, schema: SchemaDef | None, n: int
    ) -> Sequence[tuple[str, float]]:
        ...


class FixtureBackend:
    """Replays the candidate list of a fixture instance."""

    last_mode = "fixture"

    def __init__(self, instance: FixtureInstance):
        self.instance = instance

    def generate(self, question, schema, n):
        return list(self.instance.candidates[:n])


def generate_candidates(
    backend: GenerationBackend,
    question: str,
    schema: SchemaDef | None,
    n: int,
) -> CandidateDistribution:
    """Invoke the backend once and normalize its output into a distribution.

    Unparseable candidates are dropped with a warning and their weight is
    excluded before normalization; duplicates are collapsed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    pairs = list(backend.generate(question, schema, n))
    entries = []
    for i, (sql_text, weight) in enumerate(pairs):
        cid = f"g{i + 1:02d}"
        try:
            tokens = tokenize_sql(sql_text, candidate_id=cid)
        except ParseError as exc:
            logger.warning("dropping unparseable candidate %s: %s", cid, exc)
            continue
        entries.append((cid, sql_text, tokens, weight))
    if not entries:
        raise AllCandidatesUnparseable(
            f"none of the {len(pairs)} generated candidates parse"
        )
    return duplicate_collapse(from_weighted(question, entries))
