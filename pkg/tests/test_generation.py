"""Tests for candidate generation: the backend protocol, fixture replay,
and assembly of raw pairs into a clean distribution."""

import logging

import pytest

from sqlclarify import (
    AllCandidatesUnparseable,
    FixtureBackend,
    GenerationBackend,
    generate_candidates,
)


class ListBackend:
    """Minimal in-test backend serving a fixed list."""

    def __init__(self, pairs):
        self.pairs = pairs
        self.calls = 0

    def generate(self, question, schema, n):
        self.calls += 1
        return self.pairs[:n]


class TestProtocol:
    def test_duck_typing(self, fig3_instance):
        assert isinstance(FixtureBackend(fig3_instance), GenerationBackend)
        assert isinstance(ListBackend([]), GenerationBackend)


class TestFixtureBackend:
    def test_replays_candidates(self, fig3_instance):
        backend = FixtureBackend(fig3_instance)
        pairs = backend.generate("ignored", None, 10)
        assert pairs == list(fig3_instance.candidates)

    def test_respects_n(self, fig3_instance):
        backend = FixtureBackend(fig3_instance)
        assert len(backend.generate("ignored", None, 2)) == 2


class TestGenerateCandidates:
    def test_builds_distribution(self, fig3_instance):
        dist = generate_candidates(
            FixtureBackend(fig3_instance), fig3_instance.question, None, 10
        )
        assert [c.id for c in dist] == ["g01", "g02", "g03", "g04"]
        assert dist.by_id("g01").probability == pytest.approx(0.4)
        assert dist.question == fig3_instance.question

    def test_drops_unparseable_with_warning(self, caplog):
        backend = ListBackend(
            [
                ("select x from t", 1.0),
                ("select from where", 1.0),
                ("select count(*) from t", 2.0),
            ]
        )
        with caplog.at_level(logging.WARNING, logger="sqlclarify.generation"):
            dist = generate_candidates(backend, "q", None, 10)
        assert [c.id for c in dist] == ["g03", "g01"]
        # dropped weight is excluded before normalization
        assert dist.by_id("g01").probability == pytest.approx(1 / 3)
        assert any("g02" in record.getMessage() for record in caplog.records)

    def test_all_unparseable(self):
        backend = ListBackend([("not sql", 1.0), ("also bad", 1.0)])
        with pytest.raises(AllCandidatesUnparseable):
            generate_candidates(backend, "q", None, 10)

    def test_duplicates_collapse(self):
        backend = ListBackend(
            [
                ("select x from t where a = 1 and b = 2", 1.0),
                ("select x from t where b = 2 and a = 1", 1.0),
                ("select x from t", 2.0),
            ]
        )
        dist = generate_candidates(backend, "q", None, 10)
        assert [c.id for c in dist] == ["g01", "g03"]
        assert dist.by_id("g01").probability == pytest.approx(0.5)

    def test_n_bounds_backend_output(self, fig3_instance):
        dist = generate_candidates(
            FixtureBackend(fig3_instance), fig3_instance.question, None, 2
        )
        assert len(dist) == 2

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            generate_candidates(ListBackend([]), "q", None, 0)
