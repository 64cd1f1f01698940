"""Execution accuracy: run predicted and gold SQL on an in-memory database
built from fixture rows and compare result tables.

Rows compare as multisets unless the gold query has a top-level ORDER BY
(then order matters). Column order is forgiven: when the column counts match,
any single column permutation aligning every row counts as equal.
"""

from __future__ import annotations

import sqlite3
from itertools import permutations

from .errors import ExecutionError
from .fixtures import FixtureInstance
from .tokenizer import ClauseKind, tokenize_sql

# column-permutation search is factorial; beyond this width use identity only
_MAX_PERMUTATION_COLUMNS = 6


class SqliteBackend:
    """Executes SQL against an in-memory database seeded from fixture rows."""

    def __init__(self, instance: FixtureInstance):
        self.connection = sqlite3.connect(":memory:")
        cursor = self.connection.cursor()
        for table in instance.schema.tables:
            columns = ", ".join(f'"{c.name}" {c.type}' for c in table.columns)
            cursor.execute(f'CREATE TABLE "{table.name}" ({columns})')
            rows = instance.database.get(table.name, ())
            if rows:
                width = len(table.columns)
                placeholders = ", ".join("?" for _ in range(width))
                for row in rows:
                    if len(row) != width:
                        raise ExecutionError(
                            "gold",
                            f"row width {len(row)} != {width} columns in {table.name}",
                        )
                cursor.executemany(
                    f'INSERT INTO "{table.name}" VALUES ({placeholders})', rows
                )
        self.connection.commit()

    def execute(self, sql: str, side: str) -> list[tuple]:
        try:
            return [tuple(row) for row in self.connection.execute(sql).fetchall()]
        except sqlite3.Error as exc:
            raise ExecutionError(side, str(exc))

    def close(self) -> None:
        self.connection.close()


def _column(rows: list[tuple], index: int) -> list:
    return [row[index] for row in rows]


def _rows_equal(pred: list[tuple], gold: list[tuple], ordered: bool) -> bool:
    if ordered:
        return pred == gold
    return sorted(map(repr, pred)) == sorted(map(repr, gold))


def _permuted(rows: list[tuple], perm: tuple[int, ...]) -> list[tuple]:
    return [tuple(row[i] for i in perm) for row in rows]


def results_equal(pred: list[tuple], gold: list[tuple], ordered: bool) -> bool:
    """Result-table equality with column-permutation forgiveness."""
    if len(pred) != len(gold):
        return False
    if not gold:
        return not pred
    width = len(gold[0])
    if any(len(row) != width for row in pred + gold):
        return _rows_equal(pred, gold, ordered)
    if _rows_equal(pred, gold, ordered):
        return True
    if width > _MAX_PERMUTATION_COLUMNS:
        return False
    # prune: a permutation can map i -> j only if the column multisets agree
    feasible = [
        [
            j
            for j in range(width)
            if sorted(map(repr, _column(pred, j))) == sorted(map(repr, _column(gold, i)))
        ]
        for i in range(width)
    ]
    if any(not options for options in feasible):
        return False
    for perm in permutations(range(width)):
        if all(perm[i] in feasible[i] for i in range(width)):
            if _rows_equal(_permuted(pred, perm), gold, ordered):
                return True
    return False


def execution_match(pred_sql: str, gold_sql: str, backend: SqliteBackend) -> bool:
    """True iff both queries produce the same result table on the database.

    Raises ExecutionError tagged by side; callers count a pred-side error as
    a non-match and a gold-side error as an invalid instance.
    """
    gold_rows = backend.execute(gold_sql, side="gold")
    pred_rows = backend.execute(pred_sql, side="pred")
    ordered = bool(tokenize_sql(gold_sql).elements(ClauseKind.ORDER_BY))
    return results_equal(pred_rows, gold_rows, ordered)
