"""Fixture files: hand-authored benchmark instances with schema, inline rows,
weighted SQL candidates, and gold SQL.

The on-disk format is JSON: a top-level list of instance objects whose field
names mirror FixtureInstance. Loading validates eagerly with instance- and
field-precise errors; loading a serialized list is a fixed point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .candidates import CandidateDistribution, from_weighted
from .errors import FormatError, ParseError, ValidationError
from .tokenizer import ClauseKind, TokenizedQuery, tokenize_sql
from .variables import _join_target, duplicate_collapse

DIFFICULTIES = ("easy", "medium", "hard", "extra")


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: str


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[ColumnDef, ...]
    foreign_keys: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class SchemaDef:
    tables: tuple[TableDef, ...]

    def table_names(self) -> set[str]:
        return {t.name for t in self.tables}


@dataclass(frozen=True)
class FixtureInstance:
    instance_id: str
    question: str
    schema: SchemaDef
    candidates: tuple[tuple[str, float], ...]  # (sql_text, weight)
    gold_sql: str
    database: Mapping[str, tuple[tuple, ...]] = field(default_factory=dict)
    gold_assignments: Mapping[str, str] | None = None
    difficulty: str | None = None


def _require(obj: dict, key: str, instance_id: str) -> Any:
    if key not in obj:
        raise ValidationError(f"missing field {key!r}", instance_id, key)
    return obj[key]


def _parse_schema(raw: Any, instance_id: str) -> SchemaDef:
    if not isinstance(raw, dict) or "tables" not in raw:
        raise ValidationError("schema must be {tables: [...]}", instance_id, "schema")
    tables = []
    for t in raw["tables"]:
        try:
            columns = tuple(ColumnDef(c["name"], c["type"]) for c in t["columns"])
            fks = tuple(tuple(pair) for pair in t.get("foreign_keys", []))
            tables.append(TableDef(name=t["name"], columns=columns, foreign_keys=fks))
        except (KeyError, TypeError) as exc:
            raise ValidationError(
                f"malformed table definition: {exc}", instance_id, "schema.tables"
            )
    return SchemaDef(tables=tuple(tables))


def _referenced_tables(query: TokenizedQuery) -> set[str]:
    """Table names a query pulls from: FROM bases and JOIN targets.

    Aliases ("employees e") contribute their base name only.
    """
    names = set()
    for element in query.elements(ClauseKind.FROM):
        head = element.split()[0]
        if not head.startswith("("):
            names.add(head.split(".")[0])
    for element in query.elements(ClauseKind.JOIN):
        names.add(_join_target(element))
    return names


def _validate_instance(obj: dict) -> FixtureInstance:
    if not isinstance(obj, dict):
        raise FormatError(f"instance entries must be objects, got {type(obj).__name__}")
    instance_id = obj.get("instance_id")
    if not instance_id or not isinstance(instance_id, str):
        raise ValidationError("missing or non-string instance_id", str(instance_id), "instance_id")

    question = _require(obj, "question", instance_id)
    schema = _parse_schema(_require(obj, "schema", instance_id), instance_id)
    gold_sql = _require(obj, "gold_sql", instance_id)

    raw_candidates = _require(obj, "candidates", instance_id)
    if not isinstance(raw_candidates, list) or not raw_candidates:
        raise ValidationError("candidates must be a nonempty list", instance_id, "candidates")
    candidates = []
    for i, entry in enumerate(raw_candidates):
        fieldname = f"candidates[{i}]"
        try:
            sql_text, weight = entry["sql_text"], float(entry["weight"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad candidate entry: {exc}", instance_id, fieldname)
        if weight < 0:
            raise ValidationError(f"negative weight {weight}", instance_id, fieldname)
        candidates.append((sql_text, weight))
    if all(w == 0 for _, w in candidates):
        raise ValidationError("all candidate weights are zero", instance_id, "candidates")

    known_tables = schema.table_names()
    parsed_queries = []
    for i, (sql_text, _) in enumerate(candidates):
        try:
            parsed_queries.append(tokenize_sql(sql_text))
        except ParseError as exc:
            raise ValidationError(
                f"candidate SQL does not parse: {exc}", instance_id, f"candidates[{i}]"
            )
    try:
        parsed_queries.append(tokenize_sql(gold_sql))
    except ParseError as exc:
        raise ValidationError(f"gold SQL does not parse: {exc}", instance_id, "gold_sql")
    for query, where in zip(
        parsed_queries,
        [f"candidates[{i}]" for i in range(len(candidates))] + ["gold_sql"],
    ):
        unknown = _referenced_tables(query) - known_tables
        if unknown:
            raise ValidationError(
                f"references tables not in schema: {sorted(unknown)}", instance_id, where
            )

    database = {}
    for table, rows in obj.get("database", {}).items():
        if table not in known_tables:
            raise ValidationError(
                f"rows for unknown table {table!r}", instance_id, "database"
            )
        database[table] = tuple(tuple(row) for row in rows)

    difficulty = obj.get("difficulty")
    if difficulty is not None and difficulty not in DIFFICULTIES:
        raise ValidationError(
            f"difficulty {difficulty!r} not one of {DIFFICULTIES}", instance_id, "difficulty"
        )

    return FixtureInstance(
        instance_id=instance_id,
        question=question,
        schema=schema,
        candidates=tuple(candidates),
        gold_sql=gold_sql,
        database=database,
        gold_assignments=obj.get("gold_assignments"),
        difficulty=difficulty,
    )


def loads_fixtures(text: str) -> list[FixtureInstance]:
    if not text.strip():
        raise FormatError("empty fixture document")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not valid JSON: {exc}")
    if not isinstance(data, list):
        raise FormatError("top level must be a list of instances")
    instances = [_validate_instance(obj) for obj in data]
    seen = set()
    for inst in instances:
        if inst.instance_id in seen:
            raise ValidationError("duplicate instance_id", inst.instance_id, "instance_id")
        seen.add(inst.instance_id)
    return instances


def load_fixtures(path: str | Path) -> list[FixtureInstance]:
    """Load and eagerly validate a fixture file."""
    p = Path(path)
    if not p.exists():
        raise FormatError(f"fixture file not found: {p}")
    return loads_fixtures(p.read_text(encoding="utf-8"))


def instance_to_dict(instance: FixtureInstance) -> dict:
    out: dict[str, Any] = {
        "instance_id": instance.instance_id,
        "question": instance.question,
        "schema": {
            "tables": [
                {
                    "name": t.name,
                    "columns": [{"name": c.name, "type": c.type} for c in t.columns],
                    "foreign_keys": [list(fk) for fk in t.foreign_keys],
                }
                for t in instance.schema.tables
            ]
        },
        "candidates": [
            {"sql_text": sql, "weight": weight} for sql, weight in instance.candidates
        ],
        "gold_sql": instance.gold_sql,
    }
    if instance.database:
        out["database"] = {
            table: [list(row) for row in rows]
            for table, rows in instance.database.items()
        }
    if instance.gold_assignments is not None:
        out["gold_assignments"] = dict(instance.gold_assignments)
    if instance.difficulty is not None:
        out["difficulty"] = instance.difficulty
    return out


def dumps_fixtures(instances: list[FixtureInstance]) -> str:
    return json.dumps(
        [instance_to_dict(i) for i in instances], indent=2, ensure_ascii=False
    )


def instance_distribution(instance: FixtureInstance) -> CandidateDistribution:
    """Tokenize the instance's candidates into a collapsed, normalized
    distribution with stable ids c01, c02, ... in file order."""
    entries = []
    for i, (sql_text, weight) in enumerate(instance.candidates):
        cid = f"c{i + 1:02d}"
        entries.append((cid, sql_text, tokenize_sql(sql_text, candidate_id=cid), weight))
    return duplicate_collapse(from_weighted(instance.question, entries))


def bundled_path(name: str) -> Path:
    """Path to a data file shipped inside the package."""
    return Path(str(resources.files("sqlclarify.data").joinpath(name)))


def load_bundled(name: str) -> list[FixtureInstance]:
    return loads_fixtures(
        resources.files("sqlclarify.data").joinpath(name).read_text(encoding="utf-8")
    )
