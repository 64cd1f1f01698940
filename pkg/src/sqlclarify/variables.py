"""Decision-variable extraction and the branching-tree view of a candidate set.

A decision variable marks one point where candidate queries diverge: a clause
slot that takes different values across candidates. Candidates that lack the
slot entirely are assigned the sentinel value UNDEFINED, which participates in
marginals and filtering as a first-class answer ("none of these apply").
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping

from .candidates import CandidateDistribution, WeightedCandidate
from .errors import InconsistentAssignment
from .tokenizer import KEYWORDS, ClauseKind, TokenizedQuery, _fold, _lex

UNDEFINED = "UNDEFINED"

AGGREGATE_FUNCTIONS = {"count", "sum", "avg", "min", "max", "total", "group_concat"}

# clauses whose element order carries no meaning
SET_SEMANTIC_CLAUSES = {
    ClauseKind.SELECT,
    ClauseKind.FROM,
    ClauseKind.JOIN,
    ClauseKind.WHERE,
    ClauseKind.GROUP_BY,
    ClauseKind.HAVING,
}


class VariableCategory(str, Enum):
    SELECT_COLUMNS = "SELECT_COLUMNS"
    AGGREGATION = "AGGREGATION"
    WHERE_CONDITION = "WHERE_CONDITION"
    JOIN_PATH = "JOIN_PATH"
    TABLE_CHOICE = "TABLE_CHOICE"
    GROUP_ORDER_MODIFIER = "GROUP_ORDER_MODIFIER"


@dataclass(frozen=True, eq=False)
class DecisionVariable:
    """One ambiguity point: a domain of observed alternatives plus a
    (possibly partial) candidate-to-value mapping."""

    id: str
    category: VariableCategory
    domain: tuple[str, ...]
    assignment: Mapping[str, str]

    def __post_init__(self):
        if len(self.domain) != len(set(self.domain)):
            raise ValueError(f"duplicate domain values in {self.id}")
        if UNDEFINED in self.domain:
            raise ValueError("UNDEFINED is implicit, not a domain label")
        observed = set(self.assignment.values())
        missing = set(self.domain) - observed
        if missing:
            raise ValueError(f"{self.id}: domain values never assigned: {missing}")
        stray = observed - set(self.domain) - {UNDEFINED}
        if stray:
            raise ValueError(f"{self.id}: assignments outside domain: {stray}")
        if len(self.domain) + (1 if self.has_undefined else 0) < 2:
            raise ValueError(f"{self.id}: single-valued, not an ambiguity")

    @property
    def has_undefined(self) -> bool:
        return any(v == UNDEFINED for v in self.assignment.values())

    def values(self) -> tuple[str, ...]:
        """Domain labels plus UNDEFINED when any candidate maps to it."""
        if self.has_undefined:
            return self.domain + (UNDEFINED,)
        return self.domain

    def value_of(self, candidate_id: str) -> str:
        return self.assignment[candidate_id]

    @property
    def is_complete(self) -> bool:
        """Defined on every candidate (no UNDEFINED mass)."""
        return not self.has_undefined


def _element_key(element: str) -> str:
    """Structural key of a conjunct: its first bare identifier chain.

    Function names (word followed by '(') are skipped so aggregate or scalar
    wrappers key by their argument column.
    """
    tokens = _fold(_lex(element))
    i = 0
    while i < len(tokens):
        kind, text, _ = tokens[i]
        is_call = i + 1 < len(tokens) and tokens[i + 1][1] == "("
        if kind == "word" and not is_call and text not in KEYWORDS:
            chain = [text]
            j = i + 1
            while j + 1 < len(tokens) and tokens[j][1] == "." and tokens[j + 1][0] == "word":
                chain.append(tokens[j + 1][1])
                j += 2
            return ".".join(chain)
        i += 1
    return "expr"


def _join_target(element: str) -> str:
    """Table named immediately after the JOIN keyword of a join edge."""
    tokens = _fold(_lex(element))
    for i, (_, text, _) in enumerate(tokens):
        if text == "join" and i + 1 < len(tokens):
            return tokens[i + 1][1]
    return "expr"


def _aggregate_signature(label: str) -> tuple[str, ...]:
    tokens = _fold(_lex(label))
    calls = [
        text
        for i, (kind, text, _) in enumerate(tokens)
        if kind == "word"
        and text in AGGREGATE_FUNCTIONS
        and i + 1 < len(tokens)
        and tokens[i + 1][1] == "("
    ]
    return tuple(sorted(calls))


# whole-clause slots: (slot id, order-insensitive?)
_WHOLE_CLAUSE_SLOTS = {
    ClauseKind.SELECT: ("select.columns", True),
    ClauseKind.FROM: ("from.tables", True),
    ClauseKind.GROUP_BY: ("group_by.columns", True),
    ClauseKind.ORDER_BY: ("order_by.keys", False),
    ClauseKind.LIMIT: ("limit.value", False),
    ClauseKind.OTHER: ("other.ops", False),
}

# keyed slots: one slot per structural key within the clause
_KEYED_CLAUSE_SLOTS = {
    ClauseKind.JOIN: ("join.", _join_target),
    ClauseKind.WHERE: ("where.", _element_key),
    ClauseKind.HAVING: ("having.", _element_key),
}

_CLAUSE_CATEGORY = {
    ClauseKind.FROM: VariableCategory.TABLE_CHOICE,
    ClauseKind.JOIN: VariableCategory.JOIN_PATH,
    ClauseKind.WHERE: VariableCategory.WHERE_CONDITION,
    ClauseKind.GROUP_BY: VariableCategory.GROUP_ORDER_MODIFIER,
    ClauseKind.HAVING: VariableCategory.WHERE_CONDITION,
    ClauseKind.ORDER_BY: VariableCategory.GROUP_ORDER_MODIFIER,
    ClauseKind.LIMIT: VariableCategory.GROUP_ORDER_MODIFIER,
    ClauseKind.OTHER: VariableCategory.GROUP_ORDER_MODIFIER,
}


def _whole_clause_label(elements: tuple[str, ...], order_insensitive: bool) -> str:
    if not order_insensitive:
        return ", ".join(elements)
    if "distinct" in elements:
        rest = sorted(e for e in elements if e != "distinct")
        return "distinct " + ", ".join(rest)
    return ", ".join(sorted(elements))


def query_slot_labels(query: TokenizedQuery) -> list[tuple[ClauseKind, str, str]]:
    """Every (clause, slot id, value label) this query defines, in canonical
    clause order then element order. Labels are canonical: they do not depend
    on which other queries are being compared."""
    out: list[tuple[ClauseKind, str, str]] = []
    for clause in ClauseKind:
        elements = query.elements(clause)
        if not elements:
            continue
        if clause in _WHOLE_CLAUSE_SLOTS:
            slot_id, order_insensitive = _WHOLE_CLAUSE_SLOTS[clause]
            out.append((clause, slot_id, _whole_clause_label(elements, order_insensitive)))
        else:
            prefix, keyer = _KEYED_CLAUSE_SLOTS[clause]
            grouped: dict[str, list[str]] = {}
            key_order: list[str] = []
            for element in elements:
                key = keyer(element)
                if key not in grouped:
                    key_order.append(key)
                grouped.setdefault(key, []).append(element)
            for key in key_order:
                label = " and ".join(sorted(grouped[key]))
                out.append((clause, prefix + key, label))
    return out


def slot_value(query: TokenizedQuery, slot_id: str) -> str:
    """The value label this query takes for one slot, or UNDEFINED."""
    for _, sid, label in query_slot_labels(query):
        if sid == slot_id:
            return label
    return UNDEFINED


def extract_decision_variables(dist: CandidateDistribution) -> list[DecisionVariable]:
    """One variable per divergent clause slot, ordered by canonical clause
    order then first occurrence. Empty list when nothing diverges."""
    candidate_ids = [c.id for c in dist]
    clause_of: dict[str, ClauseKind] = {}
    slot_order: list[str] = []
    labels: dict[str, dict[str, str]] = {}  # slot id -> candidate id -> label
    domain_order: dict[str, list[str]] = {}

    for cand in dist:
        for clause, slot_id, label in query_slot_labels(cand.tokens):
            if slot_id not in clause_of:
                clause_of[slot_id] = clause
                slot_order.append(slot_id)
                labels[slot_id] = {}
                domain_order[slot_id] = []
            if label not in domain_order[slot_id]:
                domain_order[slot_id].append(label)
            labels[slot_id][cand.id] = label

    clause_rank = {kind: i for i, kind in enumerate(ClauseKind)}
    ordered = sorted(
        slot_order, key=lambda sid: (clause_rank[clause_of[sid]], slot_order.index(sid))
    )

    variables = []
    for slot_id in ordered:
        assignment = {
            cid: labels[slot_id].get(cid, UNDEFINED) for cid in candidate_ids
        }
        has_undefined = any(v == UNDEFINED for v in assignment.values())
        domain = tuple(domain_order[slot_id])
        if len(domain) + (1 if has_undefined else 0) < 2:
            continue
        clause = clause_of[slot_id]
        if clause == ClauseKind.SELECT:
            signatures = {_aggregate_signature(v) for v in domain}
            category = (
                VariableCategory.AGGREGATION
                if len(signatures) > 1
                else VariableCategory.SELECT_COLUMNS
            )
        else:
            category = _CLAUSE_CATEGORY[clause]
        variables.append(
            DecisionVariable(
                id=slot_id, category=category, domain=domain, assignment=assignment
            )
        )
    return variables


@dataclass
class TreeNode:
    """One node of the branching tree; a leaf when candidate_id is set."""

    mass: float
    variable_id: str | None = None
    edges: tuple[tuple[str, "TreeNode"], ...] = ()
    candidate_id: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.candidate_id is not None


@dataclass(frozen=True)
class BranchingTree:
    """The disambiguation process as a tree: internal nodes are decision
    variables, edges are interpretations, leaves are candidates."""

    root: TreeNode
    variable_order: tuple[str, ...]

    def iter_nodes(self) -> Iterator[TreeNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(child for _, child in node.edges)

    def path_to(self, candidate_id: str) -> list[TreeNode]:
        """Internal nodes from the root down to (excluding) the leaf."""

        def descend(node: TreeNode, acc: list[TreeNode]) -> list[TreeNode] | None:
            if node.is_leaf:
                return acc if node.candidate_id == candidate_id else None
            for _, child in node.edges:
                found = descend(child, acc + [node])
                if found is not None:
                    return found
            return None

        path = descend(self.root, [])
        if path is None:
            raise KeyError(candidate_id)
        return path

    def leaf_masses(self) -> dict[str, float]:
        return {
            node.candidate_id: node.mass
            for node in self.iter_nodes()
            if node.is_leaf
        }


def build_branching_tree(
    dist: CandidateDistribution, variables: list[DecisionVariable]
) -> BranchingTree:
    """Split candidates on the variables in order; every root-to-leaf path
    selects exactly one candidate.

    Raises InconsistentAssignment when two distinct candidates share a full
    assignment (duplicate SQL that normalization should have collapsed).
    """

    def build(cands: list[WeightedCandidate], depth: int) -> TreeNode:
        mass = math.fsum(c.probability for c in cands)
        if depth == len(variables):
            if len(cands) != 1:
                ids = sorted(c.id for c in cands)
                raise InconsistentAssignment(
                    f"candidates {ids} share every variable assignment"
                )
            return TreeNode(mass=mass, candidate_id=cands[0].id)
        var = variables[depth]
        groups: dict[str, list[WeightedCandidate]] = {}
        for c in cands:
            groups.setdefault(var.value_of(c.id), []).append(c)
        edges = tuple(
            (value, build(groups[value], depth + 1))
            for value in var.values()
            if value in groups
        )
        return TreeNode(mass=mass, variable_id=var.id, edges=edges)

    root = build(list(dist), 0)
    return BranchingTree(root=root, variable_order=tuple(v.id for v in variables))


def canonical_fingerprint(query: TokenizedQuery) -> tuple:
    """Identity of a query up to element order in set-semantic clauses.

    Two queries with equal canonical fingerprints cannot be told apart by any
    decision variable, so duplicate collapse uses this identity.
    """
    out = []
    for seg in query.segments:
        elements = seg.elements
        if seg.kind in SET_SEMANTIC_CLAUSES:
            elements = tuple(sorted(elements))
        out.append((seg.kind.value, elements))
    return tuple(out)


def duplicate_collapse(dist: CandidateDistribution) -> CandidateDistribution:
    """Merge candidates whose normalized token streams coincide, summing
    probability mass; the smallest id in each group survives."""
    groups: dict[tuple, list[WeightedCandidate]] = {}
    order: list[tuple] = []
    for c in dist:
        key = canonical_fingerprint(c.tokens)
        if key not in groups:
            order.append(key)
        groups.setdefault(key, []).append(c)
    if all(len(g) == 1 for g in groups.values()):
        return dist
    merged = []
    for key in order:
        group = groups[key]
        keeper = min(group, key=lambda c: c.id)
        merged.append(
            WeightedCandidate(
                id=keeper.id,
                sql_text=keeper.sql_text,
                tokens=keeper.tokens,
                probability=math.fsum(c.probability for c in group),
            )
        )
    return CandidateDistribution(question=dist.question, candidates=tuple(merged))
