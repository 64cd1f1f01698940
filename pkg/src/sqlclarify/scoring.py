"""Expected-information-gain scoring and question-selection strategies.

EIG for a variable X over candidate set Y is H(Y) - H(Y|X), where the
conditional entropy averages the entropy of the renormalized survivor set for
each answer value (UNDEFINED included as a first-class value). For complete
variables the branching tree admits a one-pass shortcut: traversal mass times
the entropy of the aggregated edge distribution.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .candidates import (
    CandidateDistribution,
    entropy,
    entropy_of,
    filter_and_renormalize,
    top_candidate,
)
from .errors import EmptyFilterResult, NoVariables, VariableNotOnPath
from .variables import (
    BranchingTree,
    DecisionVariable,
    build_branching_tree,
)


@dataclass(frozen=True)
class VariableScore:
    """Scoring detail for one decision variable (one row of an explain table)."""

    variable_id: str
    marginal: dict[str, float]
    conditional_entropy: float
    eig: float
    fast_path_eig: float | None


class StrategyKind(str, Enum):
    RANDOM = "RANDOM"
    MAX_PROBABILITY = "MAX_PROBABILITY"
    MIN_PROBABILITY = "MIN_PROBABILITY"
    INFO_GAIN_UNIFORM = "INFO_GAIN_UNIFORM"
    EXPECTED_INFO_GAIN = "EXPECTED_INFO_GAIN"


@dataclass(frozen=True)
class SelectionStrategy:
    kind: StrategyKind
    seed: int | str = 0  # consumed by RANDOM only


def variable_marginal(
    dist: CandidateDistribution, var: DecisionVariable
) -> dict[str, float]:
    """P(x) per answer value: total probability of candidates assigned x.

    Keys follow the variable's value order (domain, then UNDEFINED); values
    with no mass in this distribution are omitted.
    """
    acc: dict[str, float] = {}
    for cand in dist:
        value = var.value_of(cand.id)
        acc[value] = acc.get(value, 0.0) + cand.probability
    return {v: acc[v] for v in var.values() if v in acc}


def conditional_entropy(dist: CandidateDistribution, var: DecisionVariable) -> float:
    """H(Y|X) = sum over answer values of P(x) * H(survivors given X = x)."""
    total = 0.0
    for value, p_value in variable_marginal(dist, var).items():
        survivors = filter_and_renormalize(
            dist, lambda c, v=value: var.value_of(c.id) == v
        )
        total += p_value * entropy(survivors)
    return total


def expected_information_gain(
    dist: CandidateDistribution, var: DecisionVariable
) -> float:
    """I(X;Y) = H(Y) - H(Y|X), in bits."""
    return entropy(dist) - conditional_entropy(dist, var)


def fast_path_score(tree: BranchingTree, variable_id: str, q_star_id: str) -> float:
    """Tree shortcut: traversal mass times entropy of the variable's
    aggregated edge distribution (edge masses pooled over every node labeled
    with the variable, normalized by the pooled mass).

    Requires the variable to label a node on the root-to-Q* path.
    """
    path = tree.path_to(q_star_id)
    if all(node.variable_id != variable_id for node in path):
        raise VariableNotOnPath(
            f"{variable_id} does not label any node on the path to {q_star_id}"
        )
    traversal_mass = 0.0
    edge_mass: dict[str, float] = {}
    for node in tree.iter_nodes():
        if node.variable_id != variable_id:
            continue
        traversal_mass += node.mass
        for value, child in node.edges:
            edge_mass[value] = edge_mass.get(value, 0.0) + child.mass
    if traversal_mass <= 0.0:
        return 0.0
    branch_entropy = entropy_of([m / traversal_mass for m in edge_mass.values()])
    return traversal_mass * branch_entropy


def score_all(
    dist: CandidateDistribution, variables: Sequence[DecisionVariable]
) -> list[VariableScore]:
    """One VariableScore per variable; the fast-path column is filled only
    for complete variables, the regime where the shortcut equals direct EIG."""
    if not variables:
        return []
    h = entropy(dist)
    tree = build_branching_tree(dist, list(variables))
    q_star = top_candidate(dist).id
    scores = []
    for var in variables:
        cond = conditional_entropy(dist, var)
        fast = (
            fast_path_score(tree, var.id, q_star) if var.is_complete else None
        )
        scores.append(
            VariableScore(
                variable_id=var.id,
                marginal=variable_marginal(dist, var),
                conditional_entropy=cond,
                eig=h - cond,
                fast_path_eig=fast,
            )
        )
    return scores


def _uniform_prior_gain(dist: CandidateDistribution, var: DecisionVariable) -> float:
    """Information gain recomputed with a uniform prior over the defined
    values (each weighted 1/|domain|); conditional distributions stay true."""
    weight = 1.0 / len(var.domain)
    cond = 0.0
    for value in var.domain:
        try:
            survivors = filter_and_renormalize(
                dist, lambda c, v=value: var.value_of(c.id) == v
            )
        except EmptyFilterResult:
            continue
        cond += weight * entropy(survivors)
    return entropy(dist) - cond


def _argbest(
    variables: Sequence[DecisionVariable], scores: list[float], largest: bool
) -> str:
    best = None
    for index, score in enumerate(scores):
        key = (-score, index) if largest else (score, index)
        if best is None or key < best[0]:
            best = (key, variables[index].id)
    return best[1]


def select_variable(
    dist: CandidateDistribution,
    variables: Sequence[DecisionVariable],
    strategy: SelectionStrategy,
) -> str:
    """Pick the variable to clarify next; ties break by variable order."""
    if not variables:
        raise NoVariables("no decision variables to select from")
    kind = strategy.kind
    if kind == StrategyKind.RANDOM:
        rng = random.Random(f"{strategy.seed}|{','.join(v.id for v in variables)}")
        return variables[rng.randrange(len(variables))].id
    if kind == StrategyKind.EXPECTED_INFO_GAIN:
        return _argbest(
            variables,
            [expected_information_gain(dist, v) for v in variables],
            largest=True,
        )
    if kind == StrategyKind.INFO_GAIN_UNIFORM:
        return _argbest(
            variables,
            [_uniform_prior_gain(dist, v) for v in variables],
            largest=True,
        )
    marginals = [variable_marginal(dist, v) for v in variables]
    if kind == StrategyKind.MAX_PROBABILITY:
        scores = [
            max((m.get(value, 0.0) for value in v.domain), default=0.0)
            for v, m in zip(variables, marginals)
        ]
        return _argbest(variables, scores, largest=True)
    if kind == StrategyKind.MIN_PROBABILITY:
        scores = [
            min((m[value] for value in v.domain if value in m), default=1.0)
            for v, m in zip(variables, marginals)
        ]
        return _argbest(variables, scores, largest=False)
    raise ValueError(f"unknown strategy kind {kind}")
