"""Template rendering of clarification questions.

Questions are filled from normalized SQL elements with one fixed template per
variable category; every option list ends with NONE_OF_THESE ("none of these
apply"), whose selection keeps only candidates unaffected by the variable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .variables import DecisionVariable, VariableCategory

NONE_OF_THESE = "NONE_OF_THESE"
NONE_DISPLAY = "None of these"


@dataclass(frozen=True)
class ClarificationQuestion:
    variable_id: str
    text: str
    options: tuple[tuple[str, str], ...]  # (value label, display string)

    def __post_init__(self):
        if len(self.options) < 2:
            raise ValueError("a question needs at least two options")
        if self.options[-1][0] != NONE_OF_THESE:
            raise ValueError("options must end with NONE_OF_THESE")

    def option_values(self) -> set[str]:
        return {value for value, _ in self.options}


@dataclass(frozen=True)
class Answer:
    variable_id: str
    chosen: str  # a domain value label or NONE_OF_THESE


def _or_join(labels) -> str:
    labels = list(labels)
    if len(labels) <= 2:
        return " or ".join(labels)
    return ", ".join(labels[:-1]) + " or " + labels[-1]


def _slot_key(variable_id: str) -> str:
    _, _, key = variable_id.partition(".")
    return key


def _condition_text(var: DecisionVariable) -> str:
    if len(var.domain) == 1:
        return f"Should the results also satisfy {var.domain[0]}?"
    return f"By '{_slot_key(var.id)}', do you mean {_or_join(var.domain)}?"


def _select_text(var: DecisionVariable) -> str:
    if "*" in var.domain and len(var.domain) >= 2:
        rest = [v for v in var.domain if v != "*"]
        return f"Should the output include all columns, or only {_or_join(rest)}?"
    if var.category == VariableCategory.AGGREGATION:
        return f"Should the output compute {_or_join(var.domain)}?"
    return f"Should the output columns be {_or_join(var.domain)}?"


def _modifier_text(var: DecisionVariable) -> str:
    key = var.id.split(".", 1)[0]
    phrases = {
        "group_by": "group by",
        "order_by": "be ordered by",
        "limit": "be limited to",
    }
    phrase = phrases.get(key, "include")
    if len(var.domain) == 1:
        return f"Should the output {phrase} {var.domain[0]} or not?"
    return f"Should the output {phrase} {_or_join(var.domain)}?"


def render_question(
    var: DecisionVariable, question_context: str = ""
) -> ClarificationQuestion:
    """Deterministic question text per category; question_context is the
    original natural-language query and is available to templates for display
    only, never for selection logic."""
    category = var.category
    if category in (VariableCategory.WHERE_CONDITION,):
        text = _condition_text(var)
    elif category in (VariableCategory.SELECT_COLUMNS, VariableCategory.AGGREGATION):
        text = _select_text(var)
    elif category in (VariableCategory.TABLE_CHOICE, VariableCategory.JOIN_PATH):
        text = f"Are you referring to {_or_join(var.domain)}?"
    else:
        text = _modifier_text(var)
    options = tuple((value, value) for value in var.domain)
    options += ((NONE_OF_THESE, NONE_DISPLAY),)
    return ClarificationQuestion(variable_id=var.id, text=text, options=options)
