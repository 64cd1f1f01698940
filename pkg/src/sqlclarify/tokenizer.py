"""SQL-aware tokenization and clause segmentation.

Covers a fixed subset: a single SELECT statement with joins, aggregates,
sub-selects in WHERE/FROM, and trailing set operations (parked whole under
the OTHER clause). Normalization: keywords and function names case-folded,
whitespace collapsed, identifiers case-preserved, literals kept verbatim,
WHERE/HAVING split into top-level conjuncts, IN-lists kept as one element.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import ParseError


class ClauseKind(str, Enum):
    SELECT = "SELECT"
    FROM = "FROM"
    JOIN = "JOIN"
    WHERE = "WHERE"
    GROUP_BY = "GROUP_BY"
    HAVING = "HAVING"
    ORDER_BY = "ORDER_BY"
    LIMIT = "LIMIT"
    OTHER = "OTHER"


CLAUSE_ORDER = (
    ClauseKind.SELECT,
    ClauseKind.FROM,
    ClauseKind.JOIN,
    ClauseKind.WHERE,
    ClauseKind.GROUP_BY,
    ClauseKind.HAVING,
    ClauseKind.ORDER_BY,
    ClauseKind.LIMIT,
    ClauseKind.OTHER,
)

KEYWORDS = {
    "select", "from", "where", "group", "by", "having", "order", "limit",
    "offset", "join", "inner", "left", "right", "full", "outer", "cross",
    "on", "as", "and", "or", "not", "in", "like", "between", "is", "null",
    "exists", "union", "intersect", "except", "all", "distinct", "asc",
    "desc", "case", "when", "then", "else", "end",
}

JOIN_PREFIX = {"inner", "left", "right", "full", "outer", "cross"}
SET_OPS = {"union", "intersect", "except"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>'(?:[^']|'')*'|"[^"]*")
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<op><>|!=|>=|<=|\|\||[=<>+\-*/%])
  | (?P<punct>[(),.;])
    """,
    re.VERBOSE,
)

# token kinds: "string", "number", "word", "op", "punct"
Token = tuple  # (kind, text, offset)

LITERAL_KINDS = ("string", "number")
_MASK = "?"


def _lex(sql_text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    n = len(sql_text)
    while pos < n:
        m = _TOKEN_RE.match(sql_text, pos)
        if m is None:
            raise ParseError(f"unexpected character {sql_text[pos]!r}", pos)
        kind = m.lastgroup
        text = m.group()
        if text.startswith("'") and not text.endswith("'"):
            raise ParseError("unterminated string literal", pos)
        if kind != "ws":
            tokens.append((kind, text, pos))
        pos = m.end()
    return tokens


def _fold(tokens: list[Token]) -> list[Token]:
    """Case-fold keywords and function names; leave identifiers alone."""
    out: list[Token] = []
    for i, (kind, text, off) in enumerate(tokens):
        if kind == "word":
            lowered = text.lower()
            is_call = i + 1 < len(tokens) and tokens[i + 1][1] == "("
            if lowered in KEYWORDS or is_call:
                text = lowered
        out.append((kind, text, off))
    return out


def render_tokens(tokens: list[Token]) -> str:
    """Canonical single-spaced rendering: no space around '.', after '(',
    before ',', ')' and ';', or between a function name and its '('."""
    parts: list[str] = []
    prev_kind = prev_text = None
    for kind, text, _ in tokens:
        if parts:
            if text in (",", ")", ".", ";"):
                pass
            elif prev_text in ("(", "."):
                pass
            elif (
                text == "("
                and prev_kind == "word"
                and prev_text.lower() not in KEYWORDS
            ):
                # function call: count(*), avg(salary)
                pass
            else:
                parts.append(" ")
        parts.append(text)
        prev_kind, prev_text = kind, text
    return "".join(parts)


@dataclass(frozen=True)
class ClauseSegment:
    """One clause of a query as an ordered list of normalized elements."""

    kind: ClauseKind
    elements: tuple[str, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValueError(f"empty {self.kind} segment")


@dataclass(frozen=True)
class TokenizedQuery:
    """Clause-segmented normal form of one candidate query."""

    candidate_id: str
    segments: tuple[ClauseSegment, ...]

    def __post_init__(self):
        kinds = [s.kind for s in self.segments]
        order = [k for k in CLAUSE_ORDER if k in kinds]
        if kinds != order:
            raise ValueError(f"segments out of canonical clause order: {kinds}")

    def segment(self, kind: ClauseKind) -> ClauseSegment | None:
        for s in self.segments:
            if s.kind == kind:
                return s
        return None

    def elements(self, kind: ClauseKind) -> tuple[str, ...]:
        seg = self.segment(kind)
        return seg.elements if seg is not None else ()

    def fingerprint(self) -> tuple:
        """Hashable identity of the normalized token stream."""
        return tuple((s.kind.value, s.elements) for s in self.segments)


def _split_top_level(tokens: list[Token], separators: set[str]) -> list[list[Token]]:
    """Split a token run on depth-0 separator tokens (texts, already folded)."""
    parts: list[list[Token]] = []
    current: list[Token] = []
    depth = 0
    for tok in tokens:
        text = tok[1]
        if text == "(":
            depth += 1
        elif text == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ')'", tok[2])
        if depth == 0 and text in separators:
            parts.append(current)
            current = []
        else:
            current.append(tok)
    parts.append(current)
    return parts


def _strip_outer_parens(tokens: list[Token]) -> list[Token]:
    """Remove parentheses that wrap the entire token run."""
    while (
        len(tokens) >= 2
        and tokens[0][1] == "("
        and tokens[-1][1] == ")"
    ):
        depth = 0
        wraps = True
        for tok in tokens[:-1]:
            if tok[1] == "(":
                depth += 1
            elif tok[1] == ")":
                depth -= 1
                if depth == 0:
                    wraps = False
                    break
        if not wraps:
            break
        tokens = tokens[1:-1]
    return tokens


def _find_clause_starts(tokens: list[Token]) -> list[tuple[int, str]]:
    """Depth-0 positions of clause keywords, in source order."""
    starts: list[tuple[int, str]] = []
    depth = 0
    i = 0
    while i < len(tokens):
        text = tokens[i][1]
        if text == "(":
            depth += 1
        elif text == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ')'", tokens[i][2])
        elif depth == 0:
            if text in ("select", "from", "where", "having", "limit"):
                starts.append((i, text))
            elif text in ("group", "order"):
                if i + 1 < len(tokens) and tokens[i + 1][1] == "by":
                    starts.append((i, f"{text} by"))
                else:
                    raise ParseError(f"'{text}' not followed by 'by'", tokens[i][2])
            elif text in SET_OPS:
                starts.append((i, "setop"))
                # remainder handled whole; stop scanning for clause keywords
                break
        i += 1
    if depth != 0:
        raise ParseError("unbalanced '('", tokens[-1][2] if tokens else 0)
    return starts


def _parse_from(tokens: list[Token]) -> tuple[list[str], list[str]]:
    """Split a FROM body into base table elements and join-edge elements."""
    # find the first depth-0 join keyword (with optional prefix words)
    depth = 0
    join_start = None
    i = 0
    while i < len(tokens):
        text = tokens[i][1]
        if text == "(":
            depth += 1
        elif text == ")":
            depth -= 1
        elif depth == 0 and text == "join":
            j = i
            while j > 0 and tokens[j - 1][1] in JOIN_PREFIX:
                j -= 1
            join_start = j
            break
        i += 1
    base = tokens if join_start is None else tokens[:join_start]
    joins = [] if join_start is None else tokens[join_start:]

    base_elements = []
    for part in _split_top_level(base, {","}):
        part = [t for t in part if t[1] != "as"]
        if not part:
            raise ParseError("empty table reference in FROM", tokens[0][2])
        base_elements.append(render_tokens(part))

    join_elements: list[str] = []
    current: list[Token] = []
    depth = 0
    for idx, tok in enumerate(joins):
        text = tok[1]
        if text == "(":
            depth += 1
        elif text == ")":
            depth -= 1
        starts_edge = (
            depth == 0
            and current
            and (
                text == "join"
                or (text in JOIN_PREFIX and idx + 1 < len(joins)
                    and joins[idx + 1][1] in JOIN_PREFIX | {"join"})
            )
            and current[-1][1] not in JOIN_PREFIX
        )
        if starts_edge:
            join_elements.append(render_tokens([t for t in current if t[1] != "as"]))
            current = [tok]
        else:
            current.append(tok)
    if current:
        join_elements.append(render_tokens([t for t in current if t[1] != "as"]))
    return base_elements, join_elements


def _conjuncts(tokens: list[Token]) -> list[str]:
    """Split a WHERE/HAVING body into top-level AND conjuncts."""
    elements = []
    for part in _split_top_level(tokens, {"and"}):
        part = _strip_outer_parens(part)
        if not part:
            raise ParseError("empty conjunct", tokens[0][2] if tokens else 0)
        elements.append(render_tokens(part))
    return elements


def _comma_elements(tokens: list[Token], clause: str) -> list[str]:
    elements = []
    for part in _split_top_level(tokens, {","}):
        if not part:
            raise ParseError(f"empty element in {clause}", tokens[0][2] if tokens else 0)
        elements.append(render_tokens(part))
    return elements


def _validate_subqueries(tokens: list[Token]) -> None:
    """Recursively parse any parenthesized sub-select so its errors surface."""
    i = 0
    while i < len(tokens):
        if tokens[i][1] == "(" and i + 1 < len(tokens) and tokens[i + 1][1] == "select":
            depth = 0
            j = i
            while j < len(tokens):
                if tokens[j][1] == "(":
                    depth += 1
                elif tokens[j][1] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            if depth != 0:
                raise ParseError("unbalanced '(' in subquery", tokens[i][2])
            _segment(tokens[i + 1:j], candidate_id="", offset=tokens[i][2])
            i = j
        i += 1


def _segment(tokens: list[Token], candidate_id: str, offset: int = 0) -> TokenizedQuery:
    if not tokens:
        raise ParseError("empty statement", offset)
    if tokens[0][1] != "select":
        raise ParseError(f"expected SELECT, found {tokens[0][1]!r}", tokens[0][2])

    starts = _find_clause_starts(tokens)
    starts.append((len(tokens), "end"))

    bodies: dict[str, list[Token]] = {}
    other_tokens: list[Token] | None = None
    for (pos, name), (next_pos, _) in zip(starts, starts[1:]):
        if name == "setop":
            other_tokens = tokens[pos:]
            break
        skip = 2 if name in ("group by", "order by") else 1
        body = tokens[pos + skip:next_pos]
        if name in bodies:
            raise ParseError(f"duplicate {name.upper()} clause", tokens[pos][2])
        if not body:
            raise ParseError(f"empty {name.upper()} clause", tokens[pos][2])
        bodies[name] = body

    _validate_subqueries(tokens)

    segments: list[ClauseSegment] = []

    select_body = bodies.get("select")
    if select_body is None:
        raise ParseError("missing SELECT clause", offset)
    select_elements = []
    rest = select_body
    if rest and rest[0][1] == "distinct":
        select_elements.append("distinct")
        rest = rest[1:]
        if not rest:
            raise ParseError("SELECT DISTINCT with no columns", select_body[0][2])
    select_elements.extend(_comma_elements(rest, "SELECT"))
    segments.append(ClauseSegment(ClauseKind.SELECT, tuple(select_elements)))

    if "from" in bodies:
        base, joins = _parse_from(bodies["from"])
        segments.append(ClauseSegment(ClauseKind.FROM, tuple(base)))
        if joins:
            segments.append(ClauseSegment(ClauseKind.JOIN, tuple(joins)))

    if "where" in bodies:
        segments.append(ClauseSegment(ClauseKind.WHERE, tuple(_conjuncts(bodies["where"]))))
    if "group by" in bodies:
        segments.append(
            ClauseSegment(ClauseKind.GROUP_BY, tuple(_comma_elements(bodies["group by"], "GROUP BY")))
        )
    if "having" in bodies:
        segments.append(ClauseSegment(ClauseKind.HAVING, tuple(_conjuncts(bodies["having"]))))
    if "order by" in bodies:
        segments.append(
            ClauseSegment(ClauseKind.ORDER_BY, tuple(_comma_elements(bodies["order by"], "ORDER BY")))
        )
    if "limit" in bodies:
        segments.append(ClauseSegment(ClauseKind.LIMIT, (render_tokens(bodies["limit"]),)))
    if other_tokens:
        segments.append(ClauseSegment(ClauseKind.OTHER, (render_tokens(other_tokens),)))

    return TokenizedQuery(candidate_id=candidate_id, segments=tuple(segments))


def tokenize_sql(sql_text: str, candidate_id: str = "") -> TokenizedQuery:
    """Tokenize and clause-segment one SELECT statement.

    Raises ParseError (with byte offset) for anything outside the supported
    subset or structurally malformed.
    """
    tokens = _fold(_lex(sql_text))
    while tokens and tokens[-1][1] == ";":
        tokens = tokens[:-1]
    if any(t[1] == ";" for t in tokens):
        off = next(t[2] for t in tokens if t[1] == ";")
        raise ParseError("multiple statements are not supported", off)
    return _segment(tokens, candidate_id)


def to_sql(query: TokenizedQuery) -> str:
    """Re-serialize a tokenized query into its normal-form SQL text."""
    parts: list[str] = []
    for seg in query.segments:
        if seg.kind == ClauseKind.SELECT:
            if seg.elements and seg.elements[0] == "distinct":
                parts.append("select distinct " + ", ".join(seg.elements[1:]))
            else:
                parts.append("select " + ", ".join(seg.elements))
        elif seg.kind == ClauseKind.FROM:
            parts.append("from " + ", ".join(seg.elements))
        elif seg.kind == ClauseKind.JOIN:
            parts.append(" ".join(seg.elements))
        elif seg.kind == ClauseKind.WHERE:
            parts.append("where " + " and ".join(seg.elements))
        elif seg.kind == ClauseKind.GROUP_BY:
            parts.append("group by " + ", ".join(seg.elements))
        elif seg.kind == ClauseKind.HAVING:
            parts.append("having " + " and ".join(seg.elements))
        elif seg.kind == ClauseKind.ORDER_BY:
            parts.append("order by " + ", ".join(seg.elements))
        elif seg.kind == ClauseKind.LIMIT:
            parts.append("limit " + seg.elements[0])
        elif seg.kind == ClauseKind.OTHER:
            parts.append(" ".join(seg.elements))
    return " ".join(parts)


def mask_literals(element: str) -> str:
    """Replace every string/number literal in an element with a placeholder."""
    tokens = _fold(_lex(element))
    masked = [
        (kind, _MASK if kind in LITERAL_KINDS else text, off)
        for kind, text, off in tokens
    ]
    return render_tokens(masked)


def exact_set_match(predicted: TokenizedQuery, gold: TokenizedQuery) -> bool:
    """Clause-by-clause set equality with literal values masked."""
    for kind in CLAUSE_ORDER:
        pred_set = {mask_literals(e) for e in predicted.elements(kind)}
        gold_set = {mask_literals(e) for e in gold.elements(kind)}
        if pred_set != gold_set:
            return False
    return True
