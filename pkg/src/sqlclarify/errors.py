"""Exception types shared across the package."""


class SqlClarifyError(Exception):
    """Base class for all package-specific errors."""


# --- candidate distributions ---------------------------------------------


class AllZeroWeights(SqlClarifyError):
    """Every supplied weight is zero; no distribution can be formed."""


class NegativeWeight(SqlClarifyError):
    """A candidate weight is negative."""


class EmptyFilterResult(SqlClarifyError):
    """A filter predicate removed every candidate from a distribution."""


# --- SQL analysis ----------------------------------------------------------


class ParseError(SqlClarifyError):
    """Malformed SQL. Carries the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class InconsistentAssignment(SqlClarifyError):
    """Two distinct candidates share identical assignments on every
    decision variable, i.e. they are duplicates that were never collapsed."""


# --- scoring ----------------------------------------------------------------


class VariableNotOnPath(SqlClarifyError):
    """The requested variable does not label any node on the path from the
    root to the top candidate's leaf."""


class NoVariables(SqlClarifyError):
    """Variable selection was invoked with an empty variable list."""


# --- clarification sessions -------------------------------------------------


class InconsistentAnswer(SqlClarifyError):
    """An answer eliminated every candidate; the session cannot continue."""


class SessionFailed(SqlClarifyError):
    """A session ended in the FAILED state. Carries the transcript."""

    def __init__(self, message: str, transcript=None):
        super().__init__(message)
        self.transcript = transcript


# --- fixtures and generation -------------------------------------------------


class FormatError(SqlClarifyError):
    """A fixture document is not structurally well-formed."""


class ValidationError(SqlClarifyError):
    """A fixture instance violates an invariant. Carries instance and field."""

    def __init__(self, message: str, instance_id: str = "?", field: str = "?"):
        super().__init__(f"{message} (instance={instance_id}, field={field})")
        self.instance_id = instance_id
        self.field = field


class BackendUnavailable(SqlClarifyError):
    """The candidate-generation backend could not be reached."""


class BackendProtocolError(SqlClarifyError):
    """The candidate-generation backend returned a malformed response."""


class AllCandidatesUnparseable(SqlClarifyError):
    """Every SQL text returned by a backend failed to parse."""


# --- evaluation ----------------------------------------------------------------


class ExecutionError(SqlClarifyError):
    """A query failed to execute. ``side`` is "pred" or "gold"."""

    def __init__(self, side: str, message: str):
        super().__init__(f"[{side}] {message}")
        self.side = side
