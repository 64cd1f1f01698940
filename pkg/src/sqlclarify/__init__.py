"""Interactive disambiguation of natural-language-to-SQL candidate queries.

Given a weighted set of candidate SQL queries for one question, the package
extracts the structural choices on which the candidates disagree, selects the
question with the highest expected information gain, and narrows the
distribution with each user answer until one candidate is confident enough
to return.
"""

from .candidates import (
    CandidateDistribution,
    WeightedCandidate,
    entropy,
    entropy_of,
    filter_and_renormalize,
    from_weighted,
    normalize,
    top_candidate,
)
from .errors import (
    AllCandidatesUnparseable,
    AllZeroWeights,
    BackendProtocolError,
    BackendUnavailable,
    EmptyFilterResult,
    ExecutionError,
    FormatError,
    InconsistentAnswer,
    InconsistentAssignment,
    NegativeWeight,
    NoVariables,
    ParseError,
    SessionFailed,
    SqlClarifyError,
    ValidationError,
    VariableNotOnPath,
)
from .evaluation import (
    AblationReport,
    EvalConfig,
    OracleUser,
    ambiguity_filter,
    compare_modes,
    evaluate_instance,
    run_ablation,
)
from .execution import SqliteBackend, execution_match, results_equal
from .fixtures import (
    ColumnDef,
    FixtureInstance,
    SchemaDef,
    TableDef,
    bundled_path,
    dumps_fixtures,
    instance_distribution,
    instance_to_dict,
    load_bundled,
    load_fixtures,
    loads_fixtures,
)
from .generation import FixtureBackend, GenerationBackend, generate_candidates
from .llm import LlmBackend, ReplayBackend, llm_adapter
from .questions import Answer, ClarificationQuestion, NONE_OF_THESE, render_question
from .scoring import (
    SelectionStrategy,
    StrategyKind,
    VariableScore,
    conditional_entropy,
    expected_information_gain,
    fast_path_score,
    score_all,
    select_variable,
    variable_marginal,
)
from .session import (
    Failed,
    Finished,
    InteractionMode,
    QuestionIssued,
    SessionConfig,
    SessionState,
    SessionStatus,
    SessionTranscript,
    StopReason,
    TurnRecord,
    apply_answer,
    run_session,
    step,
)
from .synthetic import (
    SyntheticInstance,
    dependent_instance,
    mode_trial,
    strategy_table,
    strategy_trial,
    synthetic_instance,
    turns_to_resolution,
)
from .tokenizer import (
    ClauseKind,
    TokenizedQuery,
    exact_set_match,
    mask_literals,
    to_sql,
    tokenize_sql,
)
from .variables import (
    UNDEFINED,
    BranchingTree,
    DecisionVariable,
    VariableCategory,
    build_branching_tree,
    duplicate_collapse,
    extract_decision_variables,
    slot_value,
)

__version__ = "0.1.0"

__all__ = [
    "AblationReport",
    "AllCandidatesUnparseable",
    "AllZeroWeights",
    "Answer",
    "BackendProtocolError",
    "BackendUnavailable",
    "BranchingTree",
    "CandidateDistribution",
    "ClarificationQuestion",
    "ClauseKind",
    "ColumnDef",
    "DecisionVariable",
    "EmptyFilterResult",
    "EvalConfig",
    "ExecutionError",
    "Failed",
    "Finished",
    "FixtureBackend",
    "FixtureInstance",
    "FormatError",
    "GenerationBackend",
    "InconsistentAnswer",
    "InconsistentAssignment",
    "InteractionMode",
    "LlmBackend",
    "NegativeWeight",
    "NONE_OF_THESE",
    "NoVariables",
    "OracleUser",
    "ParseError",
    "QuestionIssued",
    "ReplayBackend",
    "SchemaDef",
    "SelectionStrategy",
    "SessionConfig",
    "SessionFailed",
    "SessionState",
    "SessionStatus",
    "SessionTranscript",
    "SqlClarifyError",
    "SqliteBackend",
    "StopReason",
    "StrategyKind",
    "SyntheticInstance",
    "TableDef",
    "TokenizedQuery",
    "TurnRecord",
    "UNDEFINED",
    "ValidationError",
    "VariableCategory",
    "VariableNotOnPath",
    "VariableScore",
    "WeightedCandidate",
    "ambiguity_filter",
    "apply_answer",
    "build_branching_tree",
    "bundled_path",
    "compare_modes",
    "conditional_entropy",
    "dependent_instance",
    "dumps_fixtures",
    "duplicate_collapse",
    "entropy",
    "entropy_of",
    "evaluate_instance",
    "exact_set_match",
    "execution_match",
    "expected_information_gain",
    "extract_decision_variables",
    "fast_path_score",
    "filter_and_renormalize",
    "from_weighted",
    "generate_candidates",
    "instance_distribution",
    "instance_to_dict",
    "llm_adapter",
    "load_bundled",
    "load_fixtures",
    "loads_fixtures",
    "mask_literals",
    "mode_trial",
    "normalize",
    "render_question",
    "results_equal",
    "run_ablation",
    "run_session",
    "score_all",
    "select_variable",
    "slot_value",
    "step",
    "strategy_table",
    "strategy_trial",
    "synthetic_instance",
    "to_sql",
    "tokenize_sql",
    "top_candidate",
    "turns_to_resolution",
    "variable_marginal",
]
