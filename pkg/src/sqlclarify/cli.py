"""Command-line entry points.

Subcommands:
  interactive  drive one clarification session at the terminal
  explain      print the per-variable scoring table for an instance
  eval         batch-evaluate strategies (or interaction modes) over a corpus
  serve        run the HTTP session service

Exit codes: 0 success, 2 source errors (bad fixture, unknown instance,
unreachable backend), 3 session ended FAILED.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .candidates import CandidateDistribution, entropy
from .errors import (
    InconsistentAnswer,
    SqlClarifyError,
    ValidationError,
)
from .evaluation import (
    AblationReport,
    EvalConfig,
    ambiguity_filter,
    compare_modes,
    run_ablation,
)
from .fixtures import FixtureInstance, instance_distribution, load_bundled, load_fixtures
from .generation import generate_candidates
from .llm import LlmBackend
from .questions import Answer
from .scoring import SelectionStrategy, StrategyKind, score_all
from .session import (
    InteractionMode,
    SessionConfig,
    SessionState,
    SessionStatus,
    step,
)
from .session import apply_answer as session_apply_answer
from .variables import extract_decision_variables

STRATEGY_CHOICES = {
    "random": StrategyKind.RANDOM,
    "maxprob": StrategyKind.MAX_PROBABILITY,
    "minprob": StrategyKind.MIN_PROBABILITY,
    "ig": StrategyKind.INFO_GAIN_UNIFORM,
    "eig": StrategyKind.EXPECTED_INFO_GAIN,
}

MODE_CHOICES = {
    "single": InteractionMode.SINGLE_TURN,
    "multi": InteractionMode.MULTI_TURN,
}

EXIT_OK = 0
EXIT_SOURCE = 2
EXIT_FAILED_SESSION = 3

LLM_GENERATION_N = 10


class SourceError(Exception):
    """Anything that prevents building a candidate distribution."""


def _load_instances(args) -> list[FixtureInstance]:
    if args.fixture is not None:
        try:
            return load_fixtures(args.fixture)
        except (OSError, SqlClarifyError) as exc:
            raise SourceError(f"cannot load fixture {args.fixture!r}: {exc}")
    try:
        return load_bundled("fig3.json") + load_bundled("corpus.json")
    except (OSError, SqlClarifyError) as exc:
        raise SourceError(f"cannot load bundled fixtures: {exc}")


def _pick_instance(instances: list[FixtureInstance], instance_id: str | None) -> FixtureInstance:
    if instance_id is None:
        return instances[0]
    for inst in instances:
        if inst.instance_id == instance_id:
            return inst
    known = ", ".join(inst.instance_id for inst in instances[:8])
    raise SourceError(f"unknown instance {instance_id!r} (known: {known}, ...)")


def _build_distribution(args, instance: FixtureInstance) -> CandidateDistribution:
    if args.llm_endpoint is not None:
        backend = LlmBackend(endpoint=args.llm_endpoint, model_name=args.model)
        try:
            return generate_candidates(
                backend, instance.question, instance.schema, n=LLM_GENERATION_N
            )
        except SqlClarifyError as exc:
            raise SourceError(f"candidate generation failed: {exc}")
    try:
        return instance_distribution(instance)
    except SqlClarifyError as exc:
        raise SourceError(f"bad instance {instance.instance_id!r}: {exc}")


def _session_config(args) -> SessionConfig:
    return SessionConfig(
        strategy=SelectionStrategy(kind=STRATEGY_CHOICES[args.strategy], seed=args.seed),
        confidence_threshold=args.tau,
        max_turns=args.max_turns,
        mode=MODE_CHOICES[args.mode],
    )


def _print_candidates(dist: CandidateDistribution, out) -> None:
    print(f"question: {dist.question}", file=out)
    print(f"entropy: {entropy(dist):.3f} bits", file=out)
    for i, cand in enumerate(dist):
        print(f"  [{i + 1}] p={cand.probability:.3f}  {cand.sql_text}", file=out)


def cmd_interactive(args) -> int:
    instances = _load_instances(args)
    instance = _pick_instance(instances, args.instance)
    dist = _build_distribution(args, instance)

    out = sys.stdout
    _print_candidates(dist, out)

    state = SessionState(config=_session_config(args), distribution=dist)
    while True:
        outcome = step(state)
        if state.status == SessionStatus.FINISHED:
            break
        question = outcome.question
        print(f"\nQ{state.turns_used + 1}: {question.text}", file=out)
        for i, (_value, display) in enumerate(question.options):
            print(f"  {i + 1}. {display}", file=out)
        line = sys.stdin.readline()
        if not line:
            print("input ended before the session finished", file=sys.stderr)
            return 1
        try:
            index = int(line.strip())
            if not 1 <= index <= len(question.options):
                raise IndexError(index)
            value = question.options[index - 1][0]
        except (ValueError, IndexError):
            print(f"invalid selection {line.strip()!r}", file=sys.stderr)
            return 1
        try:
            session_apply_answer(
                state, Answer(variable_id=question.variable_id, chosen=value)
            )
        except InconsistentAnswer:
            print("\nanswer is inconsistent with every candidate; session FAILED", file=out)
            return EXIT_FAILED_SESSION
        turn = state.transcript.turns[-1]
        print(
            f"  -> entropy {turn.post_entropy:.3f} bits, "
            f"{turn.survivor_count} candidate(s) remain",
            file=out,
        )

    print(f"\nfinal SQL: {state.final.sql_text}", file=out)
    print(f"stop reason: {state.stop_reason.value}", file=out)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    transcript_path = out_dir / f"transcript_{instance.instance_id}.json"
    transcript_path.write_text(
        json.dumps(state.transcript.to_dict(), indent=2, sort_keys=True) + "\n"
    )
    print(f"transcript: {transcript_path}", file=out)
    return EXIT_OK


def _format_marginal(marginal: dict) -> str:
    return "; ".join(f"{value}={p:.3f}" for value, p in marginal.items())


def cmd_explain(args) -> int:
    instances = _load_instances(args)
    instance = _pick_instance(instances, args.instance)
    dist = _build_distribution(args, instance)
    variables = extract_decision_variables(dist)

    out = sys.stdout
    print(f"instance: {instance.instance_id}", file=out)
    print(f"H(Y) = {entropy(dist):.3f} bits over {len(dist)} candidate(s)", file=out)
    if not variables:
        print("no decision variables (nothing separates the candidates)", file=out)
        return EXIT_OK

    scores = score_all(dist, variables)
    header = f"{'variable':<24} {'H(Y|X)':>8} {'EIG':>8} {'fast-path':>10}  marginal"
    print(header, file=out)
    for score in scores:
        fast = f"{score.fast_path_eig:.3f}" if score.fast_path_eig is not None else "-"
        print(
            f"{score.variable_id:<24} {score.conditional_entropy:>8.3f} "
            f"{score.eig:>8.3f} {fast:>10}  {_format_marginal(score.marginal)}",
            file=out,
        )
    return EXIT_OK


def _write_report(report: AblationReport, out_dir: Path, stem: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{stem}.json"
    tsv_path = out_dir / f"{stem}.tsv"
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    tsv_path.write_text(report.to_table() + "\n")
    return [json_path, tsv_path]


def cmd_eval(args) -> int:
    instances = _load_instances(args)
    total = len(instances)
    if args.ambiguity_threshold is not None:
        instances = ambiguity_filter(instances, threshold=args.ambiguity_threshold)
        print(
            f"ambiguity filter: kept {len(instances)} of {total} instances "
            f"(top-probability threshold {args.ambiguity_threshold})"
        )
    if not instances:
        print("no instances to evaluate", file=sys.stderr)
        return EXIT_SOURCE

    config = EvalConfig(
        confidence_threshold=args.tau,
        max_turns=args.max_turns,
        mode=MODE_CHOICES[args.mode],
        seed=args.seed,
    )
    out_dir = Path(args.out)
    if args.modes:
        report = compare_modes(instances, config)
        paths = _write_report(report, out_dir, "modes_report")
    else:
        chosen = args.strategy or list(STRATEGY_CHOICES)
        kinds = [STRATEGY_CHOICES[name] for name in chosen]
        report = run_ablation(instances, kinds, config)
        paths = _write_report(report, out_dir, "ablation_report")

    print(report.to_table())
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    bind = args.bind or os.environ.get("SERVICE_BIND", "127.0.0.1:8000")
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise SourceError(f"bad bind address {bind!r}; expected HOST:PORT")
    app = create_app(fixture_path=args.fixture, default_seed=args.seed)
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return EXIT_OK


def _add_source_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--fixture", help="path to a fixture JSON file")
    parser.add_argument("--llm-endpoint", help="chat-completions URL for live generation")
    parser.add_argument("--model", default="", help="model name for --llm-endpoint")
    parser.add_argument("--instance", help="instance id within the fixture")


def _add_session_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--strategy", choices=sorted(STRATEGY_CHOICES), default="eig",
        help="question selection strategy",
    )
    parser.add_argument("--tau", type=float, default=0.9, help="confidence threshold")
    parser.add_argument("--max-turns", type=int, default=5, help="question budget")
    parser.add_argument(
        "--mode", choices=sorted(MODE_CHOICES), default="multi",
        help="interaction mode",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for random choices")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqlclarify",
        description="interactive disambiguation of SQL candidate queries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_int = sub.add_parser("interactive", help="answer questions at the terminal")
    _add_source_flags(p_int)
    _add_session_flags(p_int)
    p_int.add_argument("--out", default=".", help="directory for the transcript file")
    p_int.set_defaults(func=cmd_interactive)

    p_exp = sub.add_parser("explain", help="print the variable scoring table")
    _add_source_flags(p_exp)
    p_exp.set_defaults(func=cmd_explain)

    p_eval = sub.add_parser("eval", help="batch-evaluate strategies over a corpus")
    p_eval.add_argument("--fixture", help="path to a fixture JSON corpus")
    p_eval.add_argument(
        "--strategy", action="append", choices=sorted(STRATEGY_CHOICES),
        help="strategy to evaluate (repeatable; default: all)",
    )
    p_eval.add_argument("--tau", type=float, default=0.9)
    p_eval.add_argument("--max-turns", type=int, default=5)
    p_eval.add_argument("--mode", choices=sorted(MODE_CHOICES), default="multi")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--out", default=".", help="directory for report files")
    p_eval.add_argument(
        "--modes", action="store_true",
        help="compare single- vs multi-turn instead of strategies",
    )
    p_eval.add_argument(
        "--ambiguity-threshold", type=float, default=None,
        help="keep only instances whose top candidate probability is below this",
    )
    p_eval.set_defaults(func=cmd_eval)

    p_srv = sub.add_parser("serve", help="run the HTTP session service")
    p_srv.add_argument("--fixture", help="path to a fixture JSON corpus")
    p_srv.add_argument("--bind", help="HOST:PORT (default from SERVICE_BIND)")
    p_srv.add_argument("--seed", type=int, default=0)
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOURCE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOURCE


if __name__ == "__main__":
    sys.exit(main())
