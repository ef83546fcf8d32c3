"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 the command ran but
something failed (a bench task, a plan, a validation).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .app_model import load_app_spec
from .errors import ConfigError, GraphPilotError
from .explorer import explore, history_from_json, history_to_json
from .generator import Goal, OracleGenerator, ScriptedGenerator
from .grammar import sequence_from_json, sequence_to_json
from .harness import BACKENDS, BenchConfig, load_suite, report_emit, run_bench, run_stepwise_baseline
from .kg import StubAnnotator, build_kg, deserialize_kg, export_dot, serialize_kg
from .planner import PlanSession, plan
from .validator import validate

EXIT_OK, EXIT_USAGE, EXIT_FAILURES = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(str(e)) from e


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _http_opts(p):
    p.add_argument("--endpoint", help="chat-completions URL for the http backend")
    p.add_argument("--model", help="model name for the http backend")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--max-retries", type=int, default=3)


def _http_config(args):
    from .llm_http import DEFAULT_ENDPOINT, DEFAULT_MODEL, HttpConfig
    return HttpConfig(args.endpoint or DEFAULT_ENDPOINT, args.model or DEFAULT_MODEL,
                      args.timeout, args.max_retries)


def _parse_goal(text: str) -> Goal:
    parts = text.split(":", 2)
    try:
        return Goal(parts[0], int(parts[1]) if len(parts) > 1 else 0, parts[2] if len(parts) > 2 else None)
    except ValueError as e:
        raise ConfigError(f"--goal must look like p2:1 or p2:1:payload, got {text!r}") from e


def cmd_explore(args) -> int:
    app = load_app_spec(_read(args.app))
    _write(history_to_json(explore(app, args.max_depth, args.max_episodes)), args.output)
    return EXIT_OK


def cmd_build_kg(args) -> int:
    history = history_from_json(_read(args.history))
    app = load_app_spec(_read(args.app)) if args.app else None
    if args.annotator == "http":
        from .llm_http import ChatClient, HttpAnnotator
        annotator = HttpAnnotator(ChatClient(_http_config(args)))
    else:
        annotator = StubAnnotator()
    _write(serialize_kg(build_kg(history, annotator, app=app)), args.output)
    return EXIT_OK


def cmd_plan(args) -> int:
    kg = deserialize_kg(_read(args.kg))
    app = load_app_spec(_read(args.app)) if args.app else None
    if args.backend == "oracle":
        if not args.goal:
            raise ConfigError("the oracle backend needs --goal")
        gen = OracleGenerator(kg, _parse_goal(args.goal), args.start)
    elif args.backend == "scripted":
        if not args.script:
            raise ConfigError("the scripted backend needs --script (JSON list of responses)")
        gen = ScriptedGenerator(json.loads(_read(args.script)))
    else:
        from .llm_http import ChatClient, HttpGenerator
        gen = HttpGenerator(ChatClient(_http_config(args)))
    outcome = plan(PlanSession(args.task, kg, args.start, gen, max_iterations=args.max_iters,
                               max_html_requests=args.max_html, app=app))
    doc = {
        "success": outcome.success,
        "sequence": sequence_to_json(outcome.sequence) if outcome.sequence else None,
        "reason": outcome.reason,
        "metrics": asdict(outcome.metrics),
        "last_report": json.loads(outcome.last_report.to_json()),
        "events": outcome.events,
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK if outcome.success else EXIT_FAILURES


def cmd_validate(args) -> int:
    kg = deserialize_kg(_read(args.kg))
    try:
        seq = sequence_from_json(json.loads(_read(args.sequence)))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{args.sequence}: {e}") from e
    start = args.start or (seq.steps[0].page if seq.steps else "p0")
    report = validate(seq, kg, start)
    print(report.to_json())
    return EXIT_OK if report.ok else EXIT_FAILURES


def cmd_bench(args) -> int:
    apps, tasks = load_suite(args.suite)
    cfg = BenchConfig(backend=args.backend, seed=args.seed, noise=args.noise, max_iterations=args.max_iters,
                      no_transition_rules=args.no_transition_rules, no_validator=args.no_validator,
                      no_html_request=args.no_html_request, jobs=args.jobs,
                      http=_http_config(args) if args.backend == "http" else None)
    report = run_stepwise_baseline(apps, tasks, cfg) if args.stepwise else run_bench(apps, tasks, cfg)
    _write(report_emit(report, args.format), args.output)
    tcr = report.tcr
    print(f"{report.mode}: {len(report.rows)} tasks, TCR "
          f"{'n/a' if tcr is None else f'{tcr:.1f}%'}, mean queries/task "
          f"{'n/a' if report.mean_queries is None else f'{report.mean_queries:.2f}'}", file=sys.stderr)
    return EXIT_FAILURES if any(not r.success for r in report.rows) else EXIT_OK


def cmd_export_dot(args) -> int:
    _write(export_dot(deserialize_kg(_read(args.kg))), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphpilot", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("explore", help="explore an app spec and write its history")
    p.add_argument("app")
    p.add_argument("-o", "--output")
    p.add_argument("--max-depth", type=int, default=50)
    p.add_argument("--max-episodes", type=int, default=50)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("build-kg", help="build a knowledge graph from a history file")
    p.add_argument("history")
    p.add_argument("-o", "--output")
    p.add_argument("--annotator", choices=("stub", "http"), default="stub")
    p.add_argument("--app", help="app spec to replay the history against first")
    _http_opts(p)
    p.set_defaults(func=cmd_build_kg)

    p = sub.add_parser("plan", help="plan one task against a knowledge graph")
    p.add_argument("kg")
    p.add_argument("--task", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--backend", choices=("oracle", "scripted", "http"), default="oracle")
    p.add_argument("--goal", help="oracle goal as page:element[:payload]")
    p.add_argument("--script", help="JSON list of raw responses for the scripted backend")
    p.add_argument("--app", help="app spec used to answer HTML requests")
    p.add_argument("--max-iters", type=int, default=3)
    p.add_argument("--max-html", type=int, default=2)
    _http_opts(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="validate an action sequence (JSON) against a KG")
    p.add_argument("kg")
    p.add_argument("sequence")
    p.add_argument("--start", help="current page (default: the sequence's first page)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run a task suite and write a report")
    p.add_argument("suite")
    p.add_argument("--backend", choices=BACKENDS, default="oracle")
    p.add_argument("--stepwise", action="store_true", help="one query per action baseline")
    p.add_argument("--no-transition-rules", action="store_true")
    p.add_argument("--no-validator", action="store_true")
    p.add_argument("--no-html-request", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.1, help="step corruption rate of the noisy backend")
    p.add_argument("--max-iters", type=int, default=3)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--output")
    _http_opts(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export-dot", help="render a KG as Graphviz DOT")
    p.add_argument("kg")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except GraphPilotError as e:
        print(f"graphpilot: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
