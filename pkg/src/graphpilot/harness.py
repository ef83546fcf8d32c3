"""Benchmark harness: offline build per app, online planning per task, metrics."""

from __future__ import annotations

import csv
import io
import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .app_model import AppSpec, PageRegistry, apply_action, load_app_spec, render_html
from .errors import ConfigError, GeneratorError, GraphPilotError, ParseError, ResponseParseError
from .explorer import explore
from .generator import Goal, OracleGenerator, PromptReader, ScriptedGenerator, SequenceGenerator, StepwiseOracle
from .grammar import ActionSequence, Step, sequence_from_json, sequence_to_json
from .kg import Annotator, KnowledgeGraph, StubAnnotator, build_kg
from .planner import PlanSession, plan
from .prompts import stepwise_prompt

log = logging.getLogger(__name__)

BACKENDS = ("oracle", "scripted", "reader", "noisy", "http")


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    app_id: str
    description: str
    oracle_goal: Goal
    ground_truth: ActionSequence
    script: tuple[str, ...] = ()

    @property
    def required_actions(self) -> int:
        return self.ground_truth.action_count

    @classmethod
    def from_json(cls, d: dict) -> TaskSpec:
        try:
            return cls(d["task_id"], d["app_id"], d["description"], Goal.from_json(d["oracle_goal"]),
                       sequence_from_json(d["ground_truth"]), tuple(d.get("script", ())))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed task: {e}") from e

    def to_json(self) -> dict:
        d = {"task_id": self.task_id, "app_id": self.app_id, "description": self.description,
             "oracle_goal": self.oracle_goal.to_json(),
             "ground_truth": sequence_to_json(self.ground_truth)}
        if self.script:
            d["script"] = list(self.script)
        return d


def check_task(app: AppSpec, task: TaskSpec) -> list[str]:
    """Ground truth must end in stop and replay on the simulator from start_page."""
    problems = []
    steps = task.ground_truth.steps
    if not steps or steps[-1].action.action_type != "stop":
        problems.append("ground truth does not end in stop")
    page = app.start_page
    for t, st in enumerate(steps, 1):
        if st.page != page:
            problems.append(f"step {t} declared on {st.page}, simulator is on {page}")
            break
        try:
            page = apply_action(app, page, st.action)
        except (GraphPilotError, ValueError) as e:
            problems.append(f"step {t}: {e}")
            break
        if page != st.next_page:
            problems.append(f"step {t} declares {st.next_page}, simulator reached {page}")
            break
    return problems


def exact_match(candidate: ActionSequence | None, truth: ActionSequence) -> bool:
    if candidate is None or len(candidate) != len(truth):
        return False
    return all(
        a.page == b.page and a.next_page == b.next_page
        and a.action.action_type == b.action.action_type
        and a.action.element_id == b.action.element_id
        and a.action.text_payload == b.action.text_payload
        for a, b in zip(candidate.steps, truth.steps)
    )


def load_suite(suite_dir: str | Path) -> tuple[dict[str, AppSpec], list[TaskSpec]]:
    root = Path(suite_dir)
    if not (root / "apps").is_dir() or not (root / "tasks").is_dir():
        raise ConfigError(f"{root} needs apps/ and tasks/ subdirectories")
    apps = {}
    for path in sorted((root / "apps").glob("*.json")):
        app = load_app_spec(path.read_text(encoding="utf-8"))
        if app.app_id in apps:
            raise ConfigError(f"duplicate app id {app.app_id!r} in {path}")
        apps[app.app_id] = app
    tasks = []
    for path in sorted((root / "tasks").glob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: {e}") from e
        tasks += [TaskSpec.from_json(d) for d in (doc if isinstance(doc, list) else [doc])]
    tasks.sort(key=lambda t: t.task_id)
    return apps, tasks


def offline_build(app: AppSpec, annotator: Annotator | None = None,
                  max_depth: int = 200, max_episodes: int = 200) -> KnowledgeGraph:
    """Explore and build the KG; page ids minted during the build must match
    the app's declared ids, otherwise plans could not be executed or scored."""
    history = explore(app, max_depth, max_episodes)
    registry = PageRegistry()
    kg = build_kg(history, annotator or StubAnnotator(), app=app, registry=registry)
    for st in history.steps():
        for doc in (st.html_before, st.html_after):
            minted = registry.ids[doc.digest]
            if minted != doc.source_page:
                raise ConfigError(
                    f"app {app.app_id}: page {doc.source_page} was identified as {minted}; "
                    "declare pages as p0, p1, ... in exploration order (see canonicalize_app)")
    return kg


@dataclass
class BenchConfig:
    backend: str = "oracle"
    seed: int = 0
    noise: float = 0.1
    max_iterations: int = 3
    max_html_requests: int = 2
    no_transition_rules: bool = False
    no_validator: bool = False
    no_html_request: bool = False
    jobs: int = 1
    http: object | None = None  # llm_http.HttpConfig
    api_key: str | None = None

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown backend {self.backend!r}; choose from {', '.join(BACKENDS)}")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")


@dataclass(frozen=True)
class TaskRow:
    task_id: str
    app_id: str
    success: bool
    queries: int
    latency: float
    sequence_length: int
    required_actions: int
    html_requests: int = 0
    validation_rounds: int = 0


def _percentile(values: list[float], q: float) -> float:
    xs = sorted(values)
    pos = (len(xs) - 1) * q / 100
    lo = int(pos)
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (xs[hi] - xs[lo]) * (pos - lo)


@dataclass
class BenchReport:
    rows: list[TaskRow] = field(default_factory=list)
    mode: str = "one-shot"

    @property
    def tcr(self) -> float | None:
        if not self.rows:
            return None
        return 100.0 * sum(r.success for r in self.rows) / len(self.rows)

    @property
    def mean_queries(self) -> float | None:
        return sum(r.queries for r in self.rows) / len(self.rows) if self.rows else None

    @property
    def mean_latency(self) -> float | None:
        return sum(r.latency for r in self.rows) / len(self.rows) if self.rows else None

    def latency_percentiles(self) -> dict[str, float]:
        lat = [r.latency for r in self.rows]
        return {f"p{q}": _percentile(lat, q) for q in (50, 90, 99)} if lat else {}

    def tcr_by_action_count(self) -> dict[int, dict]:
        buckets: dict[int, list[TaskRow]] = {}
        for r in self.rows:
            buckets.setdefault(r.required_actions, []).append(r)
        return {n: {"tasks": len(rs), "successes": sum(r.success for r in rs),
                    "tcr": 100.0 * sum(r.success for r in rs) / len(rs)}
                for n, rs in sorted(buckets.items())}

    def aggregates(self) -> dict[str, float | None]:
        agg = {"tasks": len(self.rows), "tcr": self.tcr, "mean_queries": self.mean_queries,
               "mean_latency": self.mean_latency}
        agg.update(self.latency_percentiles())
        return agg


def _make_generator(cfg: BenchConfig, task: TaskSpec, kg: KnowledgeGraph, app: AppSpec,
                    stepwise: bool = False) -> SequenceGenerator:
    if cfg.backend == "scripted":
        if not task.script:
            raise ConfigError(f"task {task.task_id} has no script for the scripted backend")
        return ScriptedGenerator(list(task.script))
    if cfg.backend == "http":
        from .llm_http import ChatClient, HttpConfig, HttpGenerator
        return HttpGenerator(ChatClient(cfg.http or HttpConfig(), cfg.api_key))
    if stepwise:
        if cfg.backend != "oracle":
            raise ConfigError(f"stepwise mode supports oracle, scripted and http backends, not {cfg.backend}")
        return StepwiseOracle(app, task.oracle_goal)
    if cfg.backend == "oracle":
        return OracleGenerator(kg, task.oracle_goal, app.start_page)
    rng = random.Random(f"{cfg.seed}:{task.task_id}")
    noise = cfg.noise if cfg.backend == "noisy" else 0.0
    return PromptReader(task.oracle_goal, noise=noise, rng=rng)


def _check_inputs(apps, tasks):
    for t in tasks:
        if t.app_id not in apps:
            raise ConfigError(f"task {t.task_id} refers to unknown app {t.app_id!r}")
        problems = check_task(apps[t.app_id], t)
        if problems:
            raise ConfigError(f"task {t.task_id}: {'; '.join(problems)}")


def _run_parallel(fn, tasks, jobs):
    if jobs == 1:
        rows = [fn(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(fn, tasks))
    return sorted(rows, key=lambda r: r.task_id)


def run_bench(apps: dict[str, AppSpec], tasks: list[TaskSpec], config: BenchConfig | None = None,
              annotator: Annotator | None = None,
              kgs: dict[str, KnowledgeGraph] | None = None) -> BenchReport:
    cfg = config or BenchConfig()
    _check_inputs(apps, tasks)
    kgs = dict(kgs or {})
    for app_id in sorted({t.app_id for t in tasks}):
        if app_id not in kgs:
            kgs[app_id] = offline_build(apps[app_id], annotator)

    def run_one(task: TaskSpec) -> TaskRow:
        app, kg = apps[task.app_id], kgs[task.app_id]
        gen = _make_generator(cfg, task, kg, app)
        outcome = plan(PlanSession(
            task.description, kg, app.start_page, gen,
            max_iterations=cfg.max_iterations, max_html_requests=cfg.max_html_requests, app=app,
            use_validator=not cfg.no_validator, allow_html_requests=not cfg.no_html_request,
            include_transitions=not cfg.no_transition_rules,
        ))
        ok = outcome.success and exact_match(outcome.sequence, task.ground_truth)
        log.debug("%s: success=%s %s", task.task_id, ok, outcome.reason)
        m = outcome.metrics
        return TaskRow(task.task_id, task.app_id, ok, m.queries, m.latency,
                       len(outcome.sequence) if outcome.sequence else 0, task.required_actions,
                       m.html_requests, m.validation_rounds)

    return BenchReport(_run_parallel(run_one, tasks, cfg.jobs), "one-shot")


def run_stepwise_baseline(apps: dict[str, AppSpec], tasks: list[TaskSpec],
                          config: BenchConfig | None = None) -> BenchReport:
    """One query per action, showing the model only the task and current HTML."""
    cfg = config or BenchConfig()
    _check_inputs(apps, tasks)

    def run_one(task: TaskSpec) -> TaskRow:
        app = apps[task.app_id]
        gen = _make_generator(cfg, task, None, app, stepwise=True)
        page, steps = app.start_page, []
        cap = 2 * len(task.ground_truth)
        while len(steps) < cap:
            try:
                action = gen.generate_action(stepwise_prompt(task.description, render_html(app, page)), page)
                nxt = apply_action(app, page, action)
            except (GeneratorError, ResponseParseError, GraphPilotError, ValueError) as e:
                log.debug("%s: stepwise run aborted: %s", task.task_id, e)
                break
            steps.append(Step(page, action, nxt))
            page = nxt
            if action.action_type == "stop":
                break
        seq = ActionSequence(tuple(steps))
        finished = bool(steps) and steps[-1].action.action_type == "stop"
        ok = finished and exact_match(seq, task.ground_truth)
        return TaskRow(task.task_id, task.app_id, ok, gen.meter.query_count, gen.meter.total_latency,
                       len(steps), task.required_actions)

    return BenchReport(_run_parallel(run_one, tasks, cfg.jobs), "stepwise")


def reduction(baseline: float, ours: float) -> float:
    """Percent reduction of `ours` relative to `baseline`."""
    return 100.0 * (baseline - ours) / baseline


CSV_COLUMNS = ["task_id", "app_id", "success", "queries", "latency_s", "sequence_length",
               "required_actions", "html_requests", "validation_rounds"]


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def report_emit(report: BenchReport, fmt: str = "csv") -> str:
    if fmt == "json":
        doc = {
            "mode": report.mode,
            "rows": [asdict(r) for r in report.rows],
            "aggregates": {k: ("n/a" if v is None else v) for k, v in report.aggregates().items()},
            "tcr_by_action_count": {str(k): v for k, v in report.tcr_by_action_count().items()},
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "csv":
        raise ConfigError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        w.writerow([r.task_id, r.app_id, int(r.success), r.queries, _fmt(r.latency), r.sequence_length,
                    r.required_actions, r.html_requests, r.validation_rounds])
    if report.rows:
        for key, val in report.aggregates().items():
            w.writerow([f"#{key}", _fmt(val)])
        for n, b in report.tcr_by_action_count().items():
            w.writerow([f"#tcr_actions_{n}", _fmt(b["tcr"])])
    return buf.getvalue()


def parse_report_csv(text: str) -> tuple[BenchReport, dict[str, str]]:
    """Rows plus the footer values as written (strings)."""
    rows, footer = [], {}
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != CSV_COLUMNS:
        raise ParseError(f"unexpected CSV header: {header}")
    for rec in reader:
        if rec and rec[0].startswith("#"):
            footer[rec[0][1:]] = rec[1]
            continue
        rows.append(TaskRow(rec[0], rec[1], rec[2] == "1", int(rec[3]), float(rec[4]), int(rec[5]),
                            int(rec[6]), int(rec[7]), int(rec[8])))
    return BenchReport(rows), footer
