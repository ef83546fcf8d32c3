"""Online planning loop: prompt, generate, serve HTML requests, validate, refine."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .app_model import AppSpec, HtmlDoc, PageRef, apply_action, render_html
from .errors import ExecutionDivergence, GeneratorError, GraphPilotError, ResponseParseError
from .generator import SequenceGenerator
from .grammar import ActionSequence, HtmlRequest
from .kg import KnowledgeGraph
from .prompts import PromptContext, generate_prompt
from .validator import ValidationReport, validate

log = logging.getLogger(__name__)


@dataclass
class PlanSession:
    task_description: str
    kg: KnowledgeGraph
    p_curr: PageRef
    generator: SequenceGenerator
    max_iterations: int = 3
    max_html_requests: int = 2
    app: AppSpec | None = None  # serves HTML requests; without it they fail the iteration
    use_validator: bool = True
    allow_html_requests: bool = True
    include_transitions: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    @property
    def meter(self):
        return self.generator.meter


@dataclass
class PlanMetrics:
    queries: int = 0
    validation_rounds: int = 0
    html_requests: int = 0
    iterations: int = 0
    latency: float = 0.0


@dataclass
class PlanOutcome:
    sequence: ActionSequence | None
    metrics: PlanMetrics
    reason: str = ""
    last_report: ValidationReport = field(default_factory=ValidationReport)
    served_html: list[HtmlDoc] = field(default_factory=list)
    events: list[str] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.sequence is not None


def plan(session: PlanSession) -> PlanOutcome:
    s = session
    metrics = PlanMetrics()
    served: list[HtmlDoc] = []
    events: list[str] = []
    report = ValidationReport()
    prior = None
    notes: tuple[str, ...] = ()
    html: HtmlDoc | None = None

    def done(sequence, reason=""):
        metrics.queries = s.meter.query_count
        metrics.latency = s.meter.total_latency
        return PlanOutcome(sequence, metrics, reason, report, served, events)

    for k in range(1, s.max_iterations + 1):
        metrics.iterations = k
        html_budget = s.max_html_requests
        while True:
            ctx = PromptContext(
                s.task_description, s.kg, s.p_curr,
                invalid_steps=tuple((v.step, v.code.value, v.message) for v in report.violations),
                prior_draft=prior if report else None,
                requested_html=html,
                include_transitions=s.include_transitions,
                extra_notes=notes,
            )
            try:
                resp = s.generator.generate(generate_prompt(ctx))
            except (GeneratorError, ResponseParseError) as e:
                events.append(f"iteration {k}: {type(e).__name__}: {e}")
                notes = (f"Your previous answer could not be used: {e}",)
                resp = None
                break
            if isinstance(resp, HtmlRequest):
                if not s.allow_html_requests:
                    events.append(f"iteration {k}: HTML request for {resp.page} rejected (disabled)")
                    notes = ("HTML requests are unavailable; answer with a complete sequence.",)
                    resp = None
                    break
                if html_budget == 0 or s.app is None:
                    events.append(f"iteration {k}: HTML request for {resp.page} refused")
                    notes = ("No more HTML can be provided; answer with a complete sequence.",)
                    resp = None
                    break
                try:
                    html = render_html(s.app, resp.page)
                except GraphPilotError as e:
                    events.append(f"iteration {k}: cannot render {resp.page}: {e}")
                    notes = (f"Page {resp.page} does not exist.",)
                    resp = None
                    break
                html_budget -= 1
                metrics.html_requests += 1
                served.append(html)
                continue
            break
        if resp is None:
            continue
        draft = resp.sequence
        if not s.use_validator:
            return done(draft)
        report = validate(draft, s.kg, s.p_curr)
        metrics.validation_rounds += 1
        if report.ok:
            return done(draft)
        events.append(f"iteration {k}: invalid steps {report.invalid_steps}")
        prior, notes = draft, ()
    reason = events[-1] if events else "iterations exhausted"
    return done(None, f"max iterations ({s.max_iterations}) reached; last: {reason}")


def execute_plan(app: AppSpec, outcome: PlanOutcome | ActionSequence) -> PageRef:
    """Replay a successful plan on the simulator, checking every declared page."""
    seq = outcome.sequence if isinstance(outcome, PlanOutcome) else outcome
    if seq is None:
        raise ValueError("cannot execute a failed plan")
    current = seq.steps[0].page if seq.steps else app.start_page
    for t, st in enumerate(seq.steps, 1):
        if st.page != current:
            raise ExecutionDivergence(t, st.page, current)
        try:
            current = apply_action(app, current, st.action)
        except (GraphPilotError, ValueError) as e:
            raise ExecutionDivergence(t, st.next_page, f"<error: {e}>") from e
        if current != st.next_page:
            raise ExecutionDivergence(t, st.next_page, current)
    return current
