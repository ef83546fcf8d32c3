"""Sequence generators: the seat an LLM occupies during online planning.

Every backend answers a prompt with raw text that goes through the same
response grammar, and every call is charged to the backend's `QueryMeter`.
Mock backends charge a simulated latency from `LatencyModel` so benchmark
output stays reproducible; the HTTP backend charges wall-clock time.
"""

from __future__ import annotations

import random
import re
import time
from collections import deque
from dataclasses import dataclass, field

from .app_model import Action, AppSpec, PageRef, page_index, parse_element_ref, parse_html
from .errors import ScriptExhausted, Unreachable
from .grammar import (
    ActionSequence,
    Draft,
    GeneratorResponse,
    HtmlRequest,
    Step,
    format_action,
    parse_action_response,
    parse_response,
    serialize_response,
)
from .kg import KnowledgeGraph
from .prompts import split_sections


@dataclass(frozen=True)
class Goal:
    """Final interaction a task needs: element 0 means "reach the page and stop"."""

    page: PageRef
    element_id: int = 0
    payload: str | None = None

    def to_json(self) -> dict:
        d = {"page": self.page, "element": self.element_id}
        if self.payload is not None:
            d["text"] = self.payload
        return d

    @classmethod
    def from_json(cls, d: dict) -> Goal:
        return cls(d["page"], int(d.get("element", 0)), d.get("text"))


@dataclass
class QueryMeter:
    latencies: list[float] = field(default_factory=list)

    @property
    def query_count(self) -> int:
        return len(self.latencies)

    @property
    def total_latency(self) -> float:
        return sum(self.latencies)

    def record(self, seconds: float) -> None:
        self.latencies.append(seconds)


@dataclass(frozen=True)
class LatencyModel:
    """Simulated cost of one model call, in seconds."""

    base: float = 1.0
    per_prompt_char: float = 2e-5
    per_response_char: float = 1e-3

    def cost(self, prompt: str, response: str) -> float:
        return self.base + self.per_prompt_char * len(prompt) + self.per_response_char * len(response)


class SequenceGenerator:
    """Base class. Subclasses implement `_respond(prompt) -> str`."""

    simulated = True

    def __init__(self, latency: LatencyModel | None = None):
        self.meter = QueryMeter()
        self.latency = latency or LatencyModel()
        self.prompts: list[str] = []

    def _respond(self, prompt: str) -> str:
        raise NotImplementedError

    def _call(self, prompt: str) -> str:
        self.prompts.append(prompt)
        started = time.perf_counter()
        text = ""
        try:
            text = self._respond(prompt)
            return text
        finally:
            wall = time.perf_counter() - started
            self.meter.record(self.latency.cost(prompt, text) if self.simulated else wall)

    def generate(self, prompt: str) -> GeneratorResponse:
        return parse_response(self._call(prompt))

    def generate_action(self, prompt: str, page: PageRef) -> Action:
        """Stepwise mode: one action for the page currently shown."""
        return parse_action_response(self._call(prompt), page)


def shortest_click_path(transitions: dict[tuple[PageRef, int], PageRef],
                        actions: dict[tuple[PageRef, int], str],
                        start: PageRef, target: PageRef) -> list[tuple[PageRef, int, PageRef]] | None:
    """BFS over click edges, expanding elements in ascending id, which yields
    the lexicographically smallest element-id path among the shortest ones."""
    out_edges: dict[PageRef, list[tuple[int, PageRef]]] = {}
    for (p, e), q in transitions.items():
        if actions.get((p, e), "click") == "click":
            out_edges.setdefault(p, []).append((e, q))
    for edges in out_edges.values():
        edges.sort()
    parent: dict[PageRef, tuple[PageRef, int] | None] = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == target:
            path = []
            while parent[cur] is not None:
                prev, e = parent[cur]
                path.append((prev, e, cur))
                cur = prev
            return path[::-1]
        for e, q in out_edges.get(cur, []):
            if q not in parent:
                parent[q] = (cur, e)
                queue.append(q)
    return None


def _goal_action(goal: Goal, kind: str | None) -> Action:
    if goal.payload is not None or kind == "text":
        return Action.text(goal.element_id, goal.payload if goal.payload is not None else "")
    return Action.click(goal.element_id)


def oracle_generate(kg: KnowledgeGraph, goal: Goal, p_curr: PageRef) -> Draft:
    """Shortest path over the KG's transition facts to the goal page, then the
    goal interaction, then stop."""
    path = shortest_click_path(kg.transitions, kg.element_actions, p_curr, goal.page)
    if path is None:
        raise Unreachable(f"no path from {p_curr} to {goal.page} in the knowledge graph")
    steps = [Step(p, Action.click(e), q) for p, e, q in path]
    end = goal.page
    if goal.element_id != 0:
        key = (goal.page, goal.element_id)
        if key not in kg.transitions:
            raise Unreachable(f"goal element {goal.element_id} on {goal.page} is not in the knowledge graph")
        end = kg.transitions[key]
        steps.append(Step(goal.page, _goal_action(goal, kg.element_actions.get(key)), end))
    steps.append(Step(end, Action.stop(), end))
    return Draft(ActionSequence(tuple(steps)), "shortest path over the transition rules")


class OracleGenerator(SequenceGenerator):
    """Plans straight from the KG it was given; ignores the prompt text."""

    def __init__(self, kg: KnowledgeGraph, goal: Goal, p_curr: PageRef, latency=None):
        super().__init__(latency)
        self.kg, self.goal, self.p_curr = kg, goal, p_curr

    def _respond(self, prompt):
        return serialize_response(oracle_generate(self.kg, self.goal, self.p_curr))


class ScriptedGenerator(SequenceGenerator):
    def __init__(self, script: list[str], latency=None):
        if not script:
            raise ValueError("script must not be empty")
        super().__init__(latency)
        self.script = list(script)
        self.position = 0

    def _respond(self, prompt):
        if self.position >= len(self.script):
            raise ScriptExhausted(f"script has only {len(self.script)} responses")
        self.position += 1
        return self.script[self.position - 1]


def scripted_generator(script: list[str]) -> ScriptedGenerator:
    return ScriptedGenerator(script)


_TRANSITION_LINE = re.compile(r"\((e_\d+_\d+), (p\d+)\)")
_ELEMENT_LINE = re.compile(r"(e_\d+_\d+): \[(click|text)\] ")


def kg_from_prompt(prompt: str) -> tuple[PageRef, KnowledgeGraph, dict[str, str]]:
    """What a reader of the prompt can recover: current page and the facts listed."""
    sec = split_sections(prompt)
    kg = KnowledgeGraph("prompt")
    for line in sec.get("KNOWLEDGE GRAPH", "").splitlines():
        m = _TRANSITION_LINE.fullmatch(line)
        if m:
            kg.transitions[parse_element_ref(m.group(1))] = m.group(2)
            continue
        m = _ELEMENT_LINE.match(line)
        if m:
            key = parse_element_ref(m.group(1))
            kg.element_actions[key] = m.group(2)
            kg.element_facts[key] = line[m.end():]
    return sec.get("CURRENT PAGE", "").strip(), kg, sec


class PromptReader(SequenceGenerator):
    """Mock model that only knows what the prompt tells it.

    It plans a shortest path over the transitions listed in the prompt. With
    `noise` > 0 it corrupts each non-stop step of a first attempt (a prompt
    without a FEEDBACK section) with that probability; once it receives
    feedback it answers correctly. When it cannot find a path it asks for the
    current page's HTML once, then falls back to a blind guess.
    """

    def __init__(self, goal: Goal, noise: float = 0.0, rng: random.Random | None = None,
                 request_html: bool = True, latency=None):
        super().__init__(latency)
        self.goal = goal
        self.noise = noise
        self.rng = rng or random.Random(0)
        self.request_html = request_html

    def _respond(self, prompt):
        p_curr, kg, sec = kg_from_prompt(prompt)
        try:
            draft = oracle_generate(kg, self.goal, p_curr)
        except Unreachable:
            if self.request_html and "CURRENT HTML" not in sec:
                return f"ANALYSIS:\nthe listed transitions do not reach {self.goal.page}\nREQUEST_HTML {p_curr}\n"
            draft = self._guess(kg, p_curr)
        if self.noise > 0 and "FEEDBACK" not in sec:
            draft = self._corrupt(draft, kg)
        return serialize_response(draft)

    def _guess(self, kg, p_curr):
        g = self.goal
        steps = []
        if g.page != p_curr:
            first = min((e for (p, e) in kg.element_facts if p == p_curr), default=1)
            steps.append(Step(p_curr, Action.click(first), g.page))
        end = g.page
        if g.element_id:
            kind = kg.element_actions.get((g.page, g.element_id))
            steps.append(Step(g.page, _goal_action(g, kind), g.page))
        steps.append(Step(end, Action.stop(), end))
        return Draft(ActionSequence(tuple(steps)), "guessing without transition rules")

    def _corrupt(self, draft, kg):
        pages = sorted({p for p, _ in kg.element_facts} | set(kg.transitions.values()),
                       key=lambda p: page_index(p) or 0)
        steps = list(draft.sequence.steps)
        for i, st in enumerate(steps):
            if st.action.action_type == "stop" or self.rng.random() >= self.noise:
                continue
            others = [p for p in pages if p != st.next_page]
            wrong = self.rng.choice(others) if others else f"p{len(pages) + 1}"
            steps[i] = Step(st.page, st.action, wrong)
        return Draft(ActionSequence(tuple(steps)), draft.analysis)


class StepwiseOracle(SequenceGenerator):
    """One action per query, computed from the app's true structure."""

    def __init__(self, app: AppSpec, goal: Goal, latency=None):
        super().__init__(latency)
        self.app, self.goal = app, goal
        self.transitions = {(p.page_id, e.element_id): e.target_page
                            for p in app.pages for e in p.elements}
        self.actions = {(p.page_id, e.element_id): e.accepted_action
                        for p in app.pages for e in p.elements}
        self.goal_done = False

    def _respond(self, prompt):
        page = parse_html(split_sections(prompt)["CURRENT HTML"]).page_id
        g = self.goal
        if self.goal_done or (page == g.page and g.element_id == 0):
            return format_action(page, Action.stop())
        if page == g.page:
            self.goal_done = True
            return format_action(page, _goal_action(g, self.actions.get((page, g.element_id))))
        path = shortest_click_path(self.transitions, self.actions, page, g.page)
        if not path:
            raise Unreachable(f"{g.page} unreachable from {page}")
        return format_action(page, Action.click(path[0][1]))
