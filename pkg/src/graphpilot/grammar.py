"""Action sequences and the text grammar generators answer in.

A draft response looks like::

    ANALYSIS:
    free text, ignored by the parser
    STEP 1: page=p0 action=click element=e_0_1 next=p1
    STEP 2: page=p1 action=text element=e_1_2 text="hello" next=p1
    STEP 3: page=p1 action=stop element=0 next=p1

or a single ``REQUEST_HTML p3`` line. Stepwise backends answer one
``ACTION action=click element=e_0_1`` line per query instead.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .app_model import Action, PageRef, format_element_ref, page_index
from .errors import ParseError, ResponseParseError


@dataclass(frozen=True)
class Step:
    page: PageRef
    action: Action
    next_page: PageRef


@dataclass(frozen=True)
class ActionSequence:
    steps: tuple[Step, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def action_count(self) -> int:
        """Interactions excluding stop."""
        return sum(1 for s in self.steps if s.action.action_type != "stop")


@dataclass(frozen=True)
class Draft:
    sequence: ActionSequence
    analysis: str = field(default="", compare=False)


@dataclass(frozen=True)
class HtmlRequest:
    page: PageRef


GeneratorResponse = Draft | HtmlRequest

_PAGE = r"p\d+"
_STEP = re.compile(
    rf"STEP (?P<k>\d+): page=(?P<page>{_PAGE}) action=(?P<action>click|text|stop) "
    rf"element=(?P<element>e_\d+_\d+|0)"
    r'(?: text=(?P<text>"(?:[^"\\]|\\.)*"))?'
    rf" next=(?P<next>{_PAGE})"
)
_STEP_START = re.compile(r"STEP\s*\d")
_REQUEST = re.compile(rf"REQUEST_HTML ({_PAGE})")
_ACTION = re.compile(
    r"ACTION action=(?P<action>click|text|stop) element=(?P<element>e_\d+_\d+|0)"
    r'(?: text=(?P<text>"(?:[^"\\]|\\.)*"))?'
)


def _element_id(ref: str, page: PageRef, lineno: int) -> int:
    if ref == "0":
        return 0
    _, i, j = ref.split("_")
    if int(i) != page_index(page):
        raise ResponseParseError(lineno, f"element {ref} does not belong to page {page}")
    return int(j)


def _payload(raw: str | None, lineno: int) -> str | None:
    if raw is None:
        return None
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise ResponseParseError(lineno, f"bad text payload: {e}") from e


def parse_response(text: str) -> GeneratorResponse:
    lines = text.splitlines()
    steps: list[Step] = []
    analysis: list[str] = []
    request: HtmlRequest | None = None
    in_steps = False
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if _STEP_START.match(line):
            in_steps = True
            m = _STEP.fullmatch(line)
            if not m:
                raise ResponseParseError(lineno, f"malformed STEP line: {line!r}")
            k = int(m.group("k"))
            if k != len(steps) + 1:
                raise ResponseParseError(lineno, f"expected STEP {len(steps) + 1}, got STEP {k}")
            if steps and steps[-1].action.action_type == "stop":
                raise ResponseParseError(lineno, "STEP after the terminal stop")
            page = m.group("page")
            action = Action(m.group("action"), _element_id(m.group("element"), page, lineno),
                            _payload(m.group("text"), lineno))
            steps.append(Step(page, action, m.group("next")))
        elif in_steps:
            if line:
                raise ResponseParseError(lineno, f"unexpected text after STEP lines: {line!r}")
        elif _REQUEST.fullmatch(line):
            if request is not None:
                raise ResponseParseError(lineno, "more than one REQUEST_HTML")
            request = HtmlRequest(_REQUEST.fullmatch(line).group(1))
        else:
            analysis.append(raw)
    if request is not None:
        if steps:
            raise ResponseParseError(len(lines), "REQUEST_HTML mixed with STEP lines")
        return request
    if not steps:
        raise ResponseParseError(max(len(lines), 1), "no STEP lines and no REQUEST_HTML")
    if steps[-1].action.action_type != "stop":
        raise ResponseParseError(len(lines), "sequence is not terminated by a stop step")
    text_analysis = "\n".join(analysis)
    if text_analysis.lstrip().startswith("ANALYSIS:"):
        text_analysis = text_analysis.lstrip()[len("ANALYSIS:"):]
    return Draft(ActionSequence(tuple(steps)), text_analysis.strip())


def _element_field(page: PageRef, element_id: int) -> str:
    return "0" if element_id == 0 else format_element_ref(page, element_id)


def _text_field(action: Action) -> str:
    if action.text_payload is None:
        return ""
    # ASCII escapes keep unicode line separators from splitting the line
    return " text=" + json.dumps(action.text_payload)


def format_step(k: int, step: Step) -> str:
    a = step.action
    return (f"STEP {k}: page={step.page} action={a.action_type} "
            f"element={_element_field(step.page, a.element_id)}{_text_field(a)} next={step.next_page}")


def serialize_sequence(seq: ActionSequence) -> str:
    return "\n".join(format_step(k, s) for k, s in enumerate(seq.steps, 1))


def serialize_response(resp: GeneratorResponse) -> str:
    if isinstance(resp, HtmlRequest):
        return f"REQUEST_HTML {resp.page}"
    body = serialize_sequence(resp.sequence)
    analysis = resp.analysis.strip()
    return f"ANALYSIS:\n{analysis}\n{body}\n" if analysis else f"ANALYSIS:\n{body}\n"


def parse_action_response(text: str, page: PageRef) -> Action:
    """Stepwise grammar: exactly one ACTION line (other lines ignored)."""
    found = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line.startswith("ACTION "):
            continue
        m = _ACTION.fullmatch(line)
        if not m:
            raise ResponseParseError(lineno, f"malformed ACTION line: {line!r}")
        if found is not None:
            raise ResponseParseError(lineno, "more than one ACTION line")
        found = Action(m.group("action"), _element_id(m.group("element"), page, lineno),
                       _payload(m.group("text"), lineno))
    if found is None:
        raise ResponseParseError(1, "no ACTION line")
    return found


def format_action(page: PageRef, action: Action) -> str:
    return (f"ACTION action={action.action_type} "
            f"element={_element_field(page, action.element_id)}{_text_field(action)}")


def sequence_to_json(seq: ActionSequence) -> list[dict]:
    return [{"page": s.page, **s.action.to_json(), "next": s.next_page} for s in seq.steps]


def sequence_from_json(doc) -> ActionSequence:
    try:
        return ActionSequence(tuple(
            Step(d["page"], Action.from_json(d), d["next"]) for d in doc
        ))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed action sequence: {e}") from e
