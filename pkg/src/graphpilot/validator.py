"""Structural checking of action sequences against KG transition rules.

Every check runs on every step, so one report can carry several problems and
a single refinement round can address all of them.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from .app_model import PageRef
from .grammar import ActionSequence
from .kg import KnowledgeGraph


class ViolationCode(str, enum.Enum):
    BAD_START = "BAD_START"
    UNKNOWN_PAGE = "UNKNOWN_PAGE"
    UNKNOWN_ELEMENT = "UNKNOWN_ELEMENT"
    TRANSITION_MISMATCH = "TRANSITION_MISMATCH"
    DISCONTINUITY = "DISCONTINUITY"
    BAD_TERMINAL = "BAD_TERMINAL"
    MISSING_TEXT_PAYLOAD = "MISSING_TEXT_PAYLOAD"
    ACTION_ELEMENT_MISMATCH = "ACTION_ELEMENT_MISMATCH"

    def __str__(self) -> str:
        return self.value


_ORDER = {c: i for i, c in enumerate(ViolationCode)}


@dataclass(frozen=True)
class Violation:
    step: int
    code: ViolationCode
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        # truthy when there is something to fix
        return bool(self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def invalid_steps(self) -> list[int]:
        return sorted({v.step for v in self.violations})

    def codes_at(self, step: int) -> set[ViolationCode]:
        return {v.code for v in self.violations if v.step == step}

    def to_json(self) -> str:
        return json.dumps([{"step": v.step, "code": v.code.value, "message": v.message}
                           for v in self.violations])


def validate(seq: ActionSequence, kg: KnowledgeGraph, p_curr: PageRef) -> ValidationReport:
    found: list[Violation] = []

    def flag(step, code, msg):
        found.append(Violation(step, code, msg))

    steps = seq.steps
    if not steps:
        flag(1, ViolationCode.BAD_TERMINAL, "empty sequence; expected at least a stop step")
        return ValidationReport(tuple(found))

    known_pages = kg.pages
    T = len(steps)
    for t, st in enumerate(steps, 1):
        a = st.action
        if t == 1 and st.page != p_curr:
            flag(t, ViolationCode.BAD_START, f"sequence starts on {st.page}, current page is {p_curr}")
        if t > 1 and steps[t - 2].next_page != st.page:
            flag(t, ViolationCode.DISCONTINUITY,
                 f"step {t - 1} ends on {steps[t - 2].next_page} but step {t} starts on {st.page}")
        page_known = st.page in known_pages
        if not page_known:
            flag(t, ViolationCode.UNKNOWN_PAGE, f"page {st.page} is not in the knowledge graph")

        if a.action_type == "stop":
            if a.element_id != 0 or a.text_payload is not None:
                flag(t, ViolationCode.ACTION_ELEMENT_MISMATCH, "stop must use element 0 and no text")
            if st.next_page != st.page:
                flag(t, ViolationCode.TRANSITION_MISMATCH,
                     f"stop stays on {st.page}, declared next page {st.next_page}")
            if t < T:
                flag(t, ViolationCode.BAD_TERMINAL, "stop before the last step")
            continue

        if t == T:
            flag(t, ViolationCode.BAD_TERMINAL, "last step must be stop with element 0")
        if a.action_type not in ("click", "text"):
            flag(t, ViolationCode.ACTION_ELEMENT_MISMATCH, f"unknown action type {a.action_type!r}")
            continue
        if a.element_id == 0:
            flag(t, ViolationCode.ACTION_ELEMENT_MISMATCH, f"{a.action_type} needs a target element")
            continue
        if a.action_type == "text" and a.text_payload is None:
            flag(t, ViolationCode.MISSING_TEXT_PAYLOAD, "text action carries no payload")
        if not page_known:
            continue
        key = (st.page, a.element_id)
        if key not in kg.element_facts:
            flag(t, ViolationCode.UNKNOWN_ELEMENT, f"no element {a.element_id} on {st.page}")
            continue
        accepted = kg.element_actions.get(key)
        if accepted is not None and accepted != a.action_type:
            flag(t, ViolationCode.ACTION_ELEMENT_MISMATCH,
                 f"element {a.element_id} on {st.page} takes {accepted}, not {a.action_type}")
        elif a.action_type == "click" and a.text_payload is not None:
            flag(t, ViolationCode.ACTION_ELEMENT_MISMATCH, "click carries no text payload")
        target = kg.transitions.get(key)
        if target is not None and target != st.next_page:
            flag(t, ViolationCode.TRANSITION_MISMATCH,
                 f"element {a.element_id} on {st.page} leads to {target}, not {st.next_page}")
    found.sort(key=lambda v: (v.step, _ORDER[v.code]))
    return ValidationReport(tuple(found))
