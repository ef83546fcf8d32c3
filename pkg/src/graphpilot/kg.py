"""Knowledge graph construction from exploration history, plus storage formats.

`build_kg` folds each episode of an `ExplorationHistory` into page facts,
element facts and transition facts. Facts are first-wins: a page or element
that already has a description is never re-annotated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Protocol

from .app_model import (
    Action,
    AppSpec,
    HtmlDoc,
    PageRef,
    PageRegistry,
    format_element_ref,
    page_id,
    page_index,
    page_sort_key,
    parse_html,
)
from .errors import AnnotatorError, AppMismatch, HistoryError, ParseError
from .explorer import ExplorationHistory, check_history

ElementKey = tuple[PageRef, int]


@dataclass(frozen=True)
class KnowledgeGraph:
    app_id: str
    page_facts: dict[PageRef, str] = field(default_factory=dict)
    element_facts: dict[ElementKey, str] = field(default_factory=dict)
    transitions: dict[ElementKey, PageRef] = field(default_factory=dict)
    # action type observed when the element fact was recorded ("click"/"text")
    element_actions: dict[ElementKey, str] = field(default_factory=dict)

    @property
    def pages(self) -> set[PageRef]:
        out = set(self.page_facts)
        for (p, _), q in self.transitions.items():
            out.update((p, q))
        return out

    def elements_on(self, page: PageRef) -> list[int]:
        return sorted(e for (p, e) in self.element_facts if p == page)


def query_transition(kg: KnowledgeGraph, page: PageRef, element_id: int) -> PageRef | None:
    return kg.transitions.get((page, element_id))


class Annotator(Protocol):
    def describe_page(self, html_prev: HtmlDoc | None, action_prev: Action | None,
                      html_curr: HtmlDoc, action_curr: Action, html_next: HtmlDoc) -> str: ...

    def describe_element(self, html_curr: HtmlDoc, action_curr: Action, html_next: HtmlDoc) -> str: ...


class StubAnnotator:
    """Deterministic templated descriptions read off the canonical HTML."""

    def describe_page(self, html_prev, action_prev, html_curr, action_curr, html_next):
        page = parse_html(html_curr.canonical_text)
        return f"Page {page.page_id}: '{page.title}' with {len(page.elements)} elements"

    def describe_element(self, html_curr, action_curr, html_next):
        page = parse_html(html_curr.canonical_text)
        label = next((e.label for e in page.elements if e.element_id == action_curr.element_id), "?")
        target = parse_html(html_next.canonical_text).page_id
        return f"Element {action_curr.element_id} '{label}' on {page.page_id}: leads to {target}"


def _structural_problems(history: ExplorationHistory) -> list[str]:
    # app-free subset of check_history
    diags = []
    for ei, ep in enumerate(history.episodes):
        if not ep.steps:
            diags.append(f"episode {ei}: empty")
            continue
        for si, st in enumerate(ep.steps):
            if si and ep.steps[si - 1].html_after.canonical_text != st.html_before.canonical_text:
                diags.append(f"episode {ei} step {si}: html_before does not chain")
        last = ep.steps[-1].action
        if last.action_type != "stop" or last.element_id != 0:
            diags.append(f"episode {ei}: final step must be stop with element 0")
    return diags


def build_kg(history: ExplorationHistory, annotator: Annotator, *,
             app: AppSpec | None = None, registry: PageRegistry | None = None) -> KnowledgeGraph:
    """Run the offline construction loop over every episode, in order.

    Pass `app` to replay the history on the simulator before building; without
    it only the app-independent episode shape is checked. `registry` is filled
    in place when given, so callers can inspect the digest -> id assignment.
    """
    diags = check_history(app, history).diagnostics if app is not None else _structural_problems(history)
    if diags:
        raise HistoryError(diags)
    registry = registry if registry is not None else PageRegistry()
    kg = KnowledgeGraph(history.app_id)
    step_no = 0
    for ep in history.episodes:
        steps = ep.steps
        T = len(steps)
        for t in range(1, T + 1):
            step_no += 1
            st = steps[t - 1]
            prev = steps[t - 2] if t > 1 else None
            p_prev = page_id(registry, prev.html_before) if prev else None  # noqa: F841
            p_curr = page_id(registry, st.html_before)
            p_next = page_id(registry, st.html_after) if t < T else p_curr
            if p_curr not in kg.page_facts:
                try:
                    kg.page_facts[p_curr] = annotator.describe_page(
                        prev.html_before if prev else None, prev.action if prev else None,
                        st.html_before, st.action, st.html_after)
                except Exception as e:
                    raise AnnotatorError(step_no, e) from e
            e_t = st.action.element_id if t < T else 0
            key = (p_curr, e_t)
            if e_t != 0 and key not in kg.element_facts:
                try:
                    kg.element_facts[key] = annotator.describe_element(st.html_before, st.action, st.html_after)
                except Exception as e:
                    raise AnnotatorError(step_no, e) from e
                kg.element_actions[key] = st.action.action_type
                kg.transitions[key] = p_next
    return kg


def merge_kg(a: KnowledgeGraph, b: KnowledgeGraph) -> tuple[KnowledgeGraph, list[str]]:
    """Union of facts; on a key collision with differing values `a` wins and
    the collision is logged."""
    if a.app_id != b.app_id:
        raise AppMismatch(f"cannot merge KGs of {a.app_id!r} and {b.app_id!r}")
    conflicts: list[str] = []

    def union(name, x, y):
        out = dict(x)
        for k, v in y.items():
            if k not in out:
                out[k] = v
            elif out[k] != v:
                conflicts.append(f"{name} {k}: kept {out[k]!r}, dropped {v!r}")
        return out

    merged = KnowledgeGraph(
        a.app_id,
        union("page_fact", a.page_facts, b.page_facts),
        union("element_fact", a.element_facts, b.element_facts),
        union("transition", a.transitions, b.transitions),
        union("element_action", a.element_actions, b.element_actions),
    )
    return merged, conflicts


def _key_order(key: ElementKey):
    return (page_sort_key(key[0]), key[1])


def kg_to_dict(kg: KnowledgeGraph) -> dict:
    return {
        "app_id": kg.app_id,
        "page_facts": [{"page": p, "function": kg.page_facts[p]}
                       for p in sorted(kg.page_facts, key=page_sort_key)],
        "element_facts": [{"page": k[0], "element": k[1],
                           "action": kg.element_actions.get(k, "click"),
                           "function": kg.element_facts[k]}
                          for k in sorted(kg.element_facts, key=_key_order)],
        "transitions": [{"page": k[0], "element": k[1], "target": kg.transitions[k]}
                        for k in sorted(kg.transitions, key=_key_order)],
    }


def serialize_kg(kg: KnowledgeGraph) -> str:
    return json.dumps(kg_to_dict(kg), indent=2, ensure_ascii=False) + "\n"


def deserialize_kg(text: str) -> KnowledgeGraph:
    try:
        doc = json.loads(text)
        kg = KnowledgeGraph(doc["app_id"])
        for f in doc["page_facts"]:
            _put(kg.page_facts, _str(f["page"]), _str(f["function"]))
        for f in doc["element_facts"]:
            key = (_str(f["page"]), _int(f["element"]))
            _put(kg.element_facts, key, _str(f["function"]))
            action = f.get("action", "click")
            if action not in ("click", "text"):
                raise ValueError(f"element {key}: bad action {action!r}")
            kg.element_actions[key] = action
        for f in doc["transitions"]:
            _put(kg.transitions, (_str(f["page"]), _int(f["element"])), _str(f["target"]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed KG file: {e}") from e
    orphans = set(kg.transitions) - set(kg.element_facts)
    if orphans:
        raise ParseError(f"transitions without element facts: {sorted(orphans)}")
    return kg


def _put(d, k, v):
    if k in d:
        raise ValueError(f"duplicate fact for {k}")
    d[k] = v


def _str(v):
    if not isinstance(v, str):
        raise TypeError(f"expected string, got {v!r}")
    return v


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"expected integer, got {v!r}")
    return v


def _element_node(page: PageRef, element_id: int) -> str:
    if page_index(page) is not None:
        return format_element_ref(page, element_id)
    return f"{page}:{element_id}"


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(kg: KnowledgeGraph) -> str:
    """Pages are ellipses, elements boxes clustered with their page; the only
    edges are transitions, labelled with the element reference."""
    lines = [f"digraph {_q(kg.app_id)} {{", "  rankdir=LR;"]
    for page in sorted(kg.pages, key=page_sort_key):
        lines.append(f"  subgraph {_q('cluster_' + page)} {{")
        lines.append(f"    label={_q(page)};")
        tip = kg.page_facts.get(page, "")
        lines.append(f"    {_q(page)} [shape=ellipse, tooltip={_q(tip)}];")
        for e in kg.elements_on(page):
            node = _element_node(page, e)
            lines.append(f"    {_q(node)} [shape=box, tooltip={_q(kg.element_facts[(page, e)])}];")
        lines.append("  }")
    for key in sorted(kg.transitions, key=_key_order):
        page, e = key
        lines.append(f"  {_q(page)} -> {_q(kg.transitions[key])} [label={_q(_element_node(page, e))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"

