"""Systematic exploration of a simulated app into recorded episodes."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .app_model import (
    TEXT_PLACEHOLDER,
    Action,
    AppSpec,
    HtmlDoc,
    PageRef,
    apply_action,
    page_sort_key,
    parse_html,
    relabel_pages,
    render_html,
)
from .errors import GraphPilotError, ParseError


@dataclass(frozen=True)
class ExplorationStep:
    html_before: HtmlDoc
    action: Action
    html_after: HtmlDoc


@dataclass(frozen=True)
class Episode:
    steps: tuple[ExplorationStep, ...]


@dataclass(frozen=True)
class ExplorationHistory:
    app_id: str
    episodes: tuple[Episode, ...]

    def steps(self):
        for ep in self.episodes:
            yield from ep.steps


@dataclass
class HistoryCheck:
    ok: bool
    diagnostics: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _action_for(el) -> Action:
    if el.accepted_action == "text":
        return Action.text(el.element_id, TEXT_PLACEHOLDER)
    return Action.click(el.element_id)


def _first_step_toward_untried(app, page, known, untried_on):
    """First element of the shortest known path from `page` to any page that
    still has untried elements, or None."""
    parent: dict[PageRef, tuple[PageRef, int] | None] = {page: None}
    queue = deque([page])
    while queue:
        cur = queue.popleft()
        if cur != page and untried_on(cur):
            while parent[cur][0] != page:
                cur = parent[cur][0]
            return parent[cur][1]
        for el in sorted(app.page(cur).elements, key=lambda e: e.element_id):
            nxt = known.get((cur, el.element_id))
            if nxt is not None and nxt not in parent:
                parent[nxt] = (cur, el.element_id)
                queue.append(nxt)
    return None


def explore(app: AppSpec, max_depth: int = 50, max_episodes: int = 50) -> ExplorationHistory:
    if max_depth < 1 or max_episodes < 1:
        raise ValueError("budgets must be positive")
    known: dict[tuple[PageRef, int], PageRef] = {}

    def untried(page: PageRef):
        return [e for e in sorted(app.page(page).elements, key=lambda e: e.element_id)
                if (page, e.element_id) not in known]

    episodes: list[Episode] = []
    while len(episodes) < max_episodes:
        if episodes and untried(app.start_page) == [] and \
                _first_step_toward_untried(app, app.start_page, known, untried) is None:
            break
        page, steps = app.start_page, []
        while len(steps) < max_depth:
            todo = untried(page)
            if todo:
                el = todo[0]
            else:
                eid = _first_step_toward_untried(app, page, known, untried)
                if eid is None:
                    break
                el = app.page(page).element(eid)
            action = _action_for(el)
            nxt = apply_action(app, page, action)
            known[(page, el.element_id)] = nxt
            steps.append(ExplorationStep(render_html(app, page), action, render_html(app, nxt)))
            page = nxt
        here = render_html(app, page)
        steps.append(ExplorationStep(here, Action.stop(), here))
        episodes.append(Episode(tuple(steps)))
    return ExplorationHistory(app.app_id, tuple(episodes))


def check_history(app: AppSpec, history: ExplorationHistory) -> HistoryCheck:
    diags: list[str] = []
    if history.app_id != app.app_id:
        diags.append(f"history is for app {history.app_id!r}, not {app.app_id!r}")
    start = render_html(app, app.start_page).canonical_text
    for ei, ep in enumerate(history.episodes):
        if not ep.steps:
            diags.append(f"episode {ei}: empty")
            continue
        if ep.steps[0].html_before.canonical_text != start:
            diags.append(f"episode {ei} step 0: does not begin at the start page")
        for si, st in enumerate(ep.steps):
            where = f"episode {ei} step {si}"
            if si > 0 and ep.steps[si - 1].html_after.canonical_text != st.html_before.canonical_text:
                diags.append(f"{where}: html_before does not chain from previous html_after")
            last = si == len(ep.steps) - 1
            if last and (st.action.action_type != "stop" or st.action.element_id != 0):
                diags.append(f"{where}: final step must be stop with element 0")
            if not last and st.action.action_type == "stop":
                diags.append(f"{where}: stop before the end of the episode")
            try:
                page = parse_html(st.html_before.canonical_text).page_id
                expected = render_html(app, apply_action(app, page, st.action)).canonical_text
            except (GraphPilotError, ValueError) as e:
                diags.append(f"{where}: does not replay ({e})")
                continue
            if expected != st.html_after.canonical_text:
                diags.append(f"{where}: html_after differs from the simulator's result")
    return HistoryCheck(not diags, diags)


def exploration_order(history: ExplorationHistory) -> list[PageRef]:
    """Source pages in the order a PageID pass over the history first meets them."""
    seen: dict[PageRef, None] = {}
    for st in history.steps():
        seen.setdefault(st.html_before.source_page)
        seen.setdefault(st.html_after.source_page)
    return list(seen)


def canonicalize_app(app: AppSpec, max_depth: int = 200, max_episodes: int = 200) -> AppSpec:
    """Rename pages to ``p0, p1, ...`` in exploration order, so that ids minted
    by PageRegistry during KG construction coincide with declared ids.
    Unreachable pages are numbered after the reachable ones."""
    order = exploration_order(explore(app, max_depth, max_episodes))
    rest = sorted((p for p in app.page_ids if p not in order), key=page_sort_key)
    mapping = {old: f"p{i}" for i, old in enumerate(order + rest)}
    # two-phase rename so new ids never collide with old ones mid-way
    tmp = relabel_pages(app, {old: f"__tmp_{new}" for old, new in mapping.items()})
    return relabel_pages(tmp, {f"__tmp_{new}": new for new in mapping.values()})


def history_to_json(history: ExplorationHistory) -> str:
    doc = [
        {
            "app_id": history.app_id,
            "steps": [
                {"html_before": st.html_before.canonical_text,
                 "action": st.action.to_json(),
                 "html_after": st.html_after.canonical_text}
                for st in ep.steps
            ],
        }
        for ep in history.episodes
    ]
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def history_from_json(text: str) -> ExplorationHistory:
    try:
        doc = json.loads(text)
        app_ids = {ep["app_id"] for ep in doc}
        if len(app_ids) > 1:
            raise ParseError(f"history mixes apps: {sorted(app_ids)}")
        episodes = tuple(
            Episode(tuple(
                ExplorationStep(HtmlDoc.from_text(st["html_before"]),
                                Action.from_json(st["action"]),
                                HtmlDoc.from_text(st["html_after"]))
                for st in ep["steps"]
            ))
            for ep in doc
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed history file: {e}") from e
    return ExplorationHistory(app_ids.pop() if app_ids else "", episodes)
