"""Random apps, histories and sequences, plus brute-force oracles used by the
property and acceptance tests. Everything takes an explicit `random.Random`
(hypothesis' `st.randoms()` works too)."""

from __future__ import annotations

import random

from graphpilot.app_model import Action, AppSpec, ElementSpec, PageSpec, apply_action, render_html
from graphpilot.errors import GraphPilotError
from graphpilot.explorer import Episode, ExplorationHistory, ExplorationStep, canonicalize_app
from graphpilot.grammar import ActionSequence, Step

PAYLOADS = ["hello", "42", "a b", 'quote"d', "ünï"]


def random_app(rng: random.Random, max_pages: int = 10, max_elements: int = 4,
               app_id: str = "rand") -> AppSpec:
    n = rng.randint(1, max_pages)
    names = [f"page{i}" for i in range(n)]
    rng.shuffle(names)
    pages = []
    for name in names:
        els = []
        for eid in range(1, rng.randint(0, max_elements) + 1):
            kind = rng.choices(["button", "input", "checkbox"], weights=[6, 2, 2])[0]
            els.append(ElementSpec(eid, kind, f"{kind} {eid} of {name}", rng.choice(names)))
        pages.append(PageSpec(name, name.title(), tuple(els)))
    return canonicalize_app(AppSpec(app_id, names[0], tuple(pages)))


def action_for(rng, el) -> Action:
    if el.kind == "input":
        return Action.text(el.element_id, rng.choice(PAYLOADS))
    return Action.click(el.element_id)


def random_walk(rng: random.Random, app: AppSpec, start: str, max_len: int = 8) -> ActionSequence:
    """A valid plan: random interactions from `start`, then stop."""
    page, steps = start, []
    for _ in range(rng.randint(0, max_len)):
        els = app.page(page).elements
        if not els:
            break
        action = action_for(rng, rng.choice(els))
        nxt = apply_action(app, page, action)
        steps.append(Step(page, action, nxt))
        page = nxt
    steps.append(Step(page, Action.stop(), page))
    return ActionSequence(tuple(steps))


def random_history(rng: random.Random, app: AppSpec, max_steps: int = 30) -> ExplorationHistory:
    """Random-walk episodes from the start page, each ending in stop, at most
    `max_steps` steps in total."""
    episodes, budget = [], max_steps
    while budget > 0:
        length = rng.randint(1, budget)
        walk = random_walk(rng, app, app.start_page, max_len=length - 1)
        steps = tuple(ExplorationStep(render_html(app, s.page), s.action, render_html(app, s.next_page))
                      for s in walk.steps)
        episodes.append(Episode(steps))
        budget -= len(steps)
        if rng.random() < 0.3:
            break
    return ExplorationHistory(app.app_id, tuple(episodes))


def naive_kg_fields(history: ExplorationHistory, annotator):
    """Re-scan oracle: number pages by first appearance over the flattened
    (before, after) stream, then keep the first fact seen for each key."""
    order = {}
    for ep in history.episodes:
        for st in ep.steps:
            order.setdefault(st.html_before.canonical_text, f"p{len(order)}")
            order.setdefault(st.html_after.canonical_text, f"p{len(order)}")
    page_facts, element_facts, transitions, actions = {}, {}, {}, {}
    for ep in history.episodes:
        for i, st in enumerate(ep.steps):
            cur = order[st.html_before.canonical_text]
            if cur not in page_facts:
                prev = ep.steps[i - 1] if i else None
                page_facts[cur] = annotator.describe_page(
                    prev and prev.html_before, prev and prev.action,
                    st.html_before, st.action, st.html_after)
            if st.action.action_type == "stop":
                continue
            key = (cur, st.action.element_id)
            if key not in element_facts:
                element_facts[key] = annotator.describe_element(st.html_before, st.action, st.html_after)
                transitions[key] = order[st.html_after.canonical_text]
                actions[key] = st.action.action_type
    return page_facts, element_facts, transitions, actions


def executes_validly(app: AppSpec, seq: ActionSequence, p_curr: str) -> bool:
    """Ground truth for "valid plan": well-formed actions, stop exactly at the
    end, and the simulator visits exactly the declared pages."""
    steps = seq.steps
    if not steps or steps[0].page != p_curr:
        return False
    page = p_curr
    for i, st in enumerate(steps):
        is_last = i == len(steps) - 1
        if st.action.problems() or (st.action.action_type == "stop") != is_last:
            return False
        if st.page != page:
            return False
        try:
            page = apply_action(app, page, st.action)
        except GraphPilotError:
            return False
        if page != st.next_page:
            return False
    return True


MUTATIONS = ("page", "next_page", "element", "action_type", "drop_stop")


def mutate(rng: random.Random, app: AppSpec, seq: ActionSequence, p_curr: str, tries: int = 200):
    """One corrupting edit. Edits that leave an equally valid plan (e.g. a
    sibling element with the same target) are not corruptions and are
    resampled. Returns (sequence, mutated 1-based index, kind)."""
    pages = app.page_ids
    for _ in range(tries):
        steps = list(seq.steps)
        kind = rng.choice(MUTATIONS)
        t = rng.randrange(len(steps))
        st = steps[t]
        a = st.action
        if kind == "page":
            others = [p for p in pages if p != st.page] or ["p99"]
            steps[t] = Step(rng.choice(others), a, st.next_page)
        elif kind == "next_page":
            others = [p for p in pages if p != st.next_page] or ["p99"]
            steps[t] = Step(st.page, a, rng.choice(others))
        elif kind == "element":
            new = rng.choice([e for e in range(0, 7) if e != a.element_id])
            steps[t] = Step(st.page, Action(a.action_type, new, a.text_payload), st.next_page)
        elif kind == "action_type":
            new = rng.choice([x for x in ("click", "text", "stop") if x != a.action_type])
            steps[t] = Step(st.page, Action(new, a.element_id, a.text_payload), st.next_page)
        else:
            if len(steps) < 2:
                continue
            t = len(steps) - 1
            del steps[t]
        mutated = ActionSequence(tuple(steps))
        if not executes_validly(app, mutated, p_curr):
            return mutated, t + 1, kind
    raise RuntimeError("could not find a corrupting mutation")


def brute_force_shortest(transitions, actions, start, target, max_len=8):
    """Length of the shortest click path by exhaustive enumeration of every
    simple path up to `max_len` edges."""
    best = None

    def dfs(page, depth, seen):
        nonlocal best
        if page == target:
            best = depth if best is None else min(best, depth)
            return
        if depth == max_len:
            return
        for (p, e), q in transitions.items():
            if p == page and actions.get((p, e), "click") == "click" and q not in seen:
                dfs(q, depth + 1, seen | {q})

    dfs(start, 0, {start})
    return best
