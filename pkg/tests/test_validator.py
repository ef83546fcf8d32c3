import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphpilot.app_model import Action
from graphpilot.explorer import explore, exploration_order
from graphpilot.generator import Goal, oracle_generate
from graphpilot.grammar import ActionSequence, Step
from graphpilot.kg import KnowledgeGraph, StubAnnotator, build_kg
from graphpilot.planner import execute_plan
from graphpilot.validator import ViolationCode as V, validate

from helpers import executes_validly, mutate, random_app, random_walk


def codes(report):
    return [(v.step, v.code) for v in report.violations]


def seq(*steps):
    return ActionSequence(tuple(Step(*s) for s in steps))


@pytest.fixture
def clock_draft(clock_kg):
    return oracle_generate(clock_kg, Goal("p2", 1), "p0").sequence


def test_oracle_draft_is_valid(clock_kg, clock_draft):
    report = validate(clock_draft, clock_kg, "p0")
    assert report.ok and not report and report.to_json() == "[]"


def test_altered_next_page(clock_kg, clock_draft):
    steps = list(clock_draft.steps)
    steps[1] = Step("p1", steps[1].action, "p3")
    report = validate(ActionSequence(tuple(steps)), clock_kg, "p0")
    assert codes(report) == [(2, V.TRANSITION_MISMATCH), (3, V.DISCONTINUITY)]
    assert report.invalid_steps == [2, 3]


def test_missing_stop(clock_kg):
    assert codes(validate(seq(("p0", Action.click(1), "p1")), clock_kg, "p0")) == [(1, V.BAD_TERMINAL)]


def test_empty_sequence(clock_kg):
    assert codes(validate(ActionSequence(()), clock_kg, "p0")) == [(1, V.BAD_TERMINAL)]


@pytest.mark.parametrize("steps, expected", [
    ([("p1", Action.stop(), "p1")], [(1, V.BAD_START)]),
    ([("p7", Action.stop(), "p7")], [(1, V.BAD_START), (1, V.UNKNOWN_PAGE)]),
    ([("p0", Action.click(5), "p1"), ("p1", Action.stop(), "p1")], [(1, V.UNKNOWN_ELEMENT)]),
    ([("p0", Action.text(1, "x"), "p1"), ("p1", Action.stop(), "p1")], [(1, V.ACTION_ELEMENT_MISMATCH)]),
    ([("p0", Action("click", 1, "x"), "p1"), ("p1", Action.stop(), "p1")], [(1, V.ACTION_ELEMENT_MISMATCH)]),
    ([("p0", Action("click", 0), "p1"), ("p1", Action.stop(), "p1")], [(1, V.ACTION_ELEMENT_MISMATCH)]),
    ([("p0", Action("swipe", 1), "p1"), ("p1", Action.stop(), "p1")], [(1, V.ACTION_ELEMENT_MISMATCH)]),
    ([("p0", Action("stop", 1), "p0")], [(1, V.ACTION_ELEMENT_MISMATCH)]),
    ([("p0", Action.stop(), "p1")], [(1, V.TRANSITION_MISMATCH)]),
    ([("p0", Action.stop(), "p0"), ("p0", Action.stop(), "p0")], [(1, V.BAD_TERMINAL)]),
    # every problem is reported in one pass
    ([("p0", Action.click(1), "p2"), ("p1", Action.click(9), "p2"), ("p2", Action.click(1), "p2")],
     [(1, V.TRANSITION_MISMATCH), (2, V.UNKNOWN_ELEMENT), (2, V.DISCONTINUITY),
      (3, V.BAD_TERMINAL)]),
])
def test_violation_codes(clock_kg, steps, expected):
    assert codes(validate(seq(*steps), clock_kg, "p0")) == expected


def test_text_payload_presence_only():
    kg = KnowledgeGraph("x", {"p0": "home"}, {("p0", 1): "name"}, {("p0", 1): "p0"}, {("p0", 1): "text"})
    ok = seq(("p0", Action.text(1, ""), "p0"), ("p0", Action.stop(), "p0"))
    assert validate(ok, kg, "p0").ok
    missing = seq(("p0", Action("text", 1), "p0"), ("p0", Action.stop(), "p0"))
    assert codes(validate(missing, kg, "p0")) == [(1, V.MISSING_TEXT_PAYLOAD)]


def test_kg_is_the_contract(clock_app, clock_history):
    # drop the Alarm element from the KG: the real app has it, the validator refuses it
    kg = build_kg(clock_history, StubAnnotator())
    for d in (kg.element_facts, kg.transitions, kg.element_actions):
        del d[("p1", 2)]
    s = seq(("p0", Action.click(1), "p1"), ("p1", Action.click(2), "p3"), ("p3", Action.stop(), "p3"))
    assert executes_validly(clock_app, s, "p0")
    assert (2, V.UNKNOWN_ELEMENT) in codes(validate(s, kg, "p0"))


def test_report_json(clock_kg):
    report = validate(seq(("p0", Action.click(1), "p1")), clock_kg, "p0")
    doc = json.loads(report.to_json())
    assert doc == [{"step": 1, "code": "BAD_TERMINAL", "message": doc[0]["message"]}]


def _app_kg_start(rng):
    app = random_app(rng)
    kg = build_kg(explore(app), StubAnnotator())
    start = rng.choice(exploration_order(explore(app)))
    return app, kg, start


@given(st.randoms(use_true_random=False))
def test_soundness(rng):
    app, kg, start = _app_kg_start(rng)
    walk = random_walk(rng, app, start)
    candidates = [walk] + [mutate(rng, app, walk, start)[0] for _ in range(3)]
    for s in candidates:
        if validate(s, kg, start).ok:
            assert executes_validly(app, s, start)
            assert execute_plan(app, s) == s.steps[-1].next_page
    assert validate(walk, kg, start).ok


@given(st.randoms(use_true_random=False))
def test_completeness_under_mutation(rng):
    app, kg, start = _app_kg_start(rng)
    walk = random_walk(rng, app, start)
    bad, t, _ = mutate(rng, app, walk, start)
    report = validate(bad, kg, start)
    assert report
    assert set(report.invalid_steps) & {t - 1, t, t + 1}


@given(st.randoms(use_true_random=False))
def test_pure(rng):
    app, kg, start = _app_kg_start(rng)
    bad, _, _ = mutate(rng, app, random_walk(rng, app, start), start)
    assert validate(bad, kg, start) == validate(bad, kg, start)
