import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphpilot.app_model import (
    Action, HtmlDoc, PageRegistry, app_from_dict, app_to_dict, apply_action, dump_app_spec,
    format_element_ref, load_app_spec, page_id, parse_element_ref, parse_html, render_html,
)
from graphpilot.errors import (
    ActionKindMismatch, BadPageRef, ParseError, SpecError, UnknownElement, UnknownPage,
)
from graphpilot.explorer import explore, exploration_order

from helpers import random_app


def test_one_page_app_loads(one_page_app):
    assert len(one_page_app.pages) == 1
    assert one_page_app.pages[0].elements == ()


def test_clock_fixture_shape(clock_app):
    assert len(clock_app.pages) == 4
    assert sum(len(p.elements) for p in clock_app.pages) == 6


def test_clock_ground_truth_executes(clock_app):
    page = "p0"
    for action in [Action.click(1), Action.click(1), Action.click(1), Action.stop()]:
        page = apply_action(clock_app, page, action)
    assert page == "p2"


def test_dangling_target_rejected(clock_app):
    doc = app_to_dict(clock_app)
    doc["pages"][0]["elements"][0]["target_page"] = "p9"
    with pytest.raises(SpecError) as e:
        app_from_dict(doc)
    assert "p9" in str(e.value)


@pytest.mark.parametrize("mutate, needle", [
    (lambda d: d["pages"][0]["elements"][0].update(kind="slider"), "kind"),
    (lambda d: d["pages"][0]["elements"][0].update(element_id=0), "element_id"),
    (lambda d: d["pages"][1]["elements"][1].update(element_id=1), "duplicate"),
    (lambda d: d.update(start_page="p7"), "start_page"),
    (lambda d: d["pages"][0]["elements"][0].update(accepted_action="text"), "accepted_action"),
    (lambda d: d["pages"].append(dict(d["pages"][0])), "duplicate"),
])
def test_invalid_specs(clock_app, mutate, needle):
    doc = app_to_dict(clock_app)
    mutate(doc)
    with pytest.raises(SpecError, match=needle):
        app_from_dict(doc)


def test_bad_json_is_parse_error():
    with pytest.raises(ParseError):
        load_app_spec("{not json")


def test_render_empty_page(one_page_app):
    assert render_html(one_page_app, "p0").canonical_text == '<div page="p0" title="Home"></div>'


def test_render_matches_golden(clock_app, fixture_text):
    assert render_html(clock_app, "p2").canonical_text.encode() == fixture_text("stopwatch.html").encode()


def test_render_is_deterministic(clock_app):
    assert render_html(clock_app, "p1") == render_html(clock_app, "p1")


def test_render_input_and_escaping():
    app = app_from_dict({"app_id": "x", "start_page": "p0", "pages": [{
        "page_id": "p0", "title": 'A "b" <c>', "elements": [
            {"element_id": 2, "kind": "input", "label": "Name & more", "target_page": "p0"},
            {"element_id": 1, "kind": "checkbox", "label": "Ok", "target_page": "p0"}]}]})
    html = render_html(app, "p0").canonical_text
    assert html == ('<div page="p0" title="A &quot;b&quot; &lt;c&gt;"><button id="1">Ok</button>'
                    '<input id="2" hint="Name &amp; more"></input></div>')
    parsed = parse_html(html)
    assert parsed.title == 'A "b" <c>'
    assert [(e.element_id, e.kind, e.label) for e in parsed.elements] == [
        (1, "button", "Ok"), (2, "input", "Name & more")]


def test_render_unknown_page(clock_app):
    with pytest.raises(UnknownPage):
        render_html(clock_app, "p9")


def test_apply_action_examples(clock_app):
    assert apply_action(clock_app, "p2", Action.stop()) == "p2"
    assert apply_action(clock_app, "p1", Action.click(1)) == "p2"
    with pytest.raises(UnknownElement):
        apply_action(clock_app, "p0", Action.click(99))
    with pytest.raises(ActionKindMismatch):
        apply_action(clock_app, "p0", Action.text(1, "hi"))
    with pytest.raises(ValueError):
        apply_action(clock_app, "p0", Action("click", 0))


@pytest.mark.parametrize("action, ok", [
    (Action.stop(), True),
    (Action("stop", 3), False),
    (Action("click", 0), False),
    (Action("text", 1), False),
    (Action("click", 1, "x"), False),
    (Action("hover", 1), False),
    (Action.text(2, ""), True),
])
def test_action_invariants(action, ok):
    assert (not action.problems()) == ok


def test_action_json_round_trip():
    for a in [Action.stop(), Action.click(3), Action.text(1, "hé\n")]:
        assert Action.from_json(json.loads(json.dumps(a.to_json()))) == a


def test_page_id_first_seen_and_idempotent(clock_app):
    reg = PageRegistry()
    doc = render_html(clock_app, "p3")
    assert page_id(reg, doc) == "p0"
    assert page_id(reg, doc) == "p0"
    assert page_id(reg, render_html(clock_app, "p1")) == "p1"
    assert page_id(reg, HtmlDoc.from_text(doc.canonical_text)) == "p0"


def test_registry_recovers_fixture_ids(clock_app):
    reg = PageRegistry()
    order = exploration_order(explore(clock_app))
    assert order == ["p0", "p1", "p2", "p3"]
    recovered = {page_id(reg, render_html(clock_app, p)): p for p in order}
    assert recovered == {p: p for p in clock_app.page_ids}


def test_element_ref_examples():
    assert format_element_ref("p1", 1) == "e_1_1"
    assert format_element_ref("p0", 12) == "e_0_12"
    assert parse_element_ref("e_0_12") == ("p0", 12)
    with pytest.raises(BadPageRef):
        format_element_ref("home", 1)


@given(st.randoms(use_true_random=False))
def test_spec_round_trip_and_render_parse(rng):
    app = random_app(rng)
    assert load_app_spec(dump_app_spec(app)) == app
    for p in app.pages:
        parsed = parse_html(render_html(app, p.page_id).canonical_text)
        assert parsed.page_id == p.page_id and parsed.title == p.title
        assert [e.element_id for e in parsed.elements] == [e.element_id for e in p.elements]


@given(st.randoms(use_true_random=False))
def test_apply_action_deterministic_and_closed(rng):
    app = random_app(rng)
    for p in app.pages:
        for e in p.elements:
            a = Action.text(e.element_id, "x") if e.kind == "input" else Action.click(e.element_id)
            first = apply_action(app, p.page_id, a)
            assert first == apply_action(app, p.page_id, a) == e.target_page
            assert first in app.page_ids


@given(st.randoms(use_true_random=False))
def test_distinct_pages_get_distinct_ids(rng):
    app = random_app(rng)
    reg = PageRegistry()
    ids = [page_id(reg, render_html(app, p)) for p in app.page_ids]
    assert len(set(ids)) == len(ids)
