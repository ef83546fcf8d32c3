import json
from pathlib import Path

import pytest
from hypothesis import settings

from graphpilot import StubAnnotator, build_kg, explore, load_app_spec, suite_dir
from graphpilot.harness import load_suite

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"

# acceptance criterion id -> (title, [(outcome, detail), ...]); parametrized
# tests contribute one entry each
_CRITERIA: dict[str, tuple[str, list]] = {}
_DETAIL_KEY = pytest.StashKey[str]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    rep = (yield).get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        outcome = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        detail = item.stash.get(_DETAIL_KEY, "")
        if rep.skipped and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2]
        callspec = getattr(item, "callspec", None)
        if callspec is not None:
            detail = f"{callspec.id}: {detail}"
        cid, title = marker.args
        _CRITERIA.setdefault(cid, (title, []))[1].append((outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c[2:])):
        title, results = _CRITERIA[cid]
        outcomes = {o for o, _ in results}
        outcome = "FAIL" if "FAIL" in outcomes else ("SKIP" if outcomes == {"SKIP"} else "PASS")
        details = "; ".join(d for _, d in results if d)
        tr.write_line(f"{cid} {outcome}: {title}" + (f" [{details}]" if details else ""))


@pytest.fixture
def detail(request):
    """Attach a measured value to the criterion line of the current test."""
    def put(text: str):
        request.node.stash[_DETAIL_KEY] = text
    return put


@pytest.fixture(scope="session")
def clock_app():
    return load_app_spec((FIXTURES / "clock_app.json").read_text())


@pytest.fixture(scope="session")
def clock_history(clock_app):
    return explore(clock_app)


@pytest.fixture(scope="session")
def clock_kg(clock_history, clock_app):
    return build_kg(clock_history, StubAnnotator(), app=clock_app)


@pytest.fixture(scope="session")
def one_page_app():
    return load_app_spec((FIXTURES / "one_page_app.json").read_text())


@pytest.fixture(scope="session")
def suite():
    return load_suite(suite_dir())


@pytest.fixture
def fixture_text():
    return lambda name: (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture
def fixture_json():
    return lambda name: json.loads((FIXTURES / name).read_text(encoding="utf-8"))
