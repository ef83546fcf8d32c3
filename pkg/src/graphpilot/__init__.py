"""Knowledge-graph-guided one-shot action planning for simulated GUI apps."""

from importlib.resources import files

from .app_model import Action, AppSpec, HtmlDoc, PageRegistry, apply_action, load_app_spec, page_id, render_html
from .explorer import ExplorationHistory, check_history, explore
from .generator import Goal, QueryMeter, oracle_generate
from .grammar import ActionSequence, Draft, HtmlRequest, Step, parse_response
from .kg import KnowledgeGraph, StubAnnotator, build_kg
from .planner import PlanSession, execute_plan, plan
from .validator import ValidationReport, ViolationCode, validate


def suite_dir():
    """Directory of the synthetic benchmark suite shipped with the package."""
    return files("graphpilot") / "data" / "suite"


__all__ = [
    "Action", "ActionSequence", "AppSpec", "Draft", "ExplorationHistory", "Goal", "HtmlDoc",
    "HtmlRequest", "KnowledgeGraph", "PageRegistry", "PlanSession", "QueryMeter", "Step",
    "StubAnnotator", "ValidationReport", "ViolationCode", "apply_action", "build_kg",
    "check_history", "execute_plan", "explore", "load_app_spec", "oracle_generate", "page_id",
    "parse_response", "plan", "render_html", "suite_dir", "validate",
]
