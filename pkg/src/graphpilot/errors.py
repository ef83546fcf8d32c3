"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class GraphPilotError(Exception):
    pass


class ParseError(GraphPilotError):
    """Malformed input document (JSON, KG file, history file)."""


class SpecError(GraphPilotError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class UnknownPage(GraphPilotError):
    pass


class UnknownElement(GraphPilotError):
    pass


class ActionKindMismatch(GraphPilotError):
    pass


class HistoryError(GraphPilotError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics) or "invalid history")
        self.diagnostics = diagnostics


class AnnotatorError(GraphPilotError):
    def __init__(self, step_index: int, cause: BaseException):
        super().__init__(f"annotator failed at step {step_index}: {cause}")
        self.step_index = step_index
        self.cause = cause


class AppMismatch(GraphPilotError):
    pass


class BadPageRef(GraphPilotError):
    pass


class ResponseParseError(GraphPilotError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class GeneratorError(GraphPilotError):
    """A backend could not produce a response; the planner charges one iteration."""


class Unreachable(GeneratorError):
    pass


class ScriptExhausted(GeneratorError):
    pass


class TransportError(GeneratorError):
    pass


class AuthError(GeneratorError):
    pass


class ExecutionDivergence(GraphPilotError):
    def __init__(self, step_index: int, expected: str, observed: str):
        super().__init__(
            f"step {step_index}: declared page {expected}, simulator is on {observed}"
        )
        self.step_index = step_index
        self.expected = expected
        self.observed = observed


class ConfigError(GraphPilotError):
    pass
