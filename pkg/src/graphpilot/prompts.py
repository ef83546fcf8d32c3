"""Planning prompt construction.

Section markers are a contract with the generator backends (the mock
backends parse them back), so their names and order must not drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .app_model import HtmlDoc, PageRef, format_element_ref, page_sort_key
from .grammar import ActionSequence, serialize_sequence
from .kg import KnowledgeGraph

__all__ = [
    "BACKGROUND", "OUTPUT_FORMAT", "STEPWISE_BACKGROUND", "STEPWISE_OUTPUT_FORMAT",
    "PromptContext", "format_element_ref", "generate_prompt", "serialize_kg_for_prompt",
    "stepwise_prompt",
]

BACKGROUND = """\
You are a GUI automation agent operating a mobile app. Your job is to produce \
the complete sequence of actions that accomplishes the user's task, starting \
from the current page, in a single answer.
Actions: click (tap an element), text (type a payload into an input element), \
stop (the task is finished; always the final step, with element 0).
Notation: pages are named p<i>. e_i_j denotes the element with id j on page p<i>.
The knowledge graph lists what each page and element does. A transition (X, A) \
means that interacting with element X leads to page A. Only use transitions \
listed there; every step's next page must be the page its element leads to, and \
each step must start on the page the previous step ended on.
If the knowledge graph does not give you enough information to continue, answer \
with the single line REQUEST_HTML <page_id> to receive the HTML of that page, \
then answer again."""

OUTPUT_FORMAT = """\
Answer in this exact format:
ANALYSIS:
<your reasoning, any number of lines>
STEP 1: page=p<i> action=<click|text|stop> element=<e_i_j|0> [text="<payload>"] next=p<k>
STEP 2: ...
The last step must be: STEP <n>: page=p<k> action=stop element=0 next=p<k>
Or answer only: REQUEST_HTML p<i>"""

STEPWISE_BACKGROUND = """\
You are a GUI automation agent operating a mobile app one action at a time. \
Given the task and the HTML of the current page, choose the single next action.
Actions: click, text (type a payload into an input), stop (task finished, element 0).
Notation: e_i_j denotes the element with id j on page p<i>."""

STEPWISE_OUTPUT_FORMAT = """\
Answer with exactly one line:
ACTION action=<click|text|stop> element=<e_i_j|0> [text="<payload>"]"""


@dataclass(frozen=True)
class PromptContext:
    task_description: str
    kg: KnowledgeGraph
    current_page: PageRef
    invalid_steps: tuple[tuple[int, str, str], ...] = ()
    prior_draft: ActionSequence | None = None
    requested_html: HtmlDoc | None = None
    include_transitions: bool = True
    extra_notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.invalid_steps and self.prior_draft is None:
            raise ValueError("feedback on invalid steps needs the draft it refers to")


def _element_key(key):
    return (page_sort_key(key[0]), key[1])


def serialize_kg_for_prompt(kg: KnowledgeGraph, include_transitions: bool = True) -> str:
    lines = ["Page functions:"]
    lines += [f"{p}: {kg.page_facts[p]}" for p in sorted(kg.page_facts, key=page_sort_key)]
    lines.append("Element functions:")
    for key in sorted(kg.element_facts, key=_element_key):
        action = kg.element_actions.get(key, "click")
        lines.append(f"{format_element_ref(*key)}: [{action}] {kg.element_facts[key]}")
    if include_transitions:
        lines.append("Transitions (X, A):")
        lines += [f"({format_element_ref(*key)}, {kg.transitions[key]})"
                  for key in sorted(kg.transitions, key=_element_key)]
    return "\n".join(lines)


def generate_prompt(ctx: PromptContext) -> str:
    sections = [
        ("BACKGROUND", BACKGROUND),
        ("TASK", ctx.task_description),
        ("CURRENT PAGE", ctx.current_page),
        ("KNOWLEDGE GRAPH", serialize_kg_for_prompt(ctx.kg, ctx.include_transitions)),
    ]
    if ctx.requested_html is not None:
        sections.append(("CURRENT HTML", ctx.requested_html.canonical_text))
    feedback = list(ctx.extra_notes)
    if ctx.prior_draft is not None and ctx.invalid_steps:
        feedback.append("Your previous draft:")
        feedback.append(serialize_sequence(ctx.prior_draft))
        feedback += [f"step {k} invalid: {code} - {msg}" for k, code, msg in ctx.invalid_steps]
        feedback.append("Return a corrected complete sequence.")
    if feedback:
        sections.append(("FEEDBACK", "\n".join(feedback)))
    sections.append(("OUTPUT FORMAT", OUTPUT_FORMAT))
    return "\n\n".join(f"[{name}]\n{body}" for name, body in sections) + "\n"


def stepwise_prompt(task_description: str, html: HtmlDoc) -> str:
    sections = [
        ("BACKGROUND", STEPWISE_BACKGROUND),
        ("TASK", task_description),
        ("CURRENT HTML", html.canonical_text),
        ("OUTPUT FORMAT", STEPWISE_OUTPUT_FORMAT),
    ]
    return "\n\n".join(f"[{name}]\n{body}" for name, body in sections) + "\n"


def split_sections(prompt: str) -> dict[str, str]:
    """Inverse of the section layout, for backends that read prompts."""
    out: dict[str, str] = {}
    name = None
    buf: list[str] = []
    for line in prompt.splitlines():
        if line.startswith("[") and line.endswith("]") and line[1:-1].isupper():
            if name is not None:
                out[name] = "\n".join(buf).strip("\n")
            name, buf = line[1:-1], []
        else:
            buf.append(line)
    if name is not None:
        out[name] = "\n".join(buf).strip("\n")
    return out
