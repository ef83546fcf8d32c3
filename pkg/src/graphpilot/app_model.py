"""Simulated apps: deterministic page/element state machines.

An app is a set of pages, each holding elements that lead to a fixed target
page. Pages render to a canonical one-line HTML string, and `PageRegistry`
hands out stable ``p<n>`` identifiers keyed on a digest of those bytes.
"""

from __future__ import annotations

import hashlib
import html
import json
import re
from dataclasses import dataclass, field

from .errors import ActionKindMismatch, BadPageRef, ParseError, SpecError, UnknownElement, UnknownPage

PageRef = str

KINDS = ("button", "input", "checkbox")
ACTION_TYPES = ("click", "text", "stop")
TEXT_PLACEHOLDER = "sample_text"

_PAGE_REF = re.compile(r"p(\d+)")


def page_index(page: PageRef) -> int | None:
    m = _PAGE_REF.fullmatch(page)
    return int(m.group(1)) if m else None


def format_element_ref(page: PageRef, element_id: int) -> str:
    """``(p3, 7)`` -> ``e_3_7``."""
    idx = page_index(page)
    if idx is None:
        raise BadPageRef(f"page id {page!r} is not of the form p<n>")
    return f"e_{idx}_{element_id}"


_ELEMENT_REF = re.compile(r"e_(\d+)_(\d+)")


def parse_element_ref(ref: str) -> tuple[PageRef, int]:
    m = _ELEMENT_REF.fullmatch(ref)
    if not m:
        raise BadPageRef(f"not an element reference: {ref!r}")
    return f"p{int(m.group(1))}", int(m.group(2))


def page_sort_key(page: PageRef) -> tuple:
    """Order canonical ids numerically (p2 before p10); anything else sorts after."""
    idx = page_index(page)
    return (0, idx, "") if idx is not None else (1, 0, page)


@dataclass(frozen=True)
class ElementSpec:
    element_id: int
    kind: str
    label: str
    target_page: PageRef

    @property
    def accepted_action(self) -> str:
        return "text" if self.kind == "input" else "click"


@dataclass(frozen=True)
class PageSpec:
    page_id: PageRef
    title: str
    elements: tuple[ElementSpec, ...] = ()

    def element(self, element_id: int) -> ElementSpec | None:
        for el in self.elements:
            if el.element_id == element_id:
                return el
        return None


@dataclass(frozen=True)
class AppSpec:
    app_id: str
    start_page: PageRef
    pages: tuple[PageSpec, ...]

    def __post_init__(self):
        _validate_app(self)
        object.__setattr__(self, "_by_id", {p.page_id: p for p in self.pages})

    def page(self, page_id: PageRef) -> PageSpec:
        try:
            return self._by_id[page_id]
        except KeyError:
            raise UnknownPage(f"{self.app_id}: no page {page_id!r}") from None

    @property
    def page_ids(self) -> list[PageRef]:
        return [p.page_id for p in self.pages]

    def element_pairs(self) -> set[tuple[PageRef, int]]:
        return {(p.page_id, e.element_id) for p in self.pages for e in p.elements}


@dataclass(frozen=True)
class Action:
    """One agent action. Construction does not enforce well-formedness, because
    the validator must be able to describe malformed model output; use
    `problems()` to check."""

    action_type: str
    element_id: int = 0
    text_payload: str | None = None

    @classmethod
    def stop(cls) -> Action:
        return cls("stop", 0, None)

    @classmethod
    def click(cls, element_id: int) -> Action:
        return cls("click", element_id, None)

    @classmethod
    def text(cls, element_id: int, payload: str) -> Action:
        return cls("text", element_id, payload)

    def problems(self) -> list[str]:
        out = []
        if self.action_type not in ACTION_TYPES:
            out.append(f"unknown action type {self.action_type!r}")
        elif self.action_type == "stop":
            if self.element_id != 0:
                out.append("stop must target element 0")
            if self.text_payload is not None:
                out.append("stop carries no text payload")
        else:
            if self.element_id <= 0:
                out.append(f"{self.action_type} needs an element id > 0")
            if self.action_type == "text" and self.text_payload is None:
                out.append("text action without payload")
            if self.action_type == "click" and self.text_payload is not None:
                out.append("click carries no text payload")
        return out

    def to_json(self) -> dict:
        d = {"action": self.action_type, "element": self.element_id}
        if self.text_payload is not None:
            d["text"] = self.text_payload
        return d

    @classmethod
    def from_json(cls, d: dict) -> Action:
        return cls(d["action"], int(d.get("element", 0)), d.get("text"))


@dataclass(frozen=True)
class HtmlDoc:
    canonical_text: str
    source_page: PageRef

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text.encode("utf-8")).hexdigest()

    @classmethod
    def from_text(cls, text: str) -> HtmlDoc:
        return cls(text, parse_html(text).page_id)


@dataclass
class PageRegistry:
    """Digest -> ``p<n>``. Not thread-safe: give each session its own."""

    ids: dict[str, PageRef] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.ids)


def _validate_app(app: AppSpec) -> None:
    seen: set[PageRef] = set()
    for i, page in enumerate(app.pages):
        if page.page_id in seen:
            raise SpecError(f"pages[{i}].page_id", f"duplicate page id {page.page_id!r}")
        seen.add(page.page_id)
    if app.start_page not in seen:
        raise SpecError("start_page", f"unknown page {app.start_page!r}")
    for i, page in enumerate(app.pages):
        ids: set[int] = set()
        for j, el in enumerate(page.elements):
            path = f"pages[{i}].elements[{j}]"
            if isinstance(el.element_id, bool) or not isinstance(el.element_id, int) or el.element_id <= 0:
                raise SpecError(f"{path}.element_id", "must be a positive integer")
            if el.element_id in ids:
                raise SpecError(f"{path}.element_id", f"duplicate element id {el.element_id}")
            ids.add(el.element_id)
            if el.kind not in KINDS:
                raise SpecError(f"{path}.kind", f"unknown kind {el.kind!r}")
            if el.target_page not in seen:
                raise SpecError(f"{path}.target_page", f"dangling target {el.target_page!r}")


def _require(d: dict, key: str, typ, path: str):
    if not isinstance(d, dict):
        raise SpecError(path, "expected an object")
    if key not in d:
        raise SpecError(f"{path}.{key}" if path else key, "missing field")
    val = d[key]
    if not isinstance(val, typ) or (typ is int and isinstance(val, bool)):
        raise SpecError(f"{path}.{key}" if path else key, f"expected {typ.__name__}")
    return val


def app_from_dict(doc: dict) -> AppSpec:
    app_id = _require(doc, "app_id", str, "")
    start = _require(doc, "start_page", str, "")
    pages = []
    for i, pd in enumerate(_require(doc, "pages", list, "")):
        ppath = f"pages[{i}]"
        elements = []
        for j, ed in enumerate(_require(pd, "elements", list, ppath)):
            epath = f"{ppath}.elements[{j}]"
            el = ElementSpec(
                element_id=_require(ed, "element_id", int, epath),
                kind=_require(ed, "kind", str, epath),
                label=_require(ed, "label", str, epath),
                target_page=_require(ed, "target_page", str, epath),
            )
            # accepted_action is optional in files; when given it must agree with kind
            declared = ed.get("accepted_action")
            if declared is not None and declared != el.accepted_action:
                raise SpecError(f"{epath}.accepted_action",
                                f"kind {el.kind!r} accepts {el.accepted_action!r}, not {declared!r}")
            elements.append(el)
        pages.append(PageSpec(
            page_id=_require(pd, "page_id", str, ppath),
            title=_require(pd, "title", str, ppath),
            elements=tuple(elements),
        ))
    return AppSpec(app_id, start, tuple(pages))


def load_app_spec(text: str) -> AppSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"app spec is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ParseError("app spec must be a JSON object")
    return app_from_dict(doc)


def app_to_dict(app: AppSpec) -> dict:
    return {
        "app_id": app.app_id,
        "start_page": app.start_page,
        "pages": [
            {
                "page_id": p.page_id,
                "title": p.title,
                "elements": [
                    {"element_id": e.element_id, "kind": e.kind, "label": e.label,
                     "target_page": e.target_page}
                    for e in p.elements
                ],
            }
            for p in app.pages
        ],
    }


def dump_app_spec(app: AppSpec) -> str:
    return json.dumps(app_to_dict(app), indent=2, ensure_ascii=False) + "\n"


def relabel_pages(app: AppSpec, mapping: dict[PageRef, PageRef]) -> AppSpec:
    """Rename pages; pages missing from `mapping` keep their id. Page order
    follows the new ids."""
    ren = lambda p: mapping.get(p, p)  # noqa: E731
    pages = [
        PageSpec(ren(p.page_id), p.title,
                 tuple(ElementSpec(e.element_id, e.kind, e.label, ren(e.target_page))
                       for e in p.elements))
        for p in app.pages
    ]
    pages.sort(key=lambda p: page_sort_key(p.page_id))
    return AppSpec(app.app_id, ren(app.start_page), tuple(pages))


def render_html(app: AppSpec, page: PageRef) -> HtmlDoc:
    spec = app.page(page)
    parts = [f'<div page="{_esc(spec.page_id)}" title="{_esc(spec.title)}">']
    for el in sorted(spec.elements, key=lambda e: e.element_id):
        if el.kind == "input":
            parts.append(f'<input id="{el.element_id}" hint="{_esc(el.label)}"></input>')
        else:
            parts.append(f'<button id="{el.element_id}">{_esc(el.label)}</button>')
    parts.append("</div>")
    return HtmlDoc("".join(parts), spec.page_id)


def _esc(s: str) -> str:
    return html.escape(s, quote=True)


@dataclass(frozen=True)
class ParsedElement:
    element_id: int
    kind: str  # "button" (also covers checkbox) or "input"
    label: str


@dataclass(frozen=True)
class ParsedPage:
    page_id: str
    title: str
    elements: tuple[ParsedElement, ...]


_DIV = re.compile(r'<div page="([^"]*)" title="([^"]*)">(.*)</div>', re.S)
_CHILD = re.compile(r'<button id="(\d+)">([^<]*)</button>|<input id="(\d+)" hint="([^"]*)"></input>')


def parse_html(text: str) -> ParsedPage:
    """Inverse of the canonical template. Raises ParseError on anything else."""
    m = _DIV.fullmatch(text)
    if not m:
        raise ParseError(f"not a canonical page rendering: {text[:60]!r}")
    body, pos, elements = m.group(3), 0, []
    for cm in _CHILD.finditer(body):
        if cm.start() != pos:
            raise ParseError(f"unexpected markup at offset {pos}")
        pos = cm.end()
        if cm.group(1) is not None:
            elements.append(ParsedElement(int(cm.group(1)), "button", html.unescape(cm.group(2))))
        else:
            elements.append(ParsedElement(int(cm.group(3)), "input", html.unescape(cm.group(4))))
    if pos != len(body):
        raise ParseError(f"unexpected markup at offset {pos}")
    return ParsedPage(html.unescape(m.group(1)), html.unescape(m.group(2)), tuple(elements))


def apply_action(app: AppSpec, page: PageRef, action: Action) -> PageRef:
    spec = app.page(page)
    bad = action.problems()
    if bad:
        raise ValueError(f"malformed action {action}: {'; '.join(bad)}")
    if action.action_type == "stop":
        return page
    el = spec.element(action.element_id)
    if el is None:
        raise UnknownElement(f"page {page} has no element {action.element_id}")
    if el.accepted_action != action.action_type:
        raise ActionKindMismatch(
            f"element {el.element_id} on {page} is a {el.kind}; {action.action_type} not accepted"
        )
    return el.target_page


def page_id(registry: PageRegistry, doc: HtmlDoc) -> PageRef:
    digest = doc.digest
    pid = registry.ids.get(digest)
    if pid is None:
        pid = f"p{len(registry.ids)}"
        registry.ids[digest] = pid
    return pid
