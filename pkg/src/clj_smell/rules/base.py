from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

from ..reader import CommentRecord, Form, Span
from ..syntax import EMPTY_NS, NsInfo, Visit, walk

SEVERITIES = ("info", "warning", "error")
SEVERITY_RANK = {s: i for i, s in enumerate(SEVERITIES)}
CATEGORIES = ("clojure-specific", "functional", "traditional")


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    category: str
    severity: str
    span: Span
    file: str
    message: str
    suggestion: str | None = None

    @property
    def line(self) -> int:
        return self.span.start.line

    @property
    def col(self) -> int:
        return self.span.start.col

    def sort_key(self) -> tuple:
        return (self.span.start.line, self.span.start.col, self.rule_id, self.span.end.offset, self.message)


Check = Callable[[Sequence[Form], "FileContext"], list[Diagnostic]]


@dataclass(frozen=True)
class RuleDescriptor:
    rule_id: str
    category: str
    catalog_name: str
    doc_sources: tuple[str, ...]
    kind: str  # "mechanical" | "heuristic"
    check: Check
    description: str
    example: str
    compliant: str
    params: dict = field(default_factory=dict)
    survey: float | None = None  # share of positive survey answers, percent
    default_enabled: bool = True

    @property
    def default_severity(self) -> str:
        return severity_policy(self.category, self.survey, self.kind)


def severity_policy(category: str, survey: float | None, kind: str) -> str:
    """Default severity from catalog category and reported survey agreement."""
    if category == "traditional":
        return "info"
    if survey is not None:
        return "warning" if survey >= 70.0 else "info"
    return "warning" if kind == "mechanical" else "info"


@dataclass
class FileContext:
    """Per-file analysis state shared by all detectors."""

    path: str
    source: str
    comments: list[CommentRecord] = field(default_factory=list)
    ns: NsInfo = field(default_factory=lambda: EMPTY_NS)
    is_test: bool = False
    features: frozenset[str] = frozenset({"clj"})
    params: dict[str, dict] = field(default_factory=dict)
    severities: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self._walks: dict[int, tuple[object, list[Visit]]] = {}

    @cached_property
    def source_bytes(self) -> bytes:
        return self.source.encode("utf-8")

    @cached_property
    def lines(self) -> list[str]:
        return self.source.split("\n")

    def text(self, form: Form) -> str:
        return form.span.slice(self.source_bytes)

    def visits(self, tree: Sequence[Form]) -> list[Visit]:
        cached = self._walks.get(id(tree))
        if cached is None or cached[0] is not tree:
            cached = (tree, walk(tree, self.ns, self.features))
            self._walks[id(tree)] = cached
        return cached[1]

    def param(self, rule_id: str, name: str):
        params = self.params.get(rule_id)
        if params is not None and name in params:
            return params[name]
        from .registry import REGISTRY

        return REGISTRY[rule_id].params[name]

    def severity(self, rule_id: str) -> str:
        if rule_id in self.severities:
            return self.severities[rule_id]
        from .registry import REGISTRY

        return REGISTRY[rule_id].default_severity

    def diag(self, rule_id: str, where: Form | Span, message: str, suggestion: str | None = None,
             severity: str | None = None) -> Diagnostic:
        from .registry import REGISTRY

        span = where if isinstance(where, Span) else where.span
        return Diagnostic(rule_id, REGISTRY[rule_id].category, severity or self.severity(rule_id),
                          span, self.path, message, suggestion)
