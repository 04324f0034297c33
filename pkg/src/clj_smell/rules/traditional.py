"""Detectors for general-purpose smells: size and commenting."""

from __future__ import annotations

from typing import Sequence

from ..reader import ATOMS, Form, Kind, iter_forms
from ..syntax import FN_DEFINERS, classify_defn, strip_meta
from .base import Diagnostic, FileContext


def _counted_params(arity) -> int:
    positional = arity.positional
    if positional and strip_meta(positional[-1].form).kind is Kind.MAP:
        positional = positional[:-1]
    return len(positional)


def check_long_parameter_list(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    max_params = ctx.param("long-parameter-list", "max-params")
    out = []
    for v in ctx.visits(tree):
        if v.core not in FN_DEFINERS and v.core not in ("fn", "fn*"):
            continue
        fndef = classify_defn(v.form)
        if fndef is None:
            continue
        for arity in fndef.arities:
            n = _counted_params(arity)
            if n > max_params:
                label = f"`{fndef.name}`" if fndef.name else "function"
                out.append(ctx.diag("long-parameter-list", arity.params_form or v.form,
                                    f"{label} takes {n} positional parameters (more than {max_params}); "
                                    "group related ones into a map"))
    return out


def _compound_count(body: Sequence[Form]) -> int:
    return sum(1 for b in body for f in iter_forms(b, discards=False) if f.kind not in ATOMS)


def check_long_function(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    max_lines = ctx.param("long-function", "max-lines")
    max_forms = ctx.param("long-function", "max-forms")
    out = []
    for v in ctx.visits(tree):
        if v.core not in FN_DEFINERS:
            continue
        fndef = classify_defn(v.form)
        if fndef is None:
            continue
        for arity in fndef.arities:
            if not arity.body:
                continue
            lines = arity.body[-1].span.end.line - arity.body[0].span.start.line + 1
            forms = _compound_count(arity.body)
            if lines <= max_lines and forms <= max_forms:
                continue
            where = v.form if len(fndef.arities) == 1 else arity.span
            reason = f"{lines} lines" if lines > max_lines else f"{forms} nested forms"
            out.append(ctx.diag("long-function", where,
                                f"`{fndef.name}` body has {reason}; split it into smaller functions"))
    return out


def _rich_comment_ranges(form: Form) -> list[tuple[int, int]]:
    return [(f.span.start.offset, f.span.end.offset) for f in iter_forms(form, discards=False)
            if f.kind is Kind.LIST and f.head_name == "comment" and f.head.ns in (None, "clojure.core")]


def check_comment_heavy(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    min_comments = ctx.param("comment-heavy", "min-comments")
    max_ratio = ctx.param("comment-heavy", "max-ratio")
    comments = [c for c in ctx.comments if c.kind == "line-comment"]
    if len(comments) < min_comments:
        return []
    out = []
    for v in ctx.visits(tree):
        if v.core not in FN_DEFINERS:
            continue
        start, end = v.form.span.start.offset, v.form.span.end.offset
        excluded = _rich_comment_ranges(v.form)
        inside = [c for c in comments if start <= c.span.start.offset < end
                  and not any(a <= c.span.start.offset < b for a, b in excluded)]
        if len(inside) < min_comments:
            continue
        first, last = v.form.span.start.line, v.form.span.end.line
        comment_cols = {c.span.start.line: c.span.start.col for c in comments
                        if first <= c.span.start.line <= last}
        code_lines = 0
        for line_no in range(first, last + 1):
            text = ctx.lines[line_no - 1]
            col = comment_cols.get(line_no)
            if col is not None:
                text = text[:col - 1]
            if text.strip():
                code_lines += 1
        ratio = len(inside) / max(code_lines, 1)
        if ratio >= max_ratio:
            name = classify_defn(v.form)
            label = f"`{name.name}`" if name and name.name else "definition"
            out.append(ctx.diag("comment-heavy", v.form,
                                f"{label} carries {len(inside)} comment lines for {code_lines} code lines; "
                                "clearer names and smaller functions need fewer comments"))
    return out
