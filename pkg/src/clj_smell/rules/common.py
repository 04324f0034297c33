"""Helpers shared by several detectors."""

from __future__ import annotations

from ..reader import Form, Kind
from ..syntax import FN_DEFINERS, Scope, Visit, core_name, strip_meta

LAMBDA_HEADS = frozenset({"fn", "fn*"})


def call_args(form: Form, name: str, scope: Scope, ns, nargs: int | None = None) -> tuple[Form, ...] | None:
    """Arguments of ``form`` if it calls clojure.core ``name``."""
    if form.kind is not Kind.LIST or not form.items:
        return None
    if core_name(form.items[0], scope, ns) != name:
        return None
    args = form.args
    if nargs is not None and len(args) != nargs:
        return None
    return args


def is_int(form: Form, value: int) -> bool:
    return form.kind is Kind.NUMBER and form.subtype in ("int", "bigint") and form.value == value


def is_lambda(form: Form, scope: Scope, ns) -> bool:
    form = strip_meta(form)
    if form.kind is Kind.ANON_FN:
        return True
    return form.kind is Kind.LIST and core_name(form.head, scope, ns) in LAMBDA_HEADS


def enclosing_fn(v: Visit) -> Visit | None:
    """Nearest ancestor introducing a function body."""
    for a in v.ancestors():
        if a.form.kind is Kind.ANON_FN or a.role == "method":
            return a
        if a.core in LAMBDA_HEADS or a.core in FN_DEFINERS or a.core == "defmethod":
            return a
    return None


def inside(v: Visit, *cores: str) -> bool:
    return any(a.core in cores for a in v.ancestors())


def call_text(ctx, form: Form, drop: Form | None) -> str:
    """Source text of a call with the argument ``drop`` removed."""
    items = [i for i in form.items if i is not drop]
    if len(items) == 1:
        return ctx.text(items[0])
    return "(" + " ".join(ctx.text(i) for i in items) + ")"
