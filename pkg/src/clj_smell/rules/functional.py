"""Detectors for functional-style smells."""

from __future__ import annotations

from typing import Sequence

from ..reader import Form, Kind
from ..syntax import (
    NON_CALLS,
    THREADING_FORMS,
    Arity,
    Visit,
    classify_defn,
    core_name,
    is_invocation,
    resolve_symbol,
    strip_meta,
    tail_positions,
    tail_positions_with_nil,
)
from .base import Diagnostic, FileContext
from .common import LAMBDA_HEADS, call_args, enclosing_fn, is_lambda

_DEFN = frozenset({"defn", "defn-"})
_ARG_INDEX = {"%": 1, **{f"%{n}": n for n in range(1, 21)}}


def _plain_fn_symbol(sym: Form, ctx: FileContext, v: Visit) -> bool:
    if sym.kind is not Kind.SYMBOL or sym.name.startswith("%"):
        return False
    res = resolve_symbol(sym, v.scope, ctx.ns)
    if res.kind == "interop":
        return False
    if res.kind == "local":
        return True
    return not (sym.ns in (None, "clojure.core") and sym.name in NON_CALLS)


def check_trivial_lambda(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    out = []
    for v in ctx.visits(tree):
        form = v.form
        head = None
        if form.kind is Kind.ANON_FN:
            body = form.children[0]
            items = body.items
            if not items or form.rest_arg or len(items) < 2:
                continue
            indices = [_ARG_INDEX.get(a.name) if a.kind is Kind.SYMBOL and a.ns is None else None
                       for a in items[1:]]
            if indices != list(range(1, len(items))) or form.max_arg != len(items) - 1:
                continue
            head = items[0]
        elif v.core in ("fn", "fn*"):
            args = form.args
            if len(args) != 2 or args[0].kind is not Kind.VECTOR:
                continue
            params = args[0].items
            body = args[1]
            if not params or any(p.kind is not Kind.SYMBOL or p.ns is not None or p.name == "&" for p in params):
                continue
            names = [p.name for p in params]
            if len(set(names)) != len(names) or body.kind is not Kind.LIST:
                continue
            items = body.items
            if len(items) != len(names) + 1 or [a.name if a.kind is Kind.SYMBOL and a.ns is None else None
                                                for a in items[1:]] != names:
                continue
            if items[0].kind is Kind.SYMBOL and items[0].ns is None and items[0].name in names:
                continue
            head = items[0]
        if head is None or not _plain_fn_symbol(head, ctx, v):
            continue
        name = ctx.text(head)
        out.append(ctx.diag("trivial-lambda", form,
                            f"anonymous function only forwards its arguments; pass `{name}` directly", name))
    return out


_GENERATORS = "clojure.test.check.generators"


def check_inefficient_filtering(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    out = []
    ns = ctx.ns
    for v in ctx.visits(tree):
        form = v.form
        if form.kind is not Kind.LIST or not form.items:
            continue
        head = form.items[0]
        if head.kind is Kind.SYMBOL and head.name == "such-that":
            res = resolve_symbol(head, v.scope, ns)
            if res.kind == "aliased" and res.ns == _GENERATORS:
                out.append(ctx.diag("inefficient-filtering", form,
                                    "`such-that` discards generated values until one passes; "
                                    "build valid values directly with `fmap` or `bind`"))
            continue
        inner = call_args(form, "first", v.scope, ns, 1)
        if not inner:
            continue
        filtered = call_args(inner[0], "filter", v.scope, ns, 2)
        if filtered and call_args(filtered[1], "repeatedly", v.scope, ns) is not None:
            out.append(ctx.diag("inefficient-filtering", form,
                                "generating values and filtering them until one fits; "
                                "generate a valid value directly by transforming the input"))
    return out


_COMPOSERS = ("comp", "partial")


def _composition_depth(form: Form, v: Visit, ctx: FileContext) -> int:
    head = core_name(form.head, v.scope, ctx.ns) if form.kind is Kind.LIST else None
    if head not in _COMPOSERS:
        return 0
    return 1 + max((_composition_depth(a, v, ctx) for a in form.args), default=0)


def check_overabstracted_composition(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    max_arity = ctx.param("overabstracted-composition", "max-comp-arity")
    out = []
    for v in ctx.visits(tree):
        if v.core not in _COMPOSERS:
            continue
        form = v.form
        parent = v.parent
        nested_in_composer = parent is not None and parent.core in _COMPOSERS and form in parent.form.args
        depth = 0 if nested_in_composer else _composition_depth(form, v, ctx)
        if depth >= 2:
            out.append(ctx.diag("overabstracted-composition", form,
                                f"`{v.core}` nested {depth} levels deep; a named function or "
                                "threading form shows the data flow more clearly"))
        elif v.core == "comp" and len(form.args) >= max_arity:
            out.append(ctx.diag("overabstracted-composition", form,
                                f"`comp` of {len(form.args)} functions; consider a named function "
                                "or a threading form"))
    return out


def _nesting(form: Form, ctx: FileContext, v: Visit) -> tuple[int, Form | None]:
    """Invocation depth of ``form`` and the outermost call of its deepest chain."""
    kind = form.kind
    if kind in (Kind.QUOTE, Kind.SYNTAX_QUOTE, Kind.DISCARD):
        return 0, None
    if kind is Kind.META:
        return _nesting(form.children[1], ctx, v)
    if kind is Kind.READER_COND:
        from ..syntax import select_branch

        branch = select_branch(form, ctx.features)
        return _nesting(branch, ctx, v) if branch is not None else (0, None)
    best: tuple[int, Form | None] = (0, None)
    for c in form.items:
        d = _nesting(c, ctx, v)
        if d[0] > best[0]:
            best = d
    if kind is not Kind.LIST or not form.items:
        return best
    head = form.items[0]
    threading = head.kind is Kind.SYMBOL and head.ns in (None, "clojure.core") and head.name in THREADING_FORMS
    if is_invocation(form) or threading or head.kind is Kind.LIST:
        return best[0] + 1, form
    return best


def check_deep_nesting(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    max_depth = ctx.param("deep-nesting", "max-depth")
    out = []
    for v in ctx.visits(tree):
        if v.core not in ("defn", "defn-", "defmacro", "defmethod"):
            continue
        if v.core == "defmethod":
            bodies = [a for a in v.form.args[2:]]
        else:
            fndef = classify_defn(v.form)
            if fndef is None:
                continue
            bodies = [b for a in fndef.arities for b in a.body]
        best: tuple[int, Form | None] = (0, None)
        for b in bodies:
            d = _nesting(b, ctx, v)
            if d[0] > best[0]:
                best = d
        if best[0] >= max_depth and best[1] is not None:
            out.append(ctx.diag("deep-nesting", best[1],
                                f"calls nested {best[0]} deep; extract named steps or use a threading form"))
    return out


def _lambda_tails(form: Form, ctx: FileContext, v: Visit) -> list[Form]:
    form = strip_meta(form)
    if form.kind is Kind.ANON_FN:
        body = form.children[0]
        return tail_positions(Arity([], (body,), body.span))
    fndef = classify_defn(form)
    if fndef is None:
        return []
    return [t for a in fndef.arities for t in tail_positions(a)]


def _curry_chain(form: Form, ctx: FileContext, v: Visit) -> list[Form]:
    """Longest chain of lambdas each returned from the tail of the previous."""
    best: list[Form] = []
    for t in _lambda_tails(form, ctx, v):
        if is_lambda(t, v.scope, ctx.ns):
            chain = _curry_chain(strip_meta(t), ctx, v)
            if len(chain) > len(best):
                best = chain
    return [form, *best]


def check_hof_overuse(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    max_curry = ctx.param("hof-overuse", "max-curry")
    covered: set[int] = set()
    out = []
    for v in ctx.visits(tree):
        form = v.form
        if id(form) in covered:
            continue
        if not (form.kind is Kind.ANON_FN or v.core in LAMBDA_HEADS or v.core in _DEFN):
            continue
        chain = _curry_chain(form, ctx, v)
        if len(chain) < max_curry:
            continue
        covered.update(id(f) for f in chain)
        out.append(ctx.diag("hof-overuse", form,
                            f"{len(chain)} levels of functions returning functions; "
                            "take the arguments together or name the intermediate functions"))
    return out


_TRANSIENT_OPS = frozenset({"conj!", "assoc!", "dissoc!", "pop!", "disj!", "persistent!"})


def _effect_name(v: Visit, ctx: FileContext, effects: frozenset[str]) -> str | None:
    sym = v.form
    if sym.kind is not Kind.SYMBOL or v.role != "expr":
        return None
    name = sym.name
    if name not in effects and not (name.endswith("!") and len(name) > 1 and name not in _TRANSIENT_OPS):
        return None
    if resolve_symbol(sym, v.scope, ctx.ns).kind == "local":
        return None
    if name in effects and sym.ns not in (None, "clojure.core") and not name.endswith("!"):
        return None
    return ctx.text(sym)


_LAZY_FN_FIRST = frozenset({
    "map", "map-indexed", "mapcat", "filter", "remove", "keep", "keep-indexed", "iterate",
    "take-while", "drop-while", "partition-by",
})
_LAZY_BODIES = frozenset({"lazy-seq", "lazy-cat", "concat"})


def _in_sequence_xform(v: Visit) -> bool:
    p, child = v.parent, v
    if p is not None and p.core == "comp":
        p, child = p.parent, p
    return p is not None and p.core == "sequence" and bool(p.form.args) and p.form.args[0] is child.form


def _lazy_positions(v: Visit, ctx: FileContext) -> tuple[Form, ...]:
    core = v.core
    args = v.form.args if v.form.kind is Kind.LIST else ()
    if core in _LAZY_FN_FIRST and args:
        if len(args) >= 2 or _in_sequence_xform(v):
            return (args[0],)
    elif core == "for":
        return args[1:]
    elif core in _LAZY_BODIES:
        return args
    elif core == "repeatedly" and args and is_lambda(args[-1], v.scope, ctx.ns):
        return (args[-1],)
    return ()


def _is_boundary(v: Visit) -> bool:
    return v.form.kind is Kind.ANON_FN or v.role == "method" or v.core in LAMBDA_HEADS \
        or v.core in ("defn", "defn-", "defmacro", "defmethod", "reify", "proxy")


def check_lazy_side_effects(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    effects = frozenset(ctx.param("lazy-side-effects", "effects"))
    found: dict[int, tuple[Visit, str]] = {}
    for v in ctx.visits(tree):
        effect = _effect_name(v, ctx, effects)
        if effect is None:
            continue
        child = v
        for a in v.ancestors():
            if any(p is child.form for p in _lazy_positions(a, ctx)):
                found.setdefault(id(a.form), (a, effect))
                break
            if _is_boundary(a):
                parent = a.parent
                if parent is None or not any(p is a.form for p in _lazy_positions(parent, ctx)):
                    break
            child = a
    out = []
    for a, effect in found.values():
        args = a.form.args
        suggestion = None
        if a.core == "map" and len(args) == 2:
            suggestion = f"(run! {ctx.text(args[0])} {ctx.text(args[1])})"
        out.append(ctx.diag("lazy-side-effects", a.form,
                            f"side effect `{effect}` inside lazy `{a.core}` runs only when the sequence "
                            "is realized; use `run!`, `doseq` or an eager variant", suggestion))
    return out


def check_hidden_side_effects(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    effects = frozenset(ctx.param("hidden-side-effects", "effects"))
    allow = frozenset(ctx.param("hidden-side-effects", "allowlist"))
    found: dict[int, tuple[Visit, str]] = {}
    for v in ctx.visits(tree):
        effect = _effect_name(v, ctx, effects)
        if effect is None:
            continue
        owner = enclosing_fn(v)
        if owner is not None and owner.core in _DEFN:
            found.setdefault(id(owner.form), (owner, effect))
    out = []
    for owner, effect in found.values():
        fndef = classify_defn(owner.form)
        if fndef is None or fndef.name is None or fndef.name.endswith("!") or fndef.name in allow:
            continue
        out.append(ctx.diag("hidden-side-effects", owner.form,
                            f"`{fndef.name}` performs side effects (`{effect}`) its name does not announce; "
                            "mark it with a `!` suffix or move the effect to the caller",
                            f"{fndef.name}!"))
    return out


def _accepts(arity: Arity, n: int) -> bool:
    k = len(arity.positional)
    return n == k or (arity.rest is not None and n >= k)


def _self_call(ctx: FileContext, v: Visit, owner: Visit, fndef) -> bool:
    """Whether the call at ``v`` recurses rather than delegating to another arity."""
    if len(fndef.arities) < 2:
        return True
    clause = next((a for a in v.ancestors() if a.role == "arity" and a.parent is owner), None)
    n = len(v.form.args)
    target = next((a for a in fndef.arities if _accepts(a, n)), None)
    if clause is None or target is None:
        return True
    return target.span == strip_meta(clause.form).span


def _loop_iterates(ctx: FileContext, loop: Visit, recur: Visit) -> str | None:
    bindings = loop.form.args[0] if loop.form.args else None
    if bindings is None or bindings.kind is not Kind.VECTOR:
        return None
    names = [strip_meta(p).name if strip_meta(p).kind is Kind.SYMBOL else None for p in bindings.items[::2]]
    for i, arg in enumerate(recur.form.args):
        if i >= len(names) or names[i] is None:
            continue
        for step in ("rest", "next"):
            stepped = call_args(arg, step, recur.scope, ctx.ns, 1)
            if stepped and stepped[0].is_symbol(names[i]):
                return names[i]
    return None


def _has_termination_test(ctx: FileContext, visits: list[Visit], loop: Visit, name: str) -> bool:
    for v in visits:
        if v.core in ("seq", "empty?", "not-empty") and len(v.form.args) == 1 and v.form.args[0].is_symbol(name):
            if any(a is loop for a in v.ancestors()):
                return True
    return False


def check_explicit_recursion(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    visits = ctx.visits(tree)
    found: dict[int, tuple[Form, str]] = {}
    for v in visits:
        form = v.form
        if v.core == "recur":
            target = next((a for a in v.ancestors()
                           if a.core in ("loop", "fn", "fn*", "defn", "defn-", "defmethod")
                           or a.form.kind is Kind.ANON_FN or a.role == "method"), None)
            if target is None or target.core != "loop" or id(target.form) in found:
                continue
            name = _loop_iterates(ctx, target, v)
            if name and _has_termination_test(ctx, visits, target, name):
                found[id(target.form)] = (target.form, f"loop walks `{name}` element by element with "
                                                        "first/rest; `reduce`, `map` or `filter` state the intent")
            continue
        if form.kind is not Kind.SYMBOL or form.ns is not None or v.parent is None:
            continue
        parent = v.parent
        if parent.form.kind is not Kind.LIST or parent.form.items[0] is not form:
            continue
        owner = next((a for a in v.ancestors() if a.core in _DEFN), None)
        if owner is None or id(owner.form) in found:
            continue
        fndef = classify_defn(owner.form)
        if fndef is None or fndef.name != form.name:
            continue
        if resolve_symbol(form, v.scope, ctx.ns).kind == "local":
            continue
        if not _self_call(ctx, parent, owner, fndef):
            continue
        found[id(owner.form)] = (owner.form, f"`{fndef.name}` calls itself; prefer `reduce`, `map`, "
                                             "`filter` or another sequence function when applicable")
    return [ctx.diag("explicit-recursion", f, msg) for f, msg in found.values()]


def _hiccup(form: Form) -> bool:
    return bool(form.items) and form.items[0].kind is Kind.KEYWORD


def check_positional_return(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    out = []
    for v in ctx.visits(tree):
        if v.core not in _DEFN:
            continue
        fndef = classify_defn(v.form)
        if fndef is None:
            continue
        for arity in fndef.arities:
            tails = tail_positions_with_nil(arity)
            if not tails or not all(t is not None and strip_meta(t).kind is Kind.VECTOR
                                    and len(strip_meta(t).items) >= 2 and not _hiccup(strip_meta(t))
                                    for t in tails):
                continue
            where = v.form if len(fndef.arities) == 1 else arity.span
            width = max(len(strip_meta(t).items) for t in tails)
            out.append(ctx.diag("positional-return", where,
                                f"`{fndef.name}` returns a {width}-element vector whose meaning depends on "
                                "position; return a map with named keys"))
    return out
