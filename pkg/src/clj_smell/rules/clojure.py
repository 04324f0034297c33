"""Detectors for Clojure-specific smells."""

from __future__ import annotations

from typing import Sequence

from ..reader import Form, Kind, iter_forms
from ..syntax import (
    FN_DEFINERS,
    THREADING_FORMS,
    NsInfo,
    _import_clause,
    binding_names,
    classify_defn,
    core_name,
    implicit_do_bodies,
    invocation_chain,
    is_invocation,
    parse_ns,
    strip_meta,
)
from .base import Diagnostic, FileContext
from .common import call_args, call_text, inside, is_int

_MACRO_MACHINERY = frozenset({Kind.SYNTAX_QUOTE, Kind.UNQUOTE, Kind.UNQUOTE_SPLICING, Kind.QUOTE})
_CODE_BUILDERS = frozenset({"list", "list*", "cons", "concat", "macroexpand", "macroexpand-1", "gensym"})


def _builds_code(form: Form) -> bool:
    for f in iter_forms(form, discards=False):
        if f.kind in _MACRO_MACHINERY:
            return True
        if f.kind is Kind.SYMBOL and f.ns is None and f.name in ("&form", "&env"):
            return True
        if f.kind is Kind.LIST and f.head_name in _CODE_BUILDERS:
            return True
    return False


def check_unnecessary_macro(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    out = []
    for v in ctx.visits(tree):
        if v.core != "defmacro":
            continue
        fndef = classify_defn(v.form)
        if fndef is None or any(_builds_code(b) for a in fndef.arities for b in a.body):
            continue
        out.append(ctx.diag(
            "unnecessary-macro", v.form,
            f"macro `{fndef.name}` never quotes or transforms code; use `defn` instead",
            f"(defn {fndef.name} ...)"))
    return out


def check_non_namespaced_keys(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    min_keys = ctx.param("non-namespaced-keys", "min-keys")
    skip: set[int] = set()
    out = []
    for v in ctx.visits(tree):
        form = v.form
        if v.core in FN_DEFINERS:
            fndef = classify_defn(form)
            if fndef and fndef.attr_map is not None:
                skip.add(id(fndef.attr_map))
            continue
        if form.kind is not Kind.MAP or v.role != "expr" or id(form) in skip:
            continue
        parent = v.parent
        if parent is not None and (parent.form.kind is Kind.NS_MAP or parent.core == "ns"):
            continue
        keys = form.items[::2]
        keywords = [k for k in keys if k.kind is Kind.KEYWORD]
        plain = [k for k in keywords if k.ns is None and not k.auto]
        if len(plain) >= min_keys and len(plain) == len(keywords):
            out.append(ctx.diag(
                "non-namespaced-keys", form,
                f"map literal uses {len(plain)} unqualified keyword keys; "
                f"namespaced keys (e.g. :entity/{plain[0].name}) avoid collisions"))
    return out


def check_improper_emptiness(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    out = []
    ns = ctx.ns
    for v in ctx.visits(tree):
        head = v.core
        if head not in ("not", "=", "<=", "<", ">", ">=", "not="):
            continue
        form, scope = v.form, v.scope
        args = form.args
        coll = target = None
        if head == "not" and len(args) == 1:
            inner = call_args(args[0], "empty?", scope, ns, 1)
            if inner:
                coll, target = inner[0], "seq"
        elif len(args) == 2:
            a, b = args
            counted_a = call_args(a, "count", scope, ns, 1)
            counted_b = call_args(b, "count", scope, ns, 1)
            if head == "=" and counted_b and is_int(a, 0):
                coll, target = counted_b[0], "empty?"
            elif head == "=" and counted_a and is_int(b, 0):
                coll, target = counted_a[0], "empty?"
            elif head == "<=" and counted_a and is_int(b, 0):
                coll, target = counted_a[0], "empty?"
            elif head == ">" and counted_a and is_int(b, 0):
                coll, target = counted_a[0], "seq"
            elif head == "<" and counted_b and is_int(a, 0):
                coll, target = counted_b[0], "seq"
            elif head == ">=" and counted_a and is_int(b, 1):
                coll, target = counted_a[0], "seq"
            elif head == "not=" and counted_b and is_int(a, 0):
                coll, target = counted_b[0], "seq"
            elif head == "not=" and counted_a and is_int(b, 0):
                coll, target = counted_a[0], "seq"
        if coll is None:
            continue
        suggestion = f"({target} {ctx.text(coll)})"
        extra = " (or `not-empty` to keep the collection)" if target == "seq" else ""
        out.append(ctx.diag("improper-emptiness-check", form,
                            f"verbose emptiness check; use `{suggestion}`{extra}", suggestion))
    return out


def check_missing_map_default(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    out = []
    for v in ctx.visits(tree):
        if v.core == "get" and len(v.form.args) == 2:
            m, k = v.form.args
            suggestion = f"(get {ctx.text(m)} {ctx.text(k)} <not-found>)"
            out.append(ctx.diag("missing-map-default", v.form,
                                "`get` without a not-found value cannot tell a missing key from a nil value",
                                suggestion))
    return out


def _empty_seed(form: Form) -> Kind | None:
    if form.kind is Kind.QUOTE:
        form = form.children[0]
        if form.kind is not Kind.LIST:
            return None
    if form.kind in (Kind.VECTOR, Kind.LIST, Kind.SET) and not form.items:
        return form.kind
    return None


def check_unnecessary_into(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    out = []
    for v in ctx.visits(tree):
        if v.core != "into" or len(v.form.args) != 2:
            continue
        seed, coll = v.form.args
        kind = _empty_seed(seed)
        if kind is None:
            continue
        text = ctx.text
        if kind is Kind.VECTOR:
            mapped = call_args(coll, "map", v.scope, ctx.ns)
            filtered = call_args(coll, "filter", v.scope, ctx.ns, 2)
            if mapped is not None and len(mapped) >= 2:
                suggestion = "(mapv " + " ".join(text(a) for a in mapped) + ")"
            elif filtered is not None:
                suggestion = "(filterv " + " ".join(text(a) for a in filtered) + ")"
            else:
                suggestion = f"(vec {text(coll)})"
        elif kind is Kind.LIST:
            suggestion = f"(reverse (seq {text(coll)}))"
        else:
            suggestion = f"(set {text(coll)})"
        note = "; note that into a list reverses the order" if kind is Kind.LIST else ""
        out.append(ctx.diag("unnecessary-into", v.form,
                            f"`into` an empty literal; `{suggestion}` is more direct{note}", suggestion))
    return out


def _uses(form: Form, name: str) -> bool:
    return any(f.kind is Kind.SYMBOL and f.ns is None and f.name == name for f in iter_forms(form, discards=False))


def _conditional_update(init: Form, name: str) -> tuple[Form, Form, bool] | None:
    """``(if t expr name)`` shapes; returns (test, update, negated)."""
    if init.kind is not Kind.LIST or init.head_name not in ("if", "if-not") or init.head.ns is not None:
        return None
    args = init.args
    if len(args) != 3:
        return None
    test, then, other = args
    negated = init.head_name == "if-not"
    if other.is_symbol(name) and _uses(then, name):
        return test, then, negated
    if then.is_symbol(name):
        return test, other, not negated
    return None


def check_conditional_buildup(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    min_rebinds = ctx.param("conditional-build-up", "min-rebinds")
    out = []
    for v in ctx.visits(tree):
        if v.core != "let" or not v.form.args or v.form.args[0].kind is not Kind.VECTOR:
            continue
        items = v.form.args[0].items
        pairs = [(strip_meta(items[i]), items[i + 1]) for i in range(0, len(items) - 1, 2)]
        run: list[tuple[int, tuple[Form, Form, bool]]] = []
        for i, (pattern, init) in enumerate([*pairs, (None, None)]):
            update = None
            if pattern is not None and pattern.kind is Kind.SYMBOL:
                update = _conditional_update(init, pattern.name)
            if update and run and pairs[run[0][0]][0].name == pattern.name:
                run.append((i, update))
                continue
            if len(run) >= min_rebinds:
                out.append(_buildup_diag(ctx, pairs, run))
            run = [(i, update)] if update else []
    return out


def _buildup_diag(ctx: FileContext, pairs, run) -> Diagnostic:
    first_i, last_i = run[0][0], run[-1][0]
    name = pairs[first_i][0].name
    start = pairs[first_i][0].span.start
    end = pairs[last_i][1].span.end
    seed = ctx.text(pairs[first_i - 1][1]) if first_i > 0 and pairs[first_i - 1][0].is_symbol(name) else name
    steps = []
    for _, (test, update, negated) in run:
        args = update.args if update.kind is Kind.LIST else ()
        if update.kind is not Kind.LIST or not args or not args[0].is_symbol(name):
            steps = None
            break
        test_text = f"(not {ctx.text(test)})" if negated else ctx.text(test)
        steps.append(f"{test_text} {call_text(ctx, update, args[0])}")
    suggestion = f"(cond-> {seed} " + " ".join(steps) + ")" if steps else None
    from ..reader import Span

    return ctx.diag("conditional-build-up", Span(start, end),
                    f"`{name}` is rebuilt through {len(run)} conditional rebindings; use `cond->`",
                    suggestion)


def check_verbose_check(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    ns = ctx.ns
    out = []
    for v in ctx.visits(tree):
        head = v.core
        form, scope = v.form, v.scope
        args = form.args
        suggestion = None
        numeric = False
        if head == "not" and len(args) == 1:
            inner = call_args(args[0], "nil?", scope, ns, 1)
            if inner:
                suggestion = f"(some? {ctx.text(inner[0])})"
        elif head == "if" and len(args) == 3:
            if args[1].kind is Kind.BOOL and args[1].value is True and args[2].kind is Kind.BOOL \
                    and args[2].value is False:
                suggestion = f"(boolean {ctx.text(args[0])})"
        elif head in ("=", "not=", "<", ">") and len(args) == 2:
            a, b = args
            for lit, other in ((a, b), (b, a)):
                if head in ("=", "not=") and lit.kind is Kind.NIL:
                    suggestion = f"({'nil?' if head == '=' else 'some?'} {ctx.text(other)})"
                elif head == "=" and lit.kind is Kind.BOOL:
                    suggestion = f"({'true?' if lit.value else 'false?'} {ctx.text(other)})"
                elif is_int(lit, 0) and other.kind not in (Kind.NUMBER, Kind.NIL) \
                        and not call_args(other, "count", scope, ns):
                    if head == "=":
                        pred = "zero?"
                    elif head == "<":
                        pred = "pos?" if lit is a else "neg?"
                    elif head == ">":
                        pred = "neg?" if lit is a else "pos?"
                    else:
                        continue
                    suggestion, numeric = f"({pred} {ctx.text(other)})", True
                if suggestion:
                    break
        if suggestion is None:
            continue
        message = f"use the idiomatic predicate `{suggestion}`"
        if numeric:
            message += " (note: the predicate throws on non-numbers)"
        out.append(ctx.diag("verbose-check", form, message, suggestion,
                            severity="info" if numeric else None))
    return out


def check_production_doall(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    if ctx.is_test:
        return []
    names = {"doall", "dorun"} if ctx.param("production-doall", "include-dorun") else {"doall"}
    return [ctx.diag("production-doall", v.form,
                     f"`{v.core}` forces a whole lazy sequence in production code; "
                     "prefer an eager function (mapv, run!, doseq) or keep it lazy")
            for v in ctx.visits(tree) if v.core in names]


def _splice_do(ctx: FileContext, outer: Form, do_form: Form) -> str:
    """Source of ``outer`` with ``do_form`` replaced by its body."""
    data = ctx.source_bytes
    start, end = outer.span.start.offset, outer.span.end.offset
    d0, d1 = do_form.span.start.offset, do_form.span.end.offset
    args = do_form.args
    inner = data[args[0].span.start.offset:args[-1].span.end.offset] if args else b""
    before = data[start:d0]
    if not args:
        before = before.rstrip()
    return (before + inner + data[d1:end]).decode("utf-8")


def check_redundant_do(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    found: dict[int, tuple[Form, str, str | None]] = {}
    for v in ctx.visits(tree):
        form = v.form
        if form.kind is not Kind.LIST:
            continue
        if v.core == "do" and len(form.args) == 1 and id(form) not in found:
            found[id(form)] = (form, "`do` wraps a single expression", ctx.text(form.args[0]))
        if v.core is None:
            continue
        bodies = implicit_do_bodies(form, v.scope, ctx.ns)
        if v.core == "try":
            bodies = bodies[:1]  # handlers are visited on their own
        for body in bodies:
            for b in body:
                if b.kind is Kind.LIST and b.head_name == "do" and b.head.ns is None and id(b) not in found:
                    found[id(b)] = (b, f"redundant `do`: the body of `{v.core}` already sequences its forms",
                                    _splice_do(ctx, form, b))
    return [ctx.diag("redundant-do", f, msg, sugg) for f, msg, sugg in found.values()]


def _thread_suggestion(ctx: FileContext, chain) -> str:
    elems = chain.elements
    first = chain.direction == "first-arg"
    macro = "->" if first else "->>"
    inner = elems[-1]
    if inner.args:
        start = inner.args[0] if first else inner.args[-1]
        steps = list(elems)
    else:
        start, steps = inner, list(elems[:-1])
    parts = []
    for i in range(len(steps) - 1, -1, -1):
        drop = steps[i + 1] if i + 1 < len(steps) else start
        parts.append(call_text(ctx, steps[i], drop))
    return f"({macro} {ctx.text(start)} " + " ".join(parts) + ")"


def check_thread_ignorance(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    min_chain = ctx.param("thread-ignorance", "min-chain")
    covered: set[int] = set()
    out = []
    for v in ctx.visits(tree):
        form = v.form
        if form.kind is not Kind.LIST or id(form) in covered or v.role != "expr" or not is_invocation(form):
            continue
        chain = invocation_chain(form)
        if chain.length < min_chain or chain.direction == "mixed":
            continue
        covered.update(id(e) for e in chain.elements)
        if inside(v, *THREADING_FORMS):
            continue
        suggestion = _thread_suggestion(ctx, chain)
        macro = "->" if chain.direction == "first-arg" else "->>"
        out.append(ctx.diag("thread-ignorance", form,
                            f"{chain.length} nested calls; thread them with `{macro}`", suggestion))
    return out


def check_nested_forms(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    covered: set[int] = set()
    out = []
    for v in ctx.visits(tree):
        construct = v.core
        if construct not in ("let", "doseq", "for") or id(v.form) in covered:
            continue
        levels = [v.form]
        scope = v.scope
        current = v.form
        while True:
            args = current.args
            if len(args) != 2 or args[0].kind is not Kind.VECTOR:
                break
            body = args[1]
            names = [n for p in args[0].items[::2] for n in binding_names(p)]
            scope = scope.bind(names)
            if core_name(body.head if body.kind is Kind.LIST else None, scope, ctx.ns) != construct \
                    or not body.args or body.args[0].kind is not Kind.VECTOR:
                break
            levels.append(body)
            current = body
        if len(levels) < 2:
            continue
        covered.update(id(f) for f in levels)
        bindings = " ".join(ctx.text(b) for f in levels for b in f.args[0].items)
        body_text = " ".join(ctx.text(b) for b in levels[-1].args[1:])
        suggestion = f"({construct} [{bindings}] {body_text})"
        message = f"nested `{construct}` forms; combine their bindings into one vector"
        if construct == "for":
            message += " (a single `for` yields a flat sequence)"
        out.append(ctx.diag("nested-forms", v.form, message, suggestion))
    return out


_RT = "clojure.lang.RT"


def check_direct_rt_usage(tree: Sequence[Form], ctx: FileContext) -> list[Diagnostic]:
    out = []
    imports = NsInfo()
    for form in tree:
        info = parse_ns(form)
        if info is not None:
            imports.import_specs.extend(info.import_specs)
            imports.imports.update(info.imports)
        elif form.kind is Kind.LIST and form.head_name == "import":
            _import_clause(imports, form.args)
    seen: set[int] = set()
    for cls, spec in imports.import_specs:
        if cls == _RT and id(spec) not in seen:
            seen.add(id(spec))
            out.append(ctx.diag("direct-rt-usage", spec,
                                "importing clojure.lang.RT couples code to compiler internals"))
    short = {**imports.imported_short_names, **ctx.ns.imported_short_names}
    for v in ctx.visits(tree):
        f = v.form
        if f.kind is not Kind.SYMBOL or v.role != "expr":
            continue
        hit = f.ns == _RT or (f.ns is None and f.name == _RT) or (f.ns is not None and short.get(f.ns) == _RT)
        if hit and not inside(v, "ns", "import"):
            out.append(ctx.diag("direct-rt-usage", f,
                                f"`{f.text}` calls the internal runtime class; use the public clojure.core API"))
    return out
