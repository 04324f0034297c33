"""Structural recognizers over read forms.

Namespace declarations, function definitions, lexical scopes and the
shapes the detectors key on (implicit-do bodies, tail positions,
invocation chains).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Iterator, NamedTuple

from .reader import Form, Kind, Span

CORE_VERSION = "1.12.0"
CORE_NAMES: frozenset[str] = frozenset(
    line.strip()
    for line in resources.files("clj_smell").joinpath("data/clojure_core.txt").read_text("utf-8").splitlines()
    if line.strip() and not line.startswith("# ")
)

SPECIAL_FORMS = frozenset({
    "def", "if", "do", "let*", "letfn*", "quote", "var", "fn*", "loop*", "recur", "throw",
    "try", "catch", "finally", "monitor-enter", "monitor-exit", "new", "set!", ".",
    "case*", "deftype*", "reify*", "import*",
})

CORE_MACROS = frozenset({
    "->", "->>", "..", "amap", "and", "areduce", "as->", "assert", "binding", "bound-fn",
    "case", "comment", "cond", "cond->", "cond->>", "condp", "declare", "definline",
    "definterface", "defmacro", "defmethod", "defmulti", "defn", "defn-", "defonce",
    "defprotocol", "defrecord", "defstruct", "deftype", "delay", "doseq", "dosync",
    "dotimes", "doto", "extend-protocol", "extend-type", "fn", "for", "future",
    "gen-class", "gen-interface", "if-let", "if-not", "if-some", "import", "io!",
    "lazy-cat", "lazy-seq", "let", "letfn", "locking", "loop", "memfn", "ns", "or",
    "proxy", "proxy-super", "pvalues", "refer-clojure", "reify", "some->", "some->>",
    "sync", "time", "vswap!", "when", "when-first", "when-let", "when-not", "when-some",
    "while", "with-bindings", "with-in-str", "with-loading-context", "with-local-vars",
    "with-open", "with-out-str", "with-precision", "with-redefs",
})

NON_CALLS = SPECIAL_FORMS | CORE_MACROS

THREADING_FORMS = frozenset({"->", "->>", "some->", "some->>", "cond->", "cond->>", "doto", "as->"})

FN_DEFINERS = frozenset({"defn", "defn-", "defmacro"})


# ---------------------------------------------------------------------------
# Namespace declarations
# ---------------------------------------------------------------------------

@dataclass
class NsInfo:
    name: str | None = None
    aliases: dict[str, str] = field(default_factory=dict)
    refers: dict[str, str] = field(default_factory=dict)
    imports: set[str] = field(default_factory=set)
    requires: set[str] = field(default_factory=set)
    excludes: set[str] = field(default_factory=set)
    defined: set[str] = field(default_factory=set)
    import_specs: list[tuple[str, Form]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add_alias(self, alias: str, target: str) -> None:
        if alias in self.aliases and self.aliases[alias] != target:
            self.notes.append(f"alias {alias} redefined: {self.aliases[alias]} -> {target}")
        self.aliases[alias] = target

    def add_refer(self, sym: str, source: str) -> None:
        if sym in self.refers and self.refers[sym] != source:
            self.notes.append(f"refer {sym} redefined: {self.refers[sym]} -> {source}")
        self.refers[sym] = source

    def add_import(self, class_name: str, spec: Form) -> None:
        self.imports.add(class_name)
        self.import_specs.append((class_name, spec))

    @property
    def imported_short_names(self) -> dict[str, str]:
        return {c.rsplit(".", 1)[-1]: c for c in self.imports}


def strip_meta(form: Form) -> Form:
    while form.kind is Kind.META:
        form = form.children[1]
    return form


def _unquote(form: Form) -> Form:
    form = strip_meta(form)
    return form.children[0] if form.kind is Kind.QUOTE else form


def _sym_text(form: Form) -> str | None:
    form = strip_meta(form)
    if form.kind is Kind.SYMBOL:
        return form.name if form.ns is None else f"{form.ns}/{form.name}"
    return None


def _is_libspec(form: Form) -> bool:
    if form.kind is Kind.SYMBOL:
        return True
    if form.kind is Kind.VECTOR:
        items = form.items
        return len(items) < 2 or items[1].kind is Kind.KEYWORD
    return False


def _libspec(info: NsInfo, spec: Form, prefix: str | None) -> None:
    spec = strip_meta(spec)
    if spec.kind is Kind.SYMBOL:
        lib = _sym_text(spec)
        full = f"{prefix}.{lib}" if prefix else lib
        info.requires.add(full)
        return
    items = spec.items
    lib = _sym_text(items[0]) if items else None
    if lib is None:
        info.notes.append(f"skipped malformed libspec at line {spec.span.start.line}")
        return
    full = f"{prefix}.{lib}" if prefix else lib
    info.requires.add(full)
    opts = items[1:]
    for i in range(0, len(opts) - 1, 2):
        key, val = opts[i], opts[i + 1]
        if key.kind is not Kind.KEYWORD:
            continue
        if key.name in ("as", "as-alias") and _sym_text(val):
            info.add_alias(_sym_text(val), full)
        elif key.name in ("refer", "only") and val.kind in (Kind.VECTOR, Kind.LIST):
            for s in val.items:
                if _sym_text(s):
                    info.add_refer(_sym_text(s), full)
        elif key.name == "rename" and val.kind is Kind.MAP:
            pairs = val.items
            for j in range(0, len(pairs) - 1, 2):
                if _sym_text(pairs[j + 1]):
                    info.add_refer(_sym_text(pairs[j + 1]), full)


def _require_clause(info: NsInfo, specs: Iterable[Form]) -> None:
    for spec in specs:
        spec = _unquote(spec)
        if spec.kind is Kind.KEYWORD:
            continue
        if _is_libspec(spec):
            _libspec(info, spec, None)
        elif spec.kind in (Kind.LIST, Kind.VECTOR) and spec.items and _sym_text(spec.items[0]):
            prefix = _sym_text(spec.items[0])
            for sub in spec.items[1:]:
                if _is_libspec(strip_meta(sub)):
                    _libspec(info, sub, prefix)
                else:
                    info.notes.append(f"skipped nested prefix list at line {sub.span.start.line}")
        else:
            info.notes.append(f"skipped malformed require spec at line {spec.span.start.line}")


def _import_clause(info: NsInfo, specs: Iterable[Form]) -> None:
    for spec in specs:
        spec = _unquote(spec)
        if spec.kind is Kind.SYMBOL:
            info.add_import(_sym_text(spec), spec)
        elif spec.kind in (Kind.LIST, Kind.VECTOR) and spec.items and _sym_text(spec.items[0]):
            package = _sym_text(spec.items[0])
            for cls in spec.items[1:]:
                if _sym_text(cls):
                    info.add_import(f"{package}.{_sym_text(cls)}", spec)
        else:
            info.notes.append(f"skipped malformed import spec at line {spec.span.start.line}")


def parse_ns(form: Form) -> NsInfo | None:
    """Return the namespace declaration described by an ``(ns ...)`` form."""
    form = strip_meta(form)
    if form.kind is not Kind.LIST or form.head_name != "ns" or form.head.ns not in (None, "clojure.core"):
        return None
    items = form.items
    if len(items) < 2 or _sym_text(items[1]) is None:
        return None
    info = NsInfo(name=_sym_text(items[1]))
    for clause in items[2:]:
        if clause.kind is not Kind.LIST or not clause.items or clause.items[0].kind is not Kind.KEYWORD:
            if clause.kind not in (Kind.STRING, Kind.MAP):
                info.notes.append(f"skipped ns clause at line {clause.span.start.line}")
            continue
        key = clause.items[0].name
        rest = clause.items[1:]
        if key == "require":
            _require_clause(info, rest)
        elif key == "use":
            _require_clause(info, rest)
        elif key == "import":
            _import_clause(info, rest)
        elif key == "refer-clojure":
            _refer_clojure(info, rest)
    return info


def _refer_clojure(info: NsInfo, opts: tuple[Form, ...]) -> None:
    for i in range(0, len(opts) - 1, 2):
        if opts[i].kind is Kind.KEYWORD and opts[i].name == "exclude":
            info.excludes.update(_sym_text(s) for s in opts[i + 1].items if _sym_text(s))
        elif opts[i].kind is Kind.KEYWORD and opts[i].name == "only":
            only = {_sym_text(s) for s in opts[i + 1].items if _sym_text(s)}
            info.excludes.update(CORE_NAMES - only - SPECIAL_FORMS)


def apply_top_level(info: NsInfo, forms: Iterable[Form]) -> NsInfo:
    """Record top-level ``require``/``import`` calls and var definitions."""
    for form in forms:
        form = strip_meta(form)
        if form.kind is not Kind.LIST or form.head is None or form.head.kind is not Kind.SYMBOL:
            continue
        head = form.head_name
        if head == "require":
            _require_clause(info, form.args)
        elif head == "use":
            _require_clause(info, form.args)
        elif head == "import":
            _import_clause(info, form.args)
        elif head.startswith("def") and head not in ("defmethod", "default") and form.args:
            name = _sym_text(form.args[0])
            if name and "/" not in name:
                info.defined.add(name)
    return info


# ---------------------------------------------------------------------------
# Function definitions
# ---------------------------------------------------------------------------

class Param(NamedTuple):
    kind: str  # "positional" | "destructure" | "rest"
    form: Form


@dataclass
class Arity:
    params: list[Param]
    body: tuple[Form, ...]
    span: Span
    params_form: Form | None = None

    @property
    def positional(self) -> list[Param]:
        return [p for p in self.params if p.kind != "rest"]

    @property
    def rest(self) -> Param | None:
        return next((p for p in self.params if p.kind == "rest"), None)


@dataclass
class FnDef:
    name: str | None
    kind: str
    is_macro: bool
    is_private: bool
    docstring: str | None
    arities: list[Arity]
    form: Form
    attr_map: Form | None = None
    name_form: Form | None = None
    notes: list[str] = field(default_factory=list)


def _is_private_meta(form: Form) -> bool:
    while form.kind is Kind.META:
        meta = form.children[0]
        if meta.kind is Kind.KEYWORD and meta.name == "private" and meta.ns is None:
            return True
        if meta.kind is Kind.MAP:
            items = meta.items
            for i in range(0, len(items) - 1, 2):
                if items[i].kind is Kind.KEYWORD and items[i].name == "private" and items[i + 1].value is True:
                    return True
        form = form.children[1]
    return False


def parse_params(vec: Form) -> tuple[list[Param], list[str]]:
    params: list[Param] = []
    notes: list[str] = []
    items = strip_meta(vec).items
    i = 0
    while i < len(items):
        p = strip_meta(items[i])
        if p.is_symbol("&"):
            if i + 1 < len(items):
                params.append(Param("rest", items[i + 1]))
                if i + 2 < len(items):
                    notes.append("rest parameter is not last")
            else:
                notes.append("missing rest parameter after &")
            break
        params.append(Param("positional" if p.kind is Kind.SYMBOL else "destructure", items[i]))
        i += 1
    return params, notes


def _arity_from(vec: Form, body: tuple[Form, ...], span: Span) -> tuple[Arity, list[str]]:
    params, notes = parse_params(vec)
    return Arity(params, body, span, strip_meta(vec)), notes


def _fn_head(form: Form) -> str | None:
    if form.kind is not Kind.LIST:
        return None
    head = form.head
    if head is None or head.kind is not Kind.SYMBOL or head.ns not in (None, "clojure.core"):
        return None
    return head.name if head.name in ("defn", "defn-", "defmacro", "fn", "fn*") else None


def classify_defn(form: Form) -> FnDef | None:
    """Recognize ``defn``/``defn-``/``defmacro``/``fn`` forms."""
    kind = _fn_head(form)
    if kind is None:
        return None
    items = form.items
    i = 1
    name = name_form = None
    private = kind == "defn-"
    if kind in FN_DEFINERS:
        if len(items) < 2 or strip_meta(items[1]).kind is not Kind.SYMBOL:
            return None
        name_form = items[1]
        name = strip_meta(name_form).name
        private = private or _is_private_meta(name_form)
        i = 2
    elif len(items) > 1 and strip_meta(items[1]).kind is Kind.SYMBOL:
        name_form = items[1]
        name = strip_meta(name_form).name
        i = 2
    docstring = attr_map = None
    if kind in FN_DEFINERS:
        if i < len(items) - 1 and items[i].kind is Kind.STRING:
            docstring = items[i].value
            i += 1
        if i < len(items) - 1 and items[i].kind is Kind.MAP:
            attr_map = items[i]
            i += 1
    arities: list[Arity] = []
    notes: list[str] = []
    if i >= len(items):
        return None
    first = strip_meta(items[i])
    if first.kind is Kind.VECTOR:
        body = items[i + 1:]
        end = body[-1].span.end if body else items[i].span.end
        arity, arity_notes = _arity_from(items[i], body, Span(items[i].span.start, end))
        arities.append(arity)
        notes.extend(arity_notes)
    elif first.kind is Kind.LIST:
        for clause in items[i:]:
            clause = strip_meta(clause)
            if clause.kind is Kind.MAP:
                continue
            if clause.kind is not Kind.LIST or not clause.items or strip_meta(clause.items[0]).kind is not Kind.VECTOR:
                return None
            arity, arity_notes = _arity_from(clause.items[0], clause.items[1:], clause.span)
            arities.append(arity)
            notes.extend(arity_notes)
    else:
        return None
    counts = [len(a.positional) for a in arities]
    if len(set(counts)) != len(counts):
        notes.append("arities share a positional parameter count")
    return FnDef(name, kind, kind == "defmacro", private, docstring, arities, form,
                 attr_map=attr_map, name_form=name_form, notes=notes)


# ---------------------------------------------------------------------------
# Scopes and symbol resolution
# ---------------------------------------------------------------------------

class Scope:
    """Immutable chain of binding frames; innermost frame first."""

    __slots__ = ("names", "parent")

    def __init__(self, names: frozenset[str] = frozenset(), parent: Scope | None = None):
        self.names = names
        self.parent = parent

    def bind(self, names: Iterable[str]) -> Scope:
        names = frozenset(names)
        return Scope(names, self) if names else self

    def __contains__(self, name: str) -> bool:
        scope = self
        while scope is not None:
            if name in scope.names:
                return True
            scope = scope.parent
        return False

    def frames(self) -> list[frozenset[str]]:
        out, scope = [], self
        while scope is not None:
            out.append(scope.names)
            scope = scope.parent
        return out

    def all_names(self) -> set[str]:
        return set().union(*self.frames())


EMPTY_SCOPE = Scope()
EMPTY_NS = NsInfo()


class Resolution(NamedTuple):
    kind: str  # "local" | "core" | "aliased" | "interop" | "unknown"
    ns: str | None = None
    name: str | None = None


def _class_like(ns_part: str, ns: NsInfo) -> bool:
    last = ns_part.rsplit(".", 1)[-1]
    return last[:1].isupper() or ns_part in ns.imported_short_names


def resolve_symbol(sym: Form, scope: Scope = EMPTY_SCOPE, ns: NsInfo | None = None) -> Resolution:
    ns = ns or EMPTY_NS
    name = sym.name
    if sym.ns is None:
        if name in scope:
            return Resolution("local", None, name)
        if name in ns.refers:
            return Resolution("aliased", ns.refers[name], name)
        if len(name) > 1 and name != ".." and (name[0] == "." or name[-1] == "."):
            return Resolution("interop", None, name)
        if name in CORE_NAMES and name not in ns.excludes and name not in ns.defined:
            return Resolution("core", "clojure.core", name)
        return Resolution("unknown", None, name)
    if sym.ns == "clojure.core":
        return Resolution("core", "clojure.core", name)
    if sym.ns in ns.aliases:
        return Resolution("aliased", ns.aliases[sym.ns], name)
    if _class_like(sym.ns, ns):
        return Resolution("interop", sym.ns, name)
    if "." in sym.ns or sym.ns in ns.requires:
        return Resolution("aliased", sym.ns, name)
    return Resolution("unknown", sym.ns, name)


def core_name(sym: Form | None, scope: Scope = EMPTY_SCOPE, ns: NsInfo | None = None) -> str | None:
    """Name of the clojure.core var ``sym`` refers to, or None."""
    if sym is None or sym.kind is not Kind.SYMBOL:
        return None
    res = resolve_symbol(sym, scope, ns)
    return res.name if res.kind == "core" else None


# ---------------------------------------------------------------------------
# Destructuring
# ---------------------------------------------------------------------------

def binding_names(pattern: Form) -> list[str]:
    """Local names introduced by a binding pattern."""
    out: list[str] = []
    _collect_names(strip_meta(pattern), out)
    return out


def _collect_names(p: Form, out: list[str]) -> None:
    if p.kind is Kind.SYMBOL:
        if p.ns is None and p.name != "&":
            out.append(p.name)
    elif p.kind is Kind.VECTOR:
        items = p.items
        for j, item in enumerate(items):
            item = strip_meta(item)
            if item.kind is Kind.KEYWORD and item.name == "as" and j + 1 < len(items):
                continue
            _collect_names(item, out)
    elif p.kind is Kind.MAP:
        items = p.items
        for j in range(0, len(items) - 1, 2):
            key, val = strip_meta(items[j]), strip_meta(items[j + 1])
            if key.kind is Kind.KEYWORD:
                if key.name in ("keys", "syms", "strs") and val.kind is Kind.VECTOR:
                    for s in val.items:
                        s = strip_meta(s)
                        if s.kind in (Kind.SYMBOL, Kind.KEYWORD):
                            out.append(s.name)
                elif key.name == "as" and val.kind is Kind.SYMBOL:
                    out.append(val.name)
            else:
                _collect_names(key, out)


# ---------------------------------------------------------------------------
# Traversal
# ---------------------------------------------------------------------------

class Visit:
    """One step of a scoped traversal."""

    __slots__ = ("form", "scope", "parent", "role", "core")

    def __init__(self, form: Form, scope: Scope, parent: Visit | None, role: str, core: str | None):
        self.form = form
        self.scope = scope
        self.parent = parent
        self.role = role  # "expr" | "pattern" | "meta" | "arity" | "method"
        self.core = core  # core name of a list's head symbol, if it resolves to clojure.core

    def ancestors(self) -> Iterator[Visit]:
        v = self.parent
        while v is not None:
            yield v
            v = v.parent

    def __repr__(self) -> str:
        return f"Visit({self.form!r}, role={self.role})"


_SEQ_BINDERS = frozenset({
    "let", "loop", "when-let", "if-let", "when-some", "if-some", "when-first", "with-open",
    "with-local-vars", "dotimes", "let*", "loop*",
})
_FOR_BINDERS = frozenset({"doseq", "for"})
_METHOD_HOSTS = frozenset({"reify", "deftype", "defrecord", "proxy", "extend-type", "extend-protocol",
                           "definterface", "defprotocol"})


class _Walker:
    def __init__(self, ns: NsInfo, features: frozenset[str], syntax_quote: bool):
        self.ns = ns
        self.features = features
        self.syntax_quote = syntax_quote
        self.out: list[Visit] = []

    def visit(self, form: Form, scope: Scope, parent: Visit | None, role: str = "expr") -> Visit | None:
        kind = form.kind
        if kind is Kind.DISCARD:
            return None
        core = None
        if kind is Kind.LIST:
            items = form.items
            if items and items[0].kind is Kind.SYMBOL:
                core = core_name(items[0], scope, self.ns)
        v = Visit(form, scope, parent, role, core)
        self.out.append(v)
        if kind is Kind.LIST:
            self.list(form, scope, v)
        elif kind is Kind.ANON_FN:
            names = ["%", "%&", *(f"%{n}" for n in range(1, max(form.max_arg, 1) + 1))]
            self.visit(form.children[0], scope.bind(names), v)
        elif kind is Kind.QUOTE:
            pass
        elif kind is Kind.SYNTAX_QUOTE:
            if self.syntax_quote:
                self.visit(form.children[0], scope, v)
        elif kind is Kind.READER_COND:
            selected = select_branch(form, self.features)
            if selected is not None:
                self.visit(selected, scope, v)
        elif kind is Kind.META:
            self.visit(form.children[0], scope, v, "meta")
            self.visit(form.children[1], scope, v, role)
        elif kind is Kind.TAGGED:
            self.visit(form.children[1], scope, v, role)
        else:
            for c in form.children:
                self.visit(c, scope, v, role)
        return v

    def pattern(self, form: Form, scope: Scope, parent: Visit) -> None:
        """Visit a binding pattern; ``:or`` defaults are expressions."""
        if form.kind is Kind.DISCARD:
            return
        v = Visit(form, scope, parent, "pattern", None)
        self.out.append(v)
        if form.kind is Kind.META:
            self.visit(form.children[0], scope, v, "meta")
            self.pattern(form.children[1], scope, v)
        elif form.kind is Kind.MAP:
            items = form.items
            for j in range(0, len(items) - 1, 2):
                key, val = items[j], items[j + 1]
                self.pattern(key, scope, v)
                if key.kind is Kind.KEYWORD and key.name == "or" and val.kind is Kind.MAP:
                    ov = Visit(val, scope, v, "pattern", None)
                    self.out.append(ov)
                    ditems = val.items
                    for k in range(0, len(ditems) - 1, 2):
                        self.pattern(ditems[k], scope, ov)
                        self.visit(ditems[k + 1], scope, ov)
                else:
                    self.pattern(val, scope, v)
            if len(items) % 2:
                self.pattern(items[-1], scope, v)
        else:
            for c in form.children:
                self.pattern(c, scope, v)

    def bindings(self, vec: Form, scope: Scope, parent: Visit) -> Scope:
        """Visit a sequential binding vector; returns the scope after it."""
        if vec.kind is not Kind.VECTOR:
            self.visit(vec, scope, parent)
            return scope
        v = Visit(vec, scope, parent, "expr", None)
        self.out.append(v)
        items = vec.items
        for j in range(0, len(items), 2):
            if j + 1 < len(items):
                self.visit(items[j + 1], scope, v)
            self.pattern(items[j], scope, v)
            scope = scope.bind(binding_names(items[j]))
        return scope

    def for_bindings(self, vec: Form, scope: Scope, parent: Visit) -> Scope:
        if vec.kind is not Kind.VECTOR:
            self.visit(vec, scope, parent)
            return scope
        v = Visit(vec, scope, parent, "expr", None)
        self.out.append(v)
        items = vec.items
        for j in range(0, len(items) - 1, 2):
            key, val = items[j], items[j + 1]
            if key.kind is Kind.KEYWORD and key.name == "let":
                self.visit(key, scope, v)
                scope = self.bindings(val, scope, v)
            elif key.kind is Kind.KEYWORD:
                self.visit(key, scope, v)
                self.visit(val, scope, v)
            else:
                self.visit(val, scope, v)
                self.pattern(key, scope, v)
                scope = scope.bind(binding_names(key))
        return scope

    def arity(self, params: Form, body: Iterable[Form], scope: Scope, parent: Visit) -> None:
        self.pattern(params, scope, parent)
        inner = scope.bind(binding_names(params))
        for b in body:
            self.visit(b, inner, parent)

    def fn_tail(self, forms: tuple[Form, ...], scope: Scope, parent: Visit) -> None:
        """Visit ``[params] body...`` or ``([params] body...)+`` after a fn head."""
        if forms and strip_meta(forms[0]).kind is Kind.VECTOR:
            self.arity(forms[0], forms[1:], scope, parent)
            return
        for clause in forms:
            c = strip_meta(clause)
            if c.kind is Kind.LIST and c.items and strip_meta(c.items[0]).kind is Kind.VECTOR:
                cv = Visit(clause, scope, parent, "arity", None)
                self.out.append(cv)
                self.arity(c.items[0], c.items[1:], scope, cv)
            else:
                self.visit(clause, scope, parent)

    def list(self, form: Form, scope: Scope, v: Visit) -> None:
        items = form.items
        if not items:
            return
        self.visit(items[0], scope, v)
        rest = items[1:]
        head = v.core
        if head is None:
            if items[0].kind is Kind.SYMBOL and items[0].ns is None and items[0].name in _METHOD_HOSTS \
                    and items[0].name not in scope:
                head = items[0].name
            else:
                for c in rest:
                    self.visit(c, scope, v)
                return
        if head in _SEQ_BINDERS and rest:
            inner = self.bindings(rest[0], scope, v)
            for b in rest[1:]:
                self.visit(b, inner, v)
        elif head in _FOR_BINDERS and rest:
            inner = self.for_bindings(rest[0], scope, v)
            for b in rest[1:]:
                self.visit(b, inner, v)
        elif head in ("fn", "fn*"):
            if rest and strip_meta(rest[0]).kind is Kind.SYMBOL:
                self.pattern(rest[0], scope, v)
                scope = scope.bind([strip_meta(rest[0]).name])
                rest = rest[1:]
            self.fn_tail(rest, scope, v)
        elif head in FN_DEFINERS:
            if head == "defmacro":
                scope = scope.bind(["&form", "&env"])
            j = 0
            while j < len(rest) and strip_meta(rest[j]).kind not in (Kind.VECTOR, Kind.LIST):
                self.visit(rest[j], scope, v)
                j += 1
            if j < len(rest) and rest[j].kind is Kind.MAP:
                self.visit(rest[j], scope, v)
                j += 1
            self.fn_tail(rest[j:], scope, v)
        elif head == "defmethod":
            for c in rest[:2]:
                self.visit(c, scope, v)
            self.fn_tail(rest[2:], scope, v)
        elif head == "letfn" and rest and rest[0].kind is Kind.VECTOR:
            names = [strip_meta(s.items[0]).name for s in rest[0].items
                     if s.kind is Kind.LIST and s.items and strip_meta(s.items[0]).kind is Kind.SYMBOL]
            inner = scope.bind(names)
            bv = Visit(rest[0], scope, v, "expr", None)
            self.out.append(bv)
            for spec in rest[0].items:
                if spec.kind is Kind.LIST and spec.items:
                    sv = Visit(spec, inner, bv, "method", None)
                    self.out.append(sv)
                    self.pattern(spec.items[0], inner, sv)
                    self.fn_tail(spec.items[1:], inner, sv)
                else:
                    self.visit(spec, inner, bv)
            for b in rest[1:]:
                self.visit(b, inner, v)
        elif head == "catch" and len(rest) >= 2:
            self.visit(rest[0], scope, v)
            self.pattern(rest[1], scope, v)
            inner = scope.bind(binding_names(rest[1]))
            for b in rest[2:]:
                self.visit(b, inner, v)
        elif head == "as->" and len(rest) >= 2:
            self.visit(rest[0], scope, v)
            self.pattern(rest[1], scope, v)
            inner = scope.bind(binding_names(rest[1]))
            for b in rest[2:]:
                self.visit(b, inner, v)
        elif head in _METHOD_HOSTS:
            fields: list[str] = []
            for c in rest:
                sc = strip_meta(c)
                if head in ("deftype", "defrecord") and sc.kind is Kind.VECTOR and not fields:
                    self.pattern(c, scope, v)
                    fields = binding_names(sc) or ["%fields"]
                elif sc.kind is Kind.LIST and len(sc.items) >= 2 and sc.items[0].kind is Kind.SYMBOL \
                        and strip_meta(sc.items[1]).kind in (Kind.VECTOR, Kind.LIST):
                    mv = Visit(c, scope, v, "method", None)
                    self.out.append(mv)
                    self.visit(sc.items[0], scope, mv, "pattern")
                    self.fn_tail(sc.items[1:], scope.bind(fields), mv)
                else:
                    self.visit(c, scope, v)
        else:
            for c in rest:
                self.visit(c, scope, v)


def select_branch(form: Form, features: frozenset[str]) -> Form | None:
    """The branch of a reader conditional chosen for ``features``."""
    for feature, branch in form.branches:
        if feature.kind is Kind.KEYWORD and (feature.name in features or feature.name == "default"):
            return branch
    return None


def walk(tree: Iterable[Form], ns: NsInfo | None = None, features: Iterable[str] = ("clj",),
         syntax_quote: bool = False) -> list[Visit]:
    """Scoped pre-order traversal of ``tree``."""
    walker = _Walker(ns or EMPTY_NS, frozenset(features), syntax_quote)
    for form in tree:
        walker.visit(form, EMPTY_SCOPE, None)
    return walker.out


def walk_with_scope(tree: Iterable[Form], ns: NsInfo | None, visitor: Callable[[Form, Scope], object],
                    features: Iterable[str] = ("clj",), syntax_quote: bool = False) -> None:
    for v in walk(tree, ns, features, syntax_quote):
        visitor(v.form, v.scope)


# ---------------------------------------------------------------------------
# Shapes
# ---------------------------------------------------------------------------

_BODY_FROM_1 = frozenset({
    "let", "letfn", "loop", "when", "when-let", "when-not", "when-first", "when-some",
    "doseq", "dotimes", "binding", "locking", "with-open", "with-redefs",
})
_BODY_FROM_0 = frozenset({"do", "future", "delay", "comment", "finally"})


def implicit_do_bodies(form: Form, scope: Scope = EMPTY_SCOPE, ns: NsInfo | None = None) -> list[tuple[Form, ...]]:
    """Body positions of ``form`` that already sequence their forms."""
    if form.kind is not Kind.LIST:
        return []
    head = core_name(form.head, scope, ns)
    if head is None:
        return []
    args = form.args
    if head in FN_DEFINERS or head in ("fn", "fn*"):
        fndef = classify_defn(form)
        return [a.body for a in fndef.arities] if fndef else []
    if head in _BODY_FROM_1:
        return [args[1:]] if args else []
    if head in _BODY_FROM_0:
        return [args]
    if head == "try":
        body, out = [], []
        for a in args:
            if a.kind is Kind.LIST and a.head_name in ("catch", "finally"):
                break
            body.append(a)
        out.append(tuple(body))
        for handler in try_handlers(form):
            out.append(handler.args[2:] if handler.head_name == "catch" else handler.args)
        return out
    if head == "catch":
        return [args[2:]] if len(args) >= 2 else []
    return []


def try_handlers(form: Form) -> list[Form]:
    return [a for a in form.args if a.kind is Kind.LIST and a.head_name in ("catch", "finally")]


def _head(form: Form) -> str | None:
    if form.kind is Kind.LIST and form.head is not None and form.head.kind is Kind.SYMBOL \
            and form.head.ns in (None, "clojure.core"):
        return form.head.name
    return None


def _tails(form: Form) -> Iterator[Form | None]:
    """Forms whose value may be returned; None marks an implicit nil."""
    form_ = strip_meta(form)
    head = _head(form_)
    args = form_.args if head else ()
    if head in ("if", "if-not", "if-let", "if-some") and len(args) >= 2:
        yield from _tails(args[1])
        if len(args) >= 3:
            yield from _tails(args[2])
        else:
            yield None
    elif head in ("when", "when-not", "when-let", "when-some", "when-first") and args:
        if len(args) >= 2:
            yield from _tails(args[-1])
        yield None
    elif head == "cond":
        pairs = [(args[i], args[i + 1]) for i in range(0, len(args) - 1, 2)]
        for _, expr in pairs:
            yield from _tails(expr)
        if not pairs or not _always_true(pairs[-1][0]):
            yield None
    elif head == "case" and args:
        clauses = args[1:]
        for i in range(1, len(clauses), 2):
            yield from _tails(clauses[i])
        if len(clauses) % 2:
            yield from _tails(clauses[-1])
    elif head in ("let", "letfn", "loop", "binding", "locking", "with-open", "do") and args:
        body = args[1:] if head != "do" else args
        if body:
            yield from _tails(body[-1])
        else:
            yield None
    elif head in ("or", "and") and args:
        yield from _tails(args[-1])
    elif head == "try":
        body = implicit_do_bodies(form_)[0]
        if body:
            yield from _tails(body[-1])
        for handler in try_handlers(form_):
            if handler.head_name == "catch" and len(handler.args) > 2:
                yield from _tails(handler.args[-1])
    else:
        yield form


def _always_true(test: Form) -> bool:
    return test.kind is Kind.KEYWORD or (test.kind is Kind.BOOL and test.value is True)


def tail_positions(arity: Arity) -> list[Form]:
    """Forms whose value can become the arity's return value."""
    if not arity.body:
        return []
    return [t for t in _tails(arity.body[-1]) if t is not None]


def tail_positions_with_nil(arity: Arity) -> list[Form | None]:
    if not arity.body:
        return [None]
    return list(_tails(arity.body[-1]))


class ChainInfo(NamedTuple):
    length: int
    direction: str  # "first-arg" | "last-arg" | "mixed"
    elements: tuple[Form, ...]


def is_invocation(form: Form) -> bool:
    """A list calling a function (not a special form or core macro)."""
    if form.kind is not Kind.LIST or not form.items:
        return False
    head = form.items[0]
    if head.kind is Kind.KEYWORD:
        return True
    if head.kind is not Kind.SYMBOL:
        return False
    return not (head.ns in (None, "clojure.core") and head.name in NON_CALLS)


def _chain(form: Form, dirs: frozenset[str]) -> tuple[int, frozenset[str], tuple[Form, ...]]:
    args = form.args
    best = (1, dirs, (form,))
    if not args:
        return best
    options: list[tuple[Form, frozenset[str]]] = []
    if len(args) == 1:
        options.append((args[0], dirs & {"first-arg", "last-arg"}))
    else:
        options.append((args[0], dirs & {"first-arg"}))
        options.append((args[-1], dirs & {"last-arg"}))
    for child, step_dirs in options:
        if step_dirs and is_invocation(child):
            length, d, elems = _chain(child, step_dirs)
            if length + 1 > best[0]:
                best = (length + 1, d, (form, *elems))
    return best


def invocation_chain(form: Form) -> ChainInfo:
    """Longest run of calls nested in a uniformly threadable position."""
    if not is_invocation(form):
        return ChainInfo(0, "mixed", ())
    length, dirs, elems = _chain(form, frozenset({"first-arg", "last-arg"}))
    if length < 2:
        direction = "mixed"
    elif "first-arg" in dirs:
        direction = "first-arg"
    else:
        direction = "last-arg"
    return ChainInfo(length, direction, elems)
