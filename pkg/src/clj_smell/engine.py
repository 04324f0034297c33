"""Configuration, file discovery, per-file linting, suppressions and aggregation."""

from __future__ import annotations

import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Final, Iterable

from .reader import CommentRecord, Form, Kind, ReadError, SourcePos, Span, read_forms
from .rules.base import SEVERITIES, SEVERITY_RANK, Diagnostic, FileContext
from .rules.registry import CATALOG_SIZE, OUT_OF_SCOPE, REGISTRY
from .syntax import NsInfo, apply_top_level, parse_ns

CONFIG_FILE: Final = ".clj-smell.edn"
DEFAULT_TEST_PATHS: Final = ("test/**", "*_test.clj*")
DEFAULT_EXTENSIONS: Final = ("clj", "cljs", "cljc")
TOOL_CATEGORY: Final = "tool"
OUTPUT_FORMATS: Final = ("text", "json")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Config:
    paths: tuple[str, ...] = (".",)
    test_paths: tuple[str, ...] = DEFAULT_TEST_PATHS
    extensions: tuple[str, ...] = DEFAULT_EXTENSIONS
    features: frozenset[str] = frozenset({"clj"})
    rules: dict[str, dict] = field(default_factory=dict)
    traditional_enabled: bool = True
    output: str = "text"
    fail_level: str = "warning"
    warnings: tuple[str, ...] = ()
    source: str | None = None

    def enabled(self, rule_id: str) -> bool:
        rule = REGISTRY[rule_id]
        explicit = self.rules.get(rule_id, {}).get("enabled")
        if explicit is not None:
            return explicit
        if rule.category == "traditional" and not self.traditional_enabled:
            return False
        return rule.default_enabled

    def severity(self, rule_id: str) -> str:
        return self.rules.get(rule_id, {}).get("severity") or REGISTRY[rule_id].default_severity

    def params(self, rule_id: str) -> dict:
        return {**REGISTRY[rule_id].params, **self.rules.get(rule_id, {}).get("params", {})}

    def enabled_rules(self) -> list[str]:
        return [r for r in REGISTRY if self.enabled(r)]

    def with_rule(self, rule_id: str, **settings) -> Config:
        rules = {k: {**v, "params": dict(v.get("params", {}))} for k, v in self.rules.items()}
        entry = rules.setdefault(rule_id, {"params": {}})
        for key, value in settings.items():
            if key == "params":
                entry["params"].update(value)
            else:
                entry[key] = value
        return replace(self, rules=rules)


# ---------------------------------------------------------------------------
# EDN configuration
# ---------------------------------------------------------------------------

def edn_value(form: Form):
    """Plain Python value of an EDN literal form."""
    kind = form.kind
    if kind is Kind.MAP:
        items = form.items
        if len(items) % 2:
            raise ConfigError(f"map literal with odd element count at line {form.span.start.line}")
        return {_key(edn_value(items[i])): edn_value(items[i + 1]) for i in range(0, len(items), 2)}
    if kind in (Kind.VECTOR, Kind.LIST):
        return [edn_value(c) for c in form.items]
    if kind is Kind.SET:
        return frozenset(_key(edn_value(c)) for c in form.items)
    if kind in (Kind.KEYWORD, Kind.SYMBOL):
        return form.name if form.ns is None else f"{form.ns}/{form.name}"
    if kind in (Kind.STRING, Kind.NUMBER, Kind.BOOL, Kind.CHAR):
        return form.value
    if kind is Kind.NIL:
        return None
    raise ConfigError(f"unsupported form in configuration at line {form.span.start.line}: {kind.value}")


def _key(value):
    return tuple(value) if isinstance(value, list) else value


def read_edn_map(text: str, origin: str) -> dict:
    forms, _, errors = read_forms(text)
    if errors:
        e = errors[0]
        raise ConfigError(f"{origin}:{e.span.start.line}:{e.span.start.col}: {e.message}")
    if len(forms) != 1 or forms[0].kind is not Kind.MAP:
        raise ConfigError(f"{origin}: configuration must be a single map")
    return edn_value(forms[0])


def _check_param(rule_id: str, name: str, value, default) -> str | None:
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif isinstance(default, list):
        ok = isinstance(value, (list, frozenset)) and all(isinstance(v, str) for v in value)
    else:
        ok = True
    if not ok:
        return f"rule {rule_id}: parameter {name} expects a value like {default!r}, got {value!r}; ignored"
    return None


def apply_config_data(config: Config, data: dict, origin: str) -> Config:
    """Overlay a parsed configuration map onto ``config``."""
    warnings = list(config.warnings)
    changes: dict = {}

    def str_list(key: str) -> tuple[str, ...]:
        value = data[key]
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, (list, frozenset)) or not all(isinstance(v, str) for v in value):
            raise ConfigError(f"{origin}: {key} must be a collection of strings")
        return tuple(sorted(value) if isinstance(value, frozenset) else value)

    for key in data:
        if key == "paths":
            changes["paths"] = str_list(key)
        elif key == "test-paths":
            changes["test_paths"] = str_list(key)
        elif key == "extensions":
            changes["extensions"] = tuple(e.lstrip(".") for e in str_list(key))
        elif key == "features":
            changes["features"] = frozenset(str_list(key))
        elif key == "traditional":
            if not isinstance(data[key], bool):
                raise ConfigError(f"{origin}: traditional must be true or false")
            changes["traditional_enabled"] = data[key]
        elif key == "output":
            if data[key] not in OUTPUT_FORMATS:
                raise ConfigError(f"{origin}: output must be one of {', '.join(OUTPUT_FORMATS)}")
            changes["output"] = data[key]
        elif key == "fail-level":
            if data[key] not in SEVERITIES:
                raise ConfigError(f"{origin}: fail-level must be one of {', '.join(SEVERITIES)}")
            changes["fail_level"] = data[key]
        elif key == "rules":
            if not isinstance(data[key], dict):
                raise ConfigError(f"{origin}: rules must be a map")
        else:
            warnings.append(f"{origin}: unknown configuration key {key}")
    result = replace(config, **changes)
    for rule_id, entry in (data.get("rules") or {}).items():
        if rule_id not in REGISTRY:
            warnings.append(f"{origin}: unknown rule {rule_id}")
            continue
        if isinstance(entry, bool):
            result = result.with_rule(rule_id, enabled=entry)
            continue
        if not isinstance(entry, dict):
            warnings.append(f"{origin}: settings for rule {rule_id} must be a map or boolean; ignored")
            continue
        settings: dict = {"params": {}}
        defaults = REGISTRY[rule_id].params
        for name, value in entry.items():
            if name == "enabled":
                if isinstance(value, bool):
                    settings["enabled"] = value
                else:
                    warnings.append(f"{origin}: rule {rule_id}: enabled must be true or false; ignored")
            elif name == "severity":
                if value in SEVERITIES:
                    settings["severity"] = value
                else:
                    warnings.append(f"{origin}: rule {rule_id}: unknown severity {value!r}; ignored")
            elif name in defaults:
                problem = _check_param(rule_id, name, value, defaults[name])
                if problem:
                    warnings.append(f"{origin}: {problem}")
                else:
                    settings["params"][name] = sorted(value) if isinstance(value, frozenset) else value
            else:
                warnings.append(f"{origin}: rule {rule_id}: unknown parameter {name}")
        result = result.with_rule(rule_id, **settings)
    return replace(result, warnings=tuple(warnings))


def find_config(start_dir: str | os.PathLike) -> Path | None:
    current = Path(start_dir).resolve()
    if current.is_file():
        current = current.parent
    for directory in (current, *current.parents):
        candidate = directory / CONFIG_FILE
        if candidate.is_file():
            return candidate
    return None


def load_config(start_dir: str | os.PathLike = ".", explicit_path: str | os.PathLike | None = None) -> Config:
    """Defaults overlaid with the explicit config file or the nearest ``.clj-smell.edn``."""
    path = Path(explicit_path) if explicit_path is not None else find_config(start_dir)
    if path is None:
        return Config()
    try:
        text = path.read_text("utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read configuration {path}: {e}") from e
    return replace(apply_config_data(Config(), read_edn_map(text, str(path)), str(path)), source=str(path))


# ---------------------------------------------------------------------------
# Discovery
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def glob_regex(pattern: str) -> re.Pattern:
    """Compile a ``*``/``**`` glob; it may match at any directory boundary."""
    out = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if pattern.startswith("**/", i):
            out.append("(?:[^/]+/)*")
            i += 3
        elif pattern.startswith("**", i):
            out.append(".*")
            i += 2
        elif ch == "*":
            out.append("[^/]*")
            i += 1
        elif ch == "?":
            out.append("[^/]")
            i += 1
        else:
            out.append(re.escape(ch))
            i += 1
    return re.compile("(?:^|.*/)" + "".join(out) + "$")


def is_test_path(path: str, patterns: Iterable[str]) -> bool:
    posix = path.replace(os.sep, "/")
    return any(glob_regex(p).match(posix) for p in patterns)


@dataclass(frozen=True)
class SourceFile:
    path: str
    is_test: bool


def discover_files(config: Config) -> tuple[list[SourceFile], list[tuple[str, str]]]:
    """Source files under ``config.paths`` and any (path, message) errors."""
    exts = {"." + e for e in config.extensions}
    found: dict[str, str] = {}
    errors: list[tuple[str, str]] = []

    def add(path: str) -> None:
        canonical = os.path.realpath(path)
        if canonical not in found or path < found[canonical]:
            found[canonical] = path

    def on_error(e: OSError) -> None:
        errors.append((e.filename or "?", f"cannot read directory: {e.strerror}"))

    for root in config.paths:
        root = os.path.normpath(root)
        if os.path.isfile(root):
            if os.path.splitext(root)[1] in exts:
                add(root)
        elif os.path.isdir(root):
            for dirpath, dirnames, filenames in os.walk(root, onerror=on_error):
                dirnames.sort()
                for name in filenames:
                    if os.path.splitext(name)[1] in exts:
                        add(os.path.join(dirpath, name))
        else:
            errors.append((root, "no such file or directory"))
    files = sorted(set(found.values()), key=lambda p: p.replace(os.sep, "/"))
    return [SourceFile(p.replace(os.sep, "/"), is_test_path(p, config.test_paths)) for p in files], errors


# ---------------------------------------------------------------------------
# Linting
# ---------------------------------------------------------------------------

@dataclass
class FileResult:
    path: str
    diagnostics: list[Diagnostic] = field(default_factory=list)
    suppressed_count: int = 0
    io_error: bool = False

    @property
    def detected(self) -> int:
        return len([d for d in self.diagnostics if d.rule_id in REGISTRY]) + self.suppressed_count


_ORIGIN = Span(SourcePos(1, 1, 0), SourcePos(1, 1, 0))


def _tool_diag(rule_id: str, severity: str, span: Span, path: str, message: str) -> Diagnostic:
    return Diagnostic(rule_id, TOOL_CATEGORY, severity, span, path, message)


def read_source(path: str) -> str:
    with open(path, "rb") as fh:
        data = fh.read()
    text = data.decode("utf-8")
    return text[1:] if text.startswith("﻿") else text


def namespace_info(forms: list[Form]) -> NsInfo:
    info = None
    for form in forms:
        parsed = parse_ns(form)
        if parsed is not None:
            info = parsed
            break
    return apply_top_level(info or NsInfo(), forms)


def lint_source(source: str, path: str, config: Config, is_test: bool = False) -> FileResult:
    forms, comments, errors = read_forms(source)
    diagnostics = [_tool_diag("parse-error", "error", e.span, path, e.message) for e in errors]
    rule_ids = config.enabled_rules()
    ctx = FileContext(
        path, source, comments, namespace_info(forms), is_test, config.features,
        params={r: config.params(r) for r in rule_ids},
        severities={r: config.severity(r) for r in rule_ids},
    )
    found: list[Diagnostic] = []
    for rule_id in rule_ids:
        found.extend(REGISTRY[rule_id].check(forms, ctx))
    kept, suppressed, warnings = apply_suppressions(found, comments, ctx.lines, path)
    result = FileResult(path, sorted(diagnostics + kept + warnings, key=Diagnostic.sort_key), suppressed)
    return result


def lint_file(path: str, config: Config, is_test: bool | None = None) -> FileResult:
    if is_test is None:
        is_test = is_test_path(path, config.test_paths)
    try:
        source = read_source(path)
    except (OSError, UnicodeDecodeError) as e:
        message = e.strerror if isinstance(e, OSError) and e.strerror else str(e)
        return FileResult(path, [_tool_diag("io-error", "error", _ORIGIN, path, f"cannot read file: {message}")],
                          io_error=True)
    return lint_source(source, path, config, is_test)


# ---------------------------------------------------------------------------
# Suppressions
# ---------------------------------------------------------------------------

_DIRECTIVE = re.compile(r"\s*clj-smell\s*:")
_DIRECTIVE_FULL = re.compile(r"\s*clj-smell\s*:\s*(ignore|ignore-file)\s*\[([^\]]*)\]\s*$")


@dataclass(frozen=True)
class Directive:
    scope: str  # "ignore" | "ignore-file"
    rules: frozenset[str] | None  # None means every rule
    lines: frozenset[int]


def _code_lines(lines: list[str], comments: list[CommentRecord]) -> set[int]:
    """Line numbers that hold something other than whitespace and comments."""
    comment_cols = {c.span.start.line: c.span.start.col for c in comments}
    out = set()
    for i, text in enumerate(lines, 1):
        col = comment_cols.get(i)
        if (text[:col - 1] if col else text).strip():
            out.add(i)
    return out


def next_code_line(line: int, code_lines: set[int], last: int) -> int | None:
    for candidate in range(line + 1, last + 1):
        if candidate in code_lines:
            return candidate
    return None


def parse_directives(comments: list[CommentRecord], lines: list[str],
                     path: str) -> tuple[list[Directive], list[Diagnostic]]:
    directives, warnings = [], []
    code = None
    for c in comments:
        if c.kind != "line-comment" or not _DIRECTIVE.match(c.text):
            continue
        m = _DIRECTIVE_FULL.match(c.text)
        if m is None:
            warnings.append(_tool_diag("config-warning", "warning", c.span, path,
                                       "malformed clj-smell directive; expected ignore[rule, ...] "
                                       "or ignore-file[rule, ...]"))
            continue
        ids = [r for r in re.split(r"[\s,]+", m.group(2).strip()) if r]
        unknown = [r for r in ids if r not in REGISTRY]
        if unknown:
            warnings.append(_tool_diag("config-warning", "warning", c.span, path,
                                       f"unknown rule in clj-smell directive: {', '.join(unknown)}"))
        known = [r for r in ids if r in REGISTRY]
        if ids and not known:
            continue
        if code is None:
            code = _code_lines(lines, comments)
        line = c.span.start.line
        target = {line}
        following = next_code_line(line, code, len(lines))
        if following is not None:
            target.add(following)
        directives.append(Directive(m.group(1), frozenset(known) if ids else None, frozenset(target)))
    return directives, warnings


def apply_suppressions(diags: list[Diagnostic], comments: list[CommentRecord], lines: list[str],
                       path: str = "") -> tuple[list[Diagnostic], int, list[Diagnostic]]:
    """Drop suppressed findings; returns (kept, suppressed count, directive warnings)."""
    directives, warnings = parse_directives(comments, lines, path)
    if not directives:
        return list(diags), 0, warnings
    kept, suppressed = [], 0
    for d in diags:
        hit = any((dv.rules is None or d.rule_id in dv.rules)
                  and (dv.scope == "ignore-file" or d.line in dv.lines) for dv in directives)
        if hit and d.rule_id in REGISTRY:
            suppressed += 1
        else:
            kept.append(d)
    return kept, suppressed, warnings


# ---------------------------------------------------------------------------
# Orchestration and aggregation
# ---------------------------------------------------------------------------

def _lint_one(args: tuple[SourceFile, Config]) -> FileResult:
    source_file, config = args
    return lint_file(source_file.path, config, source_file.is_test)


def lint_files(files: list[SourceFile], config: Config, jobs: int = 1) -> list[FileResult]:
    """Lint ``files``; results keep the input order regardless of ``jobs``."""
    work = [(f, config) for f in files]
    if jobs <= 1 or len(work) < 2:
        return [_lint_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_lint_one, work, chunksize=max(1, len(work) // (jobs * 4))))


def lint_paths(config: Config, jobs: int = 1) -> list[FileResult]:
    files, errors = discover_files(config)
    results = lint_files(files, config, jobs)
    for path, message in errors:
        results.append(FileResult(path, [_tool_diag("io-error", "error", _ORIGIN, path, message)], io_error=True))
    return sorted(results, key=lambda r: r.path)


@dataclass
class Stats:
    per_rule: dict[str, int]
    per_category: dict[str, int]
    files_scanned: int
    emitted: int
    suppressed: int
    implemented_smells: int = len(REGISTRY)
    catalog_smells: int = CATALOG_SIZE
    out_of_scope: tuple[str, ...] = OUT_OF_SCOPE

    @property
    def coverage_line(self) -> str:
        return (f"implemented {self.implemented_smells}/{self.catalog_smells} catalog smells "
                f"(out of scope: {', '.join(self.out_of_scope)})")

    def to_dict(self) -> dict:
        return {
            "filesScanned": self.files_scanned,
            "diagnostics": self.emitted,
            "suppressed": self.suppressed,
            "perRule": self.per_rule,
            "perCategory": self.per_category,
            "implementedSmells": self.implemented_smells,
            "catalogSmells": self.catalog_smells,
            "outOfScope": list(self.out_of_scope),
        }


def aggregate(results: list[FileResult], config: Config, hard_failure: bool = False) -> tuple[Stats, int]:
    per_rule = {r: 0 for r in REGISTRY}
    per_category = {r.category: 0 for r in REGISTRY.values()}
    emitted = 0
    failing = False
    threshold = SEVERITY_RANK[config.fail_level]
    for result in results:
        hard_failure = hard_failure or result.io_error
        for d in result.diagnostics:
            emitted += 1
            per_rule[d.rule_id] = per_rule.get(d.rule_id, 0) + 1
            if d.rule_id in REGISTRY:
                per_category[d.category] += 1
            if SEVERITY_RANK[d.severity] >= threshold:
                failing = True
    stats = Stats(per_rule, per_category, len(results), emitted, sum(r.suppressed_count for r in results))
    return stats, 2 if hard_failure else (1 if failing else 0)
