"""Annotated fixture corpus harness.

A fixture marks every finding it expects with a ``;; @expect rule-id``
comment; the directive applies to the next line holding code. Directives
stack, so two rules firing on one line need two comments. A file without
directives must lint clean.
"""

from __future__ import annotations

import os
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .engine import (
    CONFIG_FILE,
    Config,
    _code_lines,
    apply_config_data,
    is_test_path,
    lint_file,
    next_code_line,
    read_edn_map,
    read_source,
)
from .reader import LexError, tokenize
from .rules.registry import PSEUDO_RULES, REGISTRY

_EXPECT = re.compile(r"\s*@expect\b(.*)$")
_FIXTURE_EXTS = (".clj", ".cljs", ".cljc")


class HarnessError(Exception):
    pass


@dataclass(frozen=True, order=True)
class Expectation:
    line: int
    rule_id: str


def parse_expectations(source: str, path: str = "<fixture>") -> list[Expectation]:
    try:
        _, comments = tokenize(source)
    except LexError:
        comments = _comment_lines(source)
    lines = source.split("\n")
    code = None
    out: list[Expectation] = []
    for c in comments:
        m = _EXPECT.match(c.text)
        if m is None:
            continue
        ids = m.group(1).split()
        if not ids:
            raise HarnessError(f"{path}:{c.span.start.line}: @expect without a rule id")
        for rule_id in ids:
            if rule_id not in REGISTRY and rule_id not in PSEUDO_RULES:
                raise HarnessError(f"{path}:{c.span.start.line}: unknown rule id {rule_id!r} in @expect")
        if code is None:
            code = _code_lines(lines, comments)
        target = next_code_line(c.span.start.line, code, len(lines))
        if target is None:
            raise HarnessError(f"{path}:{c.span.start.line}: @expect is not followed by code")
        out.extend(Expectation(target, r) for r in ids)
    return out


def _comment_lines(source: str):
    """Fallback comment scan for fixtures the lexer rejects."""
    from .reader import CommentRecord, SourcePos, Span

    out = []
    for i, line in enumerate(source.split("\n"), 1):
        stripped = line.lstrip()
        if stripped.startswith(";"):
            col = len(line) - len(stripped) + 1
            pos = SourcePos(i, col, 0)
            out.append(CommentRecord(stripped.lstrip(";"), Span(pos, pos), "line-comment"))
    return out


@dataclass
class Report:
    matched: list[tuple[str, int, str]] = field(default_factory=list)
    missing: list[tuple[str, int, str]] = field(default_factory=list)
    unexpected: list[tuple[str, int, str]] = field(default_factory=list)
    files: int = 0

    @property
    def passed(self) -> bool:
        return not self.missing and not self.unexpected

    def describe(self) -> str:
        lines = [f"{self.files} files, {len(self.matched)} matched, {len(self.missing)} missing, "
                 f"{len(self.unexpected)} unexpected"]
        lines += [f"  missing    {p}:{line} {r}" for p, line, r in self.missing]
        lines += [f"  unexpected {p}:{line} {r}" for p, line, r in self.unexpected]
        return "\n".join(lines)


def corpus_files(corpus_dir: str | os.PathLike) -> list[Path]:
    root = Path(corpus_dir)
    return sorted((p for p in root.rglob("*") if p.suffix in _FIXTURE_EXTS and p.is_file()),
                  key=lambda p: p.as_posix())


class _ConfigStack:
    """Directory-local ``.clj-smell.edn`` files layered over a base config."""

    def __init__(self, root: Path, base: Config):
        self.root = root
        self.cache: dict[Path, Config] = {root.parent: base}

    def for_dir(self, directory: Path) -> Config:
        if directory in self.cache:
            return self.cache[directory]
        parent = self.for_dir(directory.parent) if directory != self.root else self.cache[self.root.parent]
        local = directory / CONFIG_FILE
        config = parent
        if local.is_file():
            config = apply_config_data(parent, read_edn_map(local.read_text("utf-8"), str(local)), str(local))
        self.cache[directory] = config
        return config


def check_file(path: Path, config: Config, rel: str) -> tuple[list, list, list]:
    source = read_source(str(path))
    expected = Counter((e.line, e.rule_id) for e in parse_expectations(source, rel))
    result = lint_file(str(path), config, is_test_path(rel, config.test_paths))
    found = Counter((d.line, d.rule_id) for d in result.diagnostics)
    matched = sorted((expected & found).elements())
    missing = sorted((expected - found).elements())
    unexpected = sorted((found - expected).elements())
    return ([(rel, *m) for m in matched], [(rel, *m) for m in missing], [(rel, *m) for m in unexpected])


def run_corpus(corpus_dir: str | os.PathLike, config: Config | None = None,
               files: Iterable[Path] | None = None) -> Report:
    """Lint every fixture and compare findings with its ``@expect`` directives."""
    root = Path(corpus_dir).resolve()
    stack = _ConfigStack(root, config or Config())
    report = Report()
    for path in (files if files is not None else corpus_files(root)):
        path = Path(path).resolve()
        rel = path.relative_to(root).as_posix()
        matched, missing, unexpected = check_file(path, stack.for_dir(path.parent), rel)
        report.matched += matched
        report.missing += missing
        report.unexpected += unexpected
        report.files += 1
    return report


# ---------------------------------------------------------------------------
# Parity with an external linter's recorded decisions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParityCase:
    file: str
    line: int
    linter: str
    fires: bool


@dataclass
class ParityReport:
    agree: list[ParityCase] = field(default_factory=list)
    disagree: list[tuple[ParityCase, bool]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.agree) and not self.disagree


def load_oracle(parity_dir: str | os.PathLike) -> tuple[dict[str, str], list[ParityCase]]:
    path = Path(parity_dir) / "oracle.edn"
    data = read_edn_map(path.read_text("utf-8"), str(path))
    linters = {k: v for k, v in data["linters"].items()}
    for linter, rule_id in linters.items():
        if rule_id not in REGISTRY:
            raise HarnessError(f"{path}: linter {linter} maps to unknown rule {rule_id}")
    cases = []
    for entry in data["decisions"]:
        file, line, linter, fires = entry
        if linter not in linters:
            raise HarnessError(f"{path}: decision for unmapped linter {linter}")
        cases.append(ParityCase(file, line, linter, fires))
    return linters, cases


def run_parity(parity_dir: str | os.PathLike, config: Config | None = None) -> ParityReport:
    """Compare firing decisions with the oracle, linter by linter and line by line."""
    root = Path(parity_dir)
    linters, cases = load_oracle(root)
    config = config or Config()
    for rule_id in set(linters.values()):
        config = config.with_rule(rule_id, enabled=True)
    fired: dict[str, set[tuple[int, str]]] = {}
    report = ParityReport()
    for case in cases:
        if case.file not in fired:
            result = lint_file(str(root / case.file), config, False)
            fired[case.file] = {(d.line, d.rule_id) for d in result.diagnostics}
        ours = (case.line, linters[case.linter]) in fired[case.file]
        if ours == case.fires:
            report.agree.append(case)
        else:
            report.disagree.append((case, ours))
    return report
