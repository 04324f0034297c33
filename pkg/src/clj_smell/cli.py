"""Command-line interface: ``clj-smell lint|rules|stats``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from typing import Sequence, TextIO

from . import __version__
from .engine import (
    OUTPUT_FORMATS,
    Config,
    ConfigError,
    FileResult,
    Stats,
    aggregate,
    lint_paths,
    load_config,
)
from .rules.base import CATEGORIES, SEVERITIES, Diagnostic
from .rules.registry import REGISTRY

ENV_CONFIG = "CLJ_SMELL_CONFIG"
_COLORS = {"error": "\033[31m", "warning": "\033[33m", "info": "\033[36m"}
_RESET = "\033[0m"


@dataclass(frozen=True)
class Command:
    verb: str
    targets: tuple[str, ...] = ()
    config: str | None = None
    format: str | None = None
    fail_level: str | None = None
    enable: tuple[str, ...] = ()
    disable: tuple[str, ...] = ()
    explain: str | None = None
    jobs: int = 1
    color: bool = True


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_help(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clj-smell", description="Detect code smells in Clojure sources.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("targets", nargs="*", metavar="PATH", help="files or directories (default: config paths)")
        p.add_argument("--config", metavar="FILE", help=f"configuration file (default: ${ENV_CONFIG} "
                                                        "or the nearest .clj-smell.edn)")
        p.add_argument("--format", choices=OUTPUT_FORMATS, help="output format")
        p.add_argument("--jobs", type=int, default=1, metavar="N", help="lint N files in parallel")

    lint = sub.add_parser("lint", help="report smells")
    common(lint)
    lint.add_argument("--fail-level", choices=SEVERITIES, help="lowest severity that makes the exit code 1")
    lint.add_argument("--enable", action="append", default=[], metavar="RULE", help="enable a rule")
    lint.add_argument("--disable", action="append", default=[], metavar="RULE", help="disable a rule")
    lint.add_argument("--no-color", action="store_true", help="plain text output")

    rules = sub.add_parser("rules", help="list the rules")
    rules.add_argument("--explain", metavar="RULE", help="describe one rule with examples")

    stats = sub.add_parser("stats", help="count findings per rule and category")
    common(stats)
    return parser


def parse_args(argv: Sequence[str]) -> Command:
    ns = build_parser().parse_args(list(argv))
    return Command(
        verb=ns.verb,
        targets=tuple(getattr(ns, "targets", ()) or ()),
        config=getattr(ns, "config", None),
        format=getattr(ns, "format", None),
        fail_level=getattr(ns, "fail_level", None),
        enable=tuple(getattr(ns, "enable", ()) or ()),
        disable=tuple(getattr(ns, "disable", ()) or ()),
        explain=getattr(ns, "explain", None),
        jobs=max(1, getattr(ns, "jobs", 1) or 1),
        color=not getattr(ns, "no_color", False),
    )


def resolve_config(command: Command) -> Config:
    explicit = command.config or os.environ.get(ENV_CONFIG) or None
    start = command.targets[0] if command.targets else "."
    config = load_config(start if os.path.exists(start) else ".", explicit)
    if command.targets:
        config = replace(config, paths=command.targets)
    if command.format:
        config = replace(config, output=command.format)
    if command.fail_level:
        config = replace(config, fail_level=command.fail_level)
    for rule_id, enabled in [*((r, True) for r in command.enable), *((r, False) for r in command.disable)]:
        if rule_id not in REGISTRY:
            raise ConfigError(f"unknown rule {rule_id}")
        config = config.with_rule(rule_id, enabled=enabled)
    return config


def diagnostic_dict(d: Diagnostic) -> dict:
    return {
        "file": d.file,
        "line": d.span.start.line,
        "col": d.span.start.col,
        "endLine": d.span.end.line,
        "endCol": d.span.end.col,
        "rule": d.rule_id,
        "category": d.category,
        "severity": d.severity,
        "message": d.message,
        "suggestion": d.suggestion,
    }


def all_diagnostics(results: list[FileResult]) -> list[Diagnostic]:
    return [d for r in sorted(results, key=lambda r: r.path) for d in r.diagnostics]


def render_json(results: list[FileResult], stats: Stats, exit_code: int) -> str:
    payload = {
        "diagnostics": [diagnostic_dict(d) for d in all_diagnostics(results)],
        "summary": {**stats.to_dict(), "exitCode": exit_code},
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def render_text(results: list[FileResult], color: bool = False) -> str:
    lines = []
    for d in all_diagnostics(results):
        severity = f"{_COLORS[d.severity]}{d.severity}{_RESET}" if color else d.severity
        lines.append(f"{d.file}:{d.line}:{d.col}: {severity}: [{d.rule_id}] {d.message}")
        if d.suggestion:
            lines.append("  suggestion: " + d.suggestion.replace("\n", "\n              "))
    return "".join(line + "\n" for line in lines)


def summary_line(results: list[FileResult], stats: Stats) -> str:
    by_severity = {s: 0 for s in reversed(SEVERITIES)}
    for d in all_diagnostics(results):
        by_severity[d.severity] += 1
    detail = ", ".join(f"{n} {s}" for s, n in by_severity.items() if n)
    text = (f"{stats.emitted} diagnostic{'s' if stats.emitted != 1 else ''} in {stats.files_scanned} "
            f"file{'s' if stats.files_scanned != 1 else ''}")
    if detail:
        text += f" ({detail})"
    if stats.suppressed:
        text += f", {stats.suppressed} suppressed"
    return text


def _use_color(command: Command, out: TextIO) -> bool:
    return command.color and "NO_COLOR" not in os.environ and hasattr(out, "isatty") and out.isatty()


def _report_warnings(config: Config, err: TextIO) -> None:
    for w in config.warnings:
        print(f"clj-smell: config warning: {w}", file=err)


def run_lint(command: Command, out: TextIO, err: TextIO) -> int:
    config = resolve_config(command)
    _report_warnings(config, err)
    results = lint_paths(config, command.jobs)
    stats, code = aggregate(results, config)
    if config.output == "json":
        out.write(render_json(results, stats, code))
    else:
        out.write(render_text(results, _use_color(command, out)))
        print(summary_line(results, stats), file=err)
    return code


def rule_listing() -> list[str]:
    width = max(len(r) for r in REGISTRY)
    lines = []
    for r in REGISTRY.values():
        note = "" if r.default_enabled else "  (disabled by default)"
        lines.append(f"{r.rule_id:<{width}}  {r.category:<16}  {r.default_severity:<7}  "
                     f"{r.catalog_name} [{', '.join(r.doc_sources)}]{note}")
    return lines


def explain(rule_id: str) -> str:
    r = REGISTRY[rule_id]
    parts = [
        f"{r.rule_id}: {r.catalog_name}",
        f"category: {r.category}; default severity: {r.default_severity}; "
        f"enabled by default: {'yes' if r.default_enabled else 'no'}; evidence: {', '.join(r.doc_sources)}",
        "",
        r.description,
        "",
        "Fires on:",
        "  " + r.example.replace("\n", "\n  "),
        "",
        "Prefer:",
        "  " + r.compliant.replace("\n", "\n  "),
    ]
    if r.params:
        parts += ["", "Parameters:"]
        parts += [f"  {k} = {json.dumps(v)}" for k, v in r.params.items()]
    return "\n".join(parts) + "\n"


def run_rules(command: Command, out: TextIO, err: TextIO) -> int:
    if command.explain is not None:
        if command.explain not in REGISTRY:
            print(f"clj-smell: unknown rule {command.explain}", file=err)
            return 2
        out.write(explain(command.explain))
        return 0
    out.write("".join(line + "\n" for line in rule_listing()))
    return 0


def run_stats(command: Command, out: TextIO, err: TextIO) -> int:
    config = resolve_config(command)
    _report_warnings(config, err)
    results = lint_paths(config, command.jobs)
    stats, code = aggregate(results, config)
    if config.output == "json":
        out.write(json.dumps(stats.to_dict(), indent=2) + "\n")
    else:
        lines = [f"files scanned: {stats.files_scanned}",
                 f"diagnostics: {stats.emitted} ({stats.suppressed} suppressed)"]
        lines += [f"{c}: {stats.per_category.get(c, 0)}" for c in CATEGORIES]
        lines += [f"  {rule}: {n}" for rule, n in stats.per_rule.items() if n]
        lines.append(stats.coverage_line)
        out.write("".join(line + "\n" for line in lines))
    return 2 if code == 2 else 0


def run(command: Command, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    handlers = {"lint": run_lint, "rules": run_rules, "stats": run_stats}
    try:
        return handlers[command.verb](command, out, err)
    except ConfigError as e:
        print(f"clj-smell: {e}", file=err)
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    try:
        command = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as e:
        return int(e.code or 0)
    return run(command)


if __name__ == "__main__":
    sys.exit(main())
