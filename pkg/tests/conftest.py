import sys
from pathlib import Path

import pytest

from clj_smell.engine import Config, lint_source

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"


def lint(source: str, config: Config | None = None, path: str = "src/f.clj", is_test: bool = False):
    return lint_source(source, path, config or Config(), is_test).diagnostics


def fired(source: str, rule_id: str, config: Config | None = None, **kwargs):
    """Diagnostics of ``rule_id`` for ``source``, with the rule enabled."""
    config = (config or Config()).with_rule(rule_id, enabled=True)
    return [d for d in lint(source, config, **kwargs) if d.rule_id == rule_id]


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def run_cli(capsys):
    from clj_smell.cli import main

    def run(*argv):
        code = main(list(argv))
        out = capsys.readouterr()
        return code, out.out, out.err

    return run


ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        verdict, line = ACCEPTANCE[number]
        terminalreporter.write_line(f"{verdict} [{number}] {line}")
