"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""

import io
import json
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from conftest import ACCEPTANCE, CORPUS, fired

from clj_smell.cli import main
from clj_smell.engine import Config, aggregate, lint_paths, read_source
from clj_smell.fixtures import corpus_files, parse_expectations, run_corpus, run_parity
from clj_smell.reader import iter_forms, read_forms, render, shape
from clj_smell.rules.registry import REGISTRY


@contextmanager
def criterion(number: int, title: str):
    state = {"detail": ""}
    try:
        yield state
    except BaseException:
        ACCEPTANCE[number] = ("FAIL", f"{title} {state['detail']}".rstrip())
        print(f"FAIL [{number}] {title} {state['detail']}")
        raise
    ACCEPTANCE[number] = ("PASS", f"{title} {state['detail']}".rstrip())
    print(f"PASS [{number}] {title} {state['detail']}")


def cli(*argv, capsys):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_1_catalog_coverage(capsys):
    with criterion(1, "catalog coverage: 24 rules, 12/9/3, implemented 24/26") as c:
        code, out, _ = cli("rules", capsys=capsys)
        lines = out.splitlines()
        counts = {cat: sum(1 for r in REGISTRY.values() if r.category == cat)
                  for cat in ("clojure-specific", "functional", "traditional")}
        code2, stats_out, _ = cli("stats", str(CORPUS / "reader"), capsys=capsys)
        c["detail"] = f"(rules={len(lines)}, split={list(counts.values())})"
        assert code == 0 and len(lines) == 24
        assert counts == {"clojure-specific": 12, "functional": 9, "traditional": 3}
        assert code2 == 0
        assert ("implemented 24/26 catalog smells (out of scope: Shotgun Surgery, Inappropriate Intimacy)"
                in stats_out.splitlines())


def test_2_fixture_suite():
    with criterion(2, "fixture corpus: 0 missing, 0 unexpected, < 5 s") as c:
        positives = negatives = 0
        for rule_id in REGISTRY:
            pos = [p for p in (CORPUS / rule_id).glob("pos_*.clj") if parse_expectations(p.read_text())]
            neg = [p for p in (CORPUS / rule_id).glob("neg_*.clj") if not parse_expectations(p.read_text())]
            assert len(pos) >= 3 and len(neg) >= 3, rule_id
            positives += len(pos)
            negatives += len(neg)
        start = time.perf_counter()
        report = run_corpus(CORPUS)
        elapsed = time.perf_counter() - start
        c["detail"] = (f"(pos={positives}, neg={negatives}, matched={len(report.matched)}, "
                       f"missing={len(report.missing)}, unexpected={len(report.unexpected)}, {elapsed:.2f}s)")
        assert positives >= 72 and negatives >= 72
        assert report.passed, report.describe()
        assert elapsed < 5.0


def test_3_parity_subset():
    with criterion(3, "parity with recorded not-empty?/redundant-do/not-nil? decisions") as c:
        report = run_parity(CORPUS / "parity")
        c["detail"] = f"(agree={len(report.agree)}, disagree={len(report.disagree)})"
        assert {case.linter for case in report.agree} == {"not-empty?", "redundant-do", "not-nil?"}
        assert report.passed, report.disagree


def test_4_reader_round_trip():
    with criterion(4, "reader round-trip and span-slice on every corpus file") as c:
        files = corpus_files(CORPUS)
        checked_forms = 0
        for path in files:
            source = read_source(str(path))
            forms, _, errors = read_forms(source)
            assert not errors, path
            again, _, errors = read_forms("\n".join(render(f) for f in forms))
            assert not errors and [shape(f) for f in again] == [shape(f) for f in forms], path
            data = source.encode()
            for top in forms:
                for f in iter_forms(top):
                    sliced, _, _ = read_forms(f.span.slice(data))
                    assert [shape(s) for s in sliced] == [shape(f)], (path, f)
                    checked_forms += 1
        c["detail"] = f"({len(files)} files, {checked_forms} forms)"


# (rule, trigger, core symbols the detector keys on)
SHADOW_CASES = [
    ("improper-emptiness-check", "(not (empty? xs))", ["not", "empty?"]),
    ("improper-emptiness-check", "(> (count xs) 0)", ["count", ">"]),
    ("improper-emptiness-check", "(= 0 (count xs))", ["count", "="]),
    ("missing-map-default", "(get m :k)", ["get"]),
    ("unnecessary-into", "(into [] (map f xs))", ["into"]),
    ("unnecessary-into", "(into #{} xs)", ["into"]),
    ("verbose-check", "(not (nil? x))", ["not", "nil?"]),
    ("verbose-check", "(= nil x)", ["="]),
    ("verbose-check", "(not= nil x)", ["not="]),
    ("production-doall", "(doall (map f xs))", ["doall"]),
    ("redundant-do", "(when c (do (f) (g)))", ["when"]),
    ("nested-forms", "(doseq [x xs] (doseq [y ys] (f x y)))", ["doseq"]),
    ("nested-forms", "(for [x xs] (for [y ys] [x y]))", ["for"]),
    ("trivial-lambda", "(fn [x] (f x))", ["fn"]),
    ("inefficient-filtering", "(first (filter ok? (repeatedly make)))", ["first", "filter", "repeatedly"]),
    ("overabstracted-composition", "(comp (partial f 1) g)", ["comp", "partial"]),
    ("overabstracted-composition", "(comp a b c d)", ["comp"]),
    ("hof-overuse", "(fn [a] (fn [b] (fn [c] (+ a b c))))", ["fn"]),
    ("lazy-side-effects", "(map #(println %) xs)", ["map", "println"]),
    ("lazy-side-effects", "(filter #(swap! a conj %) xs)", ["filter"]),
    ("hidden-side-effects", '(defn save [u] (spit "f" u))', ["spit"]),
    ("explicit-recursion", "(loop [xs xs acc 0] (if (seq xs) (recur (rest xs) (+ acc (first xs))) acc))",
     ["rest", "seq"]),
]


def test_5_shadowing_suite():
    with criterion(5, "shadowing a keyed core symbol suppresses the finding") as c:
        wrapped = 0
        failures = []
        for rule_id, trigger, symbols in SHADOW_CASES:
            assert len(fired(trigger, rule_id)) == 1, (rule_id, trigger)
            for sym in symbols:
                src = f"(let [{sym} f] {trigger})"
                wrapped += 1
                if fired(src, rule_id):
                    failures.append(src)
        detectors = {r for r, _, _ in SHADOW_CASES}
        c["detail"] = f"({len(detectors)} detectors, {wrapped} wrappers, {wrapped - len(failures)} suppressed)"
        assert len(detectors) >= 10
        assert failures == []


def _json_run(jobs: int, capsys) -> str:
    code, out, _ = cli("lint", str(CORPUS), "--format", "json", "--jobs", str(jobs), capsys=capsys)
    assert code in (0, 1)
    return out


def test_6_determinism(capsys):
    with criterion(6, "json output byte-identical across runs and parallelism") as c:
        first = _json_run(1, capsys)
        second = _json_run(1, capsys)
        parallel = _json_run(4, capsys)
        payload = json.loads(first)
        c["detail"] = f"({len(payload['diagnostics'])} diagnostics, {len(first)} bytes)"
        keys = [(d["file"], d["line"], d["col"], d["rule"]) for d in payload["diagnostics"]]
        assert keys == sorted(keys)
        assert first == second == parallel


EXPECTED_SEVERITY = {
    "unnecessary-macro": "warning",
    "thread-ignorance": "warning",
    "nested-forms": "warning",
    "verbose-check": "warning",
    "lazy-side-effects": "warning",
    "hidden-side-effects": "warning",
    "explicit-recursion": "warning",
    "deep-nesting": "info",
    "long-parameter-list": "info",
    "long-function": "info",
    "comment-heavy": "info",
}
SURVEY = {
    "unnecessary-macro": 88.37, "thread-ignorance": 76.74, "nested-forms": 76.74, "verbose-check": 71.43,
    "lazy-side-effects": 90.48, "hidden-side-effects": 78.57, "explicit-recursion": 71.43, "deep-nesting": 48.78,
}
# Yes-responses over respondents, from which the percentages above follow.
RESPONSES = {
    "unnecessary-macro": (38, 43), "thread-ignorance": (33, 43), "verbose-check": (30, 42),
    "lazy-side-effects": (38, 42), "hidden-side-effects": (33, 42), "explicit-recursion": (30, 42),
    "deep-nesting": (20, 41),
}


def test_7_severity_defaults():
    with criterion(7, "survey-derived default severities") as c:
        actual = {r: REGISTRY[r].default_severity for r in EXPECTED_SEVERITY}
        config = Config()
        c["detail"] = f"({sum(actual[r] == s for r, s in EXPECTED_SEVERITY.items())}/{len(EXPECTED_SEVERITY)})"
        assert actual == EXPECTED_SEVERITY
        assert {r: config.severity(r) for r in EXPECTED_SEVERITY} == EXPECTED_SEVERITY
        assert {r: REGISTRY[r].survey for r in SURVEY} == SURVEY
        assert all(round(100 * yes / total, 2) == SURVEY[r] for r, (yes, total) in RESPONSES.items())
        assert all(r.default_severity == "info" for r in REGISTRY.values() if r.category == "traditional")


_BUDGET = 2.0
_HARD_LIMIT = 5 * _BUDGET


def _synthetic_corpus(root: Path, target_lines: int = 10_000) -> int:
    pieces = [read_source(str(p)) for p in sorted(CORPUS.glob("*/*.clj"))]
    lines = 0
    index = 0
    while lines < target_lines:
        body = "\n".join(pieces)
        text = f"(ns synthetic.file-{index})\n{body}\n"
        (root / f"file_{index}.clj").write_text(text, encoding="utf-8")
        lines += text.count("\n")
        index += 1
    return lines


def test_8_performance(tmp_path):
    with criterion(8, f"10k-line corpus under {_BUDGET:.0f} s (soft budget)") as c:
        lines = _synthetic_corpus(tmp_path)
        config = Config(paths=(str(tmp_path),))
        start = time.perf_counter()
        results = lint_paths(config, 1)
        elapsed = time.perf_counter() - start
        stats, _ = aggregate(results, config)
        c["detail"] = f"({lines} lines, {stats.emitted} diagnostics, {elapsed:.2f}s)"
        assert lines >= 10_000 and stats.emitted > 0
        if elapsed >= _BUDGET:
            c["detail"] += " over soft budget"
            if elapsed >= _HARD_LIMIT:
                pytest.fail(f"linting took {elapsed:.2f}s, far above the {_BUDGET}s budget")
            pytest.xfail(f"soft budget exceeded: {elapsed:.2f}s")
