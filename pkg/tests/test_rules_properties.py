from collections import Counter

import pytest

from conftest import CORPUS

from clj_smell.engine import Config, lint_source, read_source
from clj_smell.reader import read_forms
from clj_smell.rules.base import CATEGORIES, FileContext, severity_policy
from clj_smell.rules.registry import CATALOG_SIZE, OUT_OF_SCOPE, REGISTRY, rules_in
from clj_smell.engine import namespace_info

POSITIVES = sorted(CORPUS.glob("*/pos_*.clj"))


def all_enabled() -> Config:
    config = Config()
    for rule_id in REGISTRY:
        config = config.with_rule(rule_id, enabled=True)
    return config


def test_registry_shape():
    assert len(REGISTRY) == 24
    assert Counter(r.category for r in REGISTRY.values()) == {
        "clojure-specific": 12, "functional": 9, "traditional": 3}
    assert [c for c in CATEGORIES] == ["clojure-specific", "functional", "traditional"]
    assert len(REGISTRY) + len(OUT_OF_SCOPE) == CATALOG_SIZE


def test_catalog_names_unique_and_sourced():
    names = [r.catalog_name for r in REGISTRY.values()]
    assert len(set(names)) == len(names)
    assert all(r.doc_sources and all(s.startswith("G") for s in r.doc_sources) for r in REGISTRY.values())


def test_severity_policy():
    assert severity_policy("traditional", None, "mechanical") == "info"
    assert severity_policy("traditional", 90.0, "heuristic") == "info"
    assert severity_policy("functional", 71.43, "heuristic") == "warning"
    assert severity_policy("functional", 48.78, "heuristic") == "info"
    assert severity_policy("clojure-specific", None, "mechanical") == "warning"
    assert severity_policy("clojure-specific", None, "heuristic") == "info"


def test_descriptor_examples_fire_and_rewrites_do_not():
    config = all_enabled()
    for rule in REGISTRY.values():
        if "..." in rule.example:
            continue
        bad = [d.rule_id for d in lint_source(rule.example, "src/x.clj", config).diagnostics]
        good = [d.rule_id for d in lint_source(rule.compliant, "src/x.clj", config).diagnostics]
        assert rule.rule_id in bad, rule.rule_id
        assert rule.rule_id not in good, rule.rule_id


def _ctx(source, config):
    forms, comments, _ = read_forms(source)
    ids = config.enabled_rules()
    return forms, FileContext("src/x.clj", source, comments, namespace_info(forms), False, config.features,
                              params={r: config.params(r) for r in ids},
                              severities={r: config.severity(r) for r in ids})


@pytest.mark.parametrize("path", POSITIVES, ids=lambda p: f"{p.parent.name}/{p.name}")
def test_detectors_are_pure(path):
    config = all_enabled()
    forms, ctx = _ctx(read_source(str(path)), config)
    for rule in REGISTRY.values():
        first = rule.check(forms, ctx)
        second = rule.check(forms, ctx)
        assert first == second
        assert all(d.rule_id == rule.rule_id and d.category == rule.category for d in first)


@pytest.mark.parametrize("path", POSITIVES, ids=lambda p: f"{p.parent.name}/{p.name}")
def test_disabled_rule_is_silent(path):
    source = read_source(str(path))
    config = all_enabled()
    for rule_id in {d.rule_id for d in lint_source(source, str(path), config).diagnostics} & set(REGISTRY):
        off = config.with_rule(rule_id, enabled=False)
        assert rule_id not in {d.rule_id for d in lint_source(source, str(path), off).diagnostics}


@pytest.mark.parametrize("path", POSITIVES, ids=lambda p: f"{p.parent.name}/{p.name}")
def test_discarded_positives_are_silent(path):
    source = read_source(str(path))
    forms, _, _ = read_forms(source)
    data = source.encode()
    for form in reversed(forms):
        start = form.span.start.offset
        data = data[:start] + b"#_" + data[start:]
    result = lint_source(data.decode(), str(path), all_enabled())
    assert [d for d in result.diagnostics if d.rule_id in REGISTRY] == []


@pytest.mark.parametrize("path", POSITIVES, ids=lambda p: f"{p.parent.name}/{p.name}")
def test_unselected_branch_is_silent(path):
    source = read_source(str(path))
    forms, _, _ = read_forms(source)
    data = source.encode()
    for form in reversed(forms):
        start, end = form.span.start.offset, form.span.end.offset
        data = data[:start] + b"#?(:cljs " + data[start:end] + b")" + data[end:]
    result = lint_source(data.decode(), str(path), all_enabled())
    assert [d for d in result.diagnostics if d.rule_id in REGISTRY] == []


def test_diagnostic_spans_lie_within_file():
    config = all_enabled()
    for path in POSITIVES:
        source = read_source(str(path))
        size = len(source.encode())
        for d in lint_source(source, str(path), config).diagnostics:
            assert 0 <= d.span.start.offset <= d.span.end.offset <= size


def test_rules_in_category():
    assert [r.rule_id for r in rules_in("traditional")] == ["long-parameter-list", "long-function", "comment-heavy"]
