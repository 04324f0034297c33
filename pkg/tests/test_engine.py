import os

import pytest

from clj_smell.engine import (
    Config,
    ConfigError,
    aggregate,
    discover_files,
    glob_regex,
    is_test_path,
    lint_file,
    lint_files,
    lint_paths,
    lint_source,
    load_config,
    read_edn_map,
)
from clj_smell.rules.registry import REGISTRY


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


# configuration

def test_defaults_without_config_file(tmp_path):
    config = load_config(tmp_path)
    assert config.source is None
    assert len(config.enabled_rules()) == 23
    assert not config.enabled("missing-map-default")
    assert config.fail_level == "warning" and config.output == "text"
    assert config.features == frozenset({"clj"})


def test_rule_param_override(tmp_path):
    write(tmp_path / ".clj-smell.edn", "{:rules {:deep-nesting {:max-depth 3}}}")
    config = load_config(tmp_path)
    assert config.params("deep-nesting")["max-depth"] == 3
    assert config.params("thread-ignorance")["min-chain"] == 4


def test_unknown_rule_is_a_warning(tmp_path):
    write(tmp_path / ".clj-smell.edn", "{:rules {:no-such-rule {}}}")
    config = load_config(tmp_path)
    assert any("no-such-rule" in w for w in config.warnings)


def test_config_found_upward(tmp_path):
    write(tmp_path / ".clj-smell.edn", "{:fail-level :info}")
    (tmp_path / "a" / "b").mkdir(parents=True)
    assert load_config(tmp_path / "a" / "b").fail_level == "info"


@pytest.mark.parametrize("text", ["[1 2]", "{:a", "{:fail-level :fatal}", "{:rules []}"])
def test_bad_config_raises(tmp_path, text):
    write(tmp_path / "c.edn", text)
    with pytest.raises(ConfigError):
        load_config(tmp_path, tmp_path / "c.edn")


def test_missing_explicit_config_raises(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path, tmp_path / "absent.edn")


def test_full_config_keys(tmp_path):
    write(tmp_path / ".clj-smell.edn", """
        {:paths ["src"] :test-paths ["spec/**"] :extensions ["clj"] :features #{:cljs}
         :traditional false :output :json
         :rules {:redundant-do {:severity :error} :missing-map-default true
                 :trivial-lambda {:enabled false}
                 :deep-nesting {:max-depth "deep"}}}""")
    config = load_config(tmp_path)
    assert config.paths == ("src",) and config.test_paths == ("spec/**",)
    assert config.extensions == ("clj",) and config.features == frozenset({"cljs"})
    assert config.output == "json"
    assert not config.enabled("long-function")
    assert config.severity("redundant-do") == "error"
    assert config.enabled("missing-map-default") and not config.enabled("trivial-lambda")
    assert config.params("deep-nesting")["max-depth"] == 5
    assert any("max-depth" in w for w in config.warnings)


def test_explicit_rule_beats_group_switch():
    config = Config(traditional_enabled=False).with_rule("long-function", enabled=True)
    assert config.enabled("long-function") and not config.enabled("comment-heavy")


def test_edn_subset():
    data = read_edn_map('{:a [1 "s" nil true] :b #{:x} :c {"k" 2.5}}', "x")
    assert data == {"a": [1, "s", None, True], "b": frozenset({"x"}), "c": {"k": 2.5}}


# discovery

def test_discover_tags_tests(tmp_path):
    write(tmp_path / "src" / "a.clj", "")
    write(tmp_path / "test" / "a_test.clj", "")
    write(tmp_path / "notes.txt", "")
    files, errors = discover_files(Config(paths=(str(tmp_path),)))
    assert errors == []
    assert [os.path.relpath(f.path, tmp_path) for f in files] == ["src/a.clj", "test/a_test.clj"]
    assert [f.is_test for f in files] == [False, True]


def test_overlapping_roots_are_deduplicated(tmp_path):
    write(tmp_path / "src" / "a.clj", "")
    write(tmp_path / "src" / "b.cljc", "")
    files, _ = discover_files(Config(paths=(str(tmp_path), str(tmp_path / "src"), str(tmp_path / "src" / "a.clj"))))
    assert len(files) == 2


def test_missing_root_is_reported(tmp_path):
    files, errors = discover_files(Config(paths=(str(tmp_path / "nope"),)))
    assert files == [] and len(errors) == 1


@pytest.mark.parametrize("path, expected", [
    ("test/a.clj", True),
    ("proj/test/deep/a.clj", True),
    ("src/a_test.clj", True),
    ("src/a_test.cljs", True),
    ("src/testing.clj", False),
    ("src/contest/a.clj", False),
])
def test_default_test_globs(path, expected):
    assert is_test_path(path, ("test/**", "*_test.clj*")) is expected


def test_glob_single_star_stays_in_segment():
    assert glob_regex("src/*.clj").search("src/a.clj")
    assert not glob_regex("src/*.clj").search("src/x/a.clj")


# linting

def test_lint_file_finding(tmp_path):
    p = write(tmp_path / "f.clj", "(not (empty? xs))\n")
    result = lint_file(str(p), Config())
    assert [d.rule_id for d in result.diagnostics] == ["improper-emptiness-check"]


def test_empty_file(tmp_path):
    assert lint_file(str(write(tmp_path / "f.clj", "")), Config()).diagnostics == []


def test_unbalanced_file_is_parse_error(tmp_path):
    result = lint_file(str(write(tmp_path / "f.clj", "(defn f [x]\n")), Config())
    assert [(d.rule_id, d.severity) for d in result.diagnostics] == [("parse-error", "error")]


def test_unreadable_file_is_io_error(tmp_path):
    result = lint_file(str(tmp_path / "missing.clj"), Config())
    assert result.io_error
    assert [(d.rule_id, d.severity) for d in result.diagnostics] == [("io-error", "error")]


def test_invalid_utf8_is_io_error(tmp_path):
    p = tmp_path / "bad.clj"
    p.write_bytes(b"(a \xff)")
    assert lint_file(str(p), Config()).diagnostics[0].rule_id == "io-error"


def test_diagnostics_sorted():
    src = "(do (f))\n(not (empty? xs)) (not (nil? y))\n"
    diags = lint_source(src, "f.clj", Config()).diagnostics
    keys = [(d.line, d.col, d.rule_id) for d in diags]
    assert keys == sorted(keys) and len(keys) == 3


def test_disabled_rule_is_silent():
    config = Config().with_rule("improper-emptiness-check", enabled=False)
    assert lint_source("(not (empty? xs))", "f.clj", config).diagnostics == []


def test_severity_override_applies():
    config = Config().with_rule("redundant-do", severity="error")
    assert lint_source("(do (f))", "f.clj", config).diagnostics[0].severity == "error"


def test_reader_conditional_features():
    src = "#?(:clj (do (f)) :cljs (not (nil? x)))"
    clj = lint_source(src, "f.cljc", Config()).diagnostics
    cljs = lint_source(src, "f.cljc", Config(features=frozenset({"cljs"}))).diagnostics
    assert [d.rule_id for d in clj] == ["redundant-do"]
    assert [d.rule_id for d in cljs] == ["verbose-check"]


def test_discarded_forms_never_fire():
    src = "#_(do (f)) #_(not (empty? xs)) #_(defmacro m [x] (+ x 1))"
    config = Config()
    for rule_id in REGISTRY:
        config = config.with_rule(rule_id, enabled=True)
    assert lint_source(src, "f.clj", config).diagnostics == []


# suppressions

def test_ignore_directive_suppresses_next_form():
    result = lint_source("; clj-smell: ignore[redundant-do]\n(when c (do a b))\n", "f.clj", Config())
    assert result.diagnostics == [] and result.suppressed_count == 1


def test_ignore_directive_skips_comment_lines():
    src = ";; clj-smell: ignore[redundant-do]\n;; why\n\n(when c (do a b))\n"
    assert lint_source(src, "f.clj", Config()).suppressed_count == 1


def test_same_line_directive():
    result = lint_source("(when c (do a b)) ; clj-smell: ignore[redundant-do]\n", "f.clj", Config())
    assert result.diagnostics == [] and result.suppressed_count == 1


def test_ignore_other_rule_keeps_finding():
    result = lint_source("; clj-smell: ignore[verbose-check]\n(when c (do a b))\n", "f.clj", Config())
    assert [d.rule_id for d in result.diagnostics] == ["redundant-do"]


def test_ignore_file_all_rules():
    src = "(do (f))\n(not (empty? xs))\n; clj-smell: ignore-file[]\n"
    result = lint_source(src, "f.clj", Config())
    assert result.diagnostics == [] and result.suppressed_count == 2


def test_bare_ignore_suppresses_everything_on_form():
    result = lint_source("; clj-smell: ignore[]\n(do (not (nil? x)))\n", "f.clj", Config())
    assert result.diagnostics == [] and result.suppressed_count == 2


def test_malformed_directive_warns():
    result = lint_source("; clj-smell: ignore redundant-do\n(do (f))\n", "f.clj", Config())
    assert sorted(d.rule_id for d in result.diagnostics) == ["config-warning", "redundant-do"]


def test_unknown_rule_in_directive_warns():
    result = lint_source("; clj-smell: ignore[nope, redundant-do]\n(do (f))\n", "f.clj", Config())
    assert [d.rule_id for d in result.diagnostics] == ["config-warning"]
    assert result.suppressed_count == 1


def test_parse_errors_are_not_suppressible():
    result = lint_source("; clj-smell: ignore-file[]\n(a\n", "f.clj", Config())
    assert [d.rule_id for d in result.diagnostics] == ["parse-error"]


# aggregation

def _results(src, config=None):
    return [lint_source(src, "f.clj", config or Config())]


def test_exit_codes():
    config = Config()
    assert aggregate(_results("(inc 1)"), config)[1] == 0
    assert aggregate(_results('{:id 1 :name "a" :email "b"}'), config)[1] == 0
    assert aggregate(_results("(do (f))"), config)[1] == 1
    assert aggregate(_results("(a"), config)[1] == 1
    info = Config(fail_level="info")
    assert aggregate(_results('{:id 1 :name "a" :email "b"}', info), info)[1] == 1
    error = Config(fail_level="error")
    assert aggregate(_results("(do (f))", error), error)[1] == 0


def test_io_failure_exits_2(tmp_path):
    results = [lint_file(str(tmp_path / "missing.clj"), Config())]
    assert aggregate(results, Config())[1] == 2


def test_stats_conservation():
    src = "; clj-smell: ignore[verbose-check]\n(not (nil? x))\n(do (f))\n(not (empty? y)) (a\n"
    results = _results(src)
    stats, _ = aggregate(results, Config())
    assert sum(stats.per_rule.values()) == stats.emitted
    assert stats.emitted == sum(len(r.diagnostics) for r in results)
    assert stats.suppressed == 1
    detected = sum(r.detected for r in results)
    rule_emitted = sum(n for rule, n in stats.per_rule.items() if rule in REGISTRY)
    assert rule_emitted + stats.suppressed == detected
    assert sum(stats.per_category.values()) == rule_emitted


def test_repeated_pseudo_rules_are_counted():
    results = [lint_source("(a\n", "a.clj", Config()), lint_source("(b\n", "b.clj", Config())]
    stats, code = aggregate(results, Config())
    assert stats.per_rule["parse-error"] == 2 and code == 1
    assert sum(stats.per_category.values()) == 0


def test_coverage_numbers():
    stats, _ = aggregate([], Config())
    assert stats.implemented_smells + len(stats.out_of_scope) == stats.catalog_smells == 26
    assert stats.coverage_line == ("implemented 24/26 catalog smells "
                                   "(out of scope: Shotgun Surgery, Inappropriate Intimacy)")


def test_parallel_matches_serial(tmp_path):
    for i in range(6):
        write(tmp_path / f"f{i}.clj", f"(do (f{i}))\n(not (empty? x{i}))\n")
    config = Config(paths=(str(tmp_path),))
    serial = lint_paths(config, 1)
    parallel = lint_paths(config, 3)
    assert [(r.path, r.diagnostics) for r in serial] == [(r.path, r.diagnostics) for r in parallel]


def test_file_order_does_not_matter(tmp_path):
    for i in range(3):
        write(tmp_path / f"f{i}.clj", f"(do (f{i}))\n")
    files, _ = discover_files(Config(paths=(str(tmp_path),)))
    forward = lint_files(files, Config())
    backward = lint_files(list(reversed(files)), Config())
    assert aggregate(forward, Config())[0] == aggregate(backward, Config())[0]
