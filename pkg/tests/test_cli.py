import json

import pytest

from clj_smell.cli import Command, parse_args


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def test_parse_lint():
    cmd = parse_args(["lint", "src"])
    assert (cmd.verb, cmd.targets) == ("lint", ("src",))


def test_parse_rules_explain():
    cmd = parse_args(["rules", "--explain", "redundant-do"])
    assert (cmd.verb, cmd.explain) == ("rules", "redundant-do")


def test_parse_repeated_flags():
    cmd = parse_args(["lint", "a", "b", "--enable", "missing-map-default", "--disable", "x", "--disable", "y",
                      "--fail-level", "info", "--format", "json", "--config", "c.edn", "--jobs", "4"])
    assert cmd == Command("lint", ("a", "b"), "c.edn", "json", "info", ("missing-map-default",), ("x", "y"),
                          None, 4, True)


@pytest.mark.parametrize("argv", [["lint", "--format", "yaml"], ["frobnicate"], [], ["lint", "--bogus"],
                                  ["rules", "--fail-level", "info"]])
def test_usage_errors_exit_2(run_cli, argv):
    code, out, err = run_cli(*argv)
    assert code == 2 and out == ""
    assert "usage:" in err


def test_text_output(tmp_path, run_cli):
    f = write(tmp_path / "f.clj", "(ns f)\n\n(not (empty? xs))\n")
    code, out, err = run_cli("lint", str(f), "--no-color")
    assert code == 1
    lines = out.splitlines()
    assert lines[0].startswith(f"{f}:3:1: warning: [improper-emptiness-check] ")
    assert lines[1] == "  suggestion: (seq xs)"
    assert "1 diagnostic in 1 file" in err


def test_clean_run_exits_0(tmp_path, run_cli):
    f = write(tmp_path / "f.clj", "(ns f)\n(seq xs)\n")
    code, out, err = run_cli("lint", str(f))
    assert code == 0 and out == ""


def test_json_output_round_trips(tmp_path, run_cli):
    f = write(tmp_path / "f.clj", "(when c (do a b))\n{:id 1 :name 2 :email 3}\n")
    code, out, _ = run_cli("lint", str(f), "--format", "json")
    payload = json.loads(out)
    assert set(payload) == {"diagnostics", "summary"}
    first = payload["diagnostics"][0]
    assert set(first) == {"file", "line", "col", "endLine", "endCol", "rule", "category", "severity",
                          "message", "suggestion"}
    assert (first["rule"], first["line"], first["col"], first["endLine"], first["endCol"]) == (
        "redundant-do", 1, 9, 1, 17)
    assert first["suggestion"] == "(when c a b)"
    assert payload["summary"]["exitCode"] == code == 1
    assert payload["summary"]["diagnostics"] == len(payload["diagnostics"]) == 2


@pytest.mark.parametrize("src", ["(do (f))", '{:id 1 :name "a" :email "b"}', "(ok)", "(broken"])
def test_exit_code_independent_of_format(tmp_path, run_cli, src):
    f = write(tmp_path / "f.clj", src)
    codes = {fmt: run_cli("lint", str(f), "--format", fmt)[0] for fmt in ("text", "json")}
    assert codes["text"] == codes["json"]


def test_fail_level_flag(tmp_path, run_cli):
    f = write(tmp_path / "f.clj", '{:id 1 :name "a" :email "b"}')
    assert run_cli("lint", str(f))[0] == 0
    assert run_cli("lint", str(f), "--fail-level", "info")[0] == 1


def test_enable_and_disable(tmp_path, run_cli):
    f = write(tmp_path / "f.clj", "(get m :k)\n(do (f))\n")
    code, out, _ = run_cli("lint", str(f), "--enable", "missing-map-default", "--disable", "redundant-do")
    assert "[missing-map-default]" in out and "[redundant-do]" not in out
    assert code == 0


def test_unknown_rule_flag_exits_2(tmp_path, run_cli):
    f = write(tmp_path / "f.clj", "")
    code, _, err = run_cli("lint", str(f), "--enable", "nope")
    assert code == 2 and "nope" in err


def test_config_file_and_env(tmp_path, run_cli, monkeypatch):
    f = write(tmp_path / "src" / "f.clj", "(do (f))\n")
    cfg = write(tmp_path / "elsewhere.edn", "{:rules {:redundant-do false}}")
    assert run_cli("lint", str(f), "--config", str(cfg))[0] == 0
    monkeypatch.setenv("CLJ_SMELL_CONFIG", str(cfg))
    assert run_cli("lint", str(f))[0] == 0


def test_bad_config_exits_2(tmp_path, run_cli):
    f = write(tmp_path / "f.clj", "")
    cfg = write(tmp_path / "c.edn", "[not a map]")
    code, _, err = run_cli("lint", str(f), "--config", str(cfg))
    assert code == 2 and "map" in err


def test_config_warnings_go_to_stderr(tmp_path, run_cli):
    f = write(tmp_path / "f.clj", "")
    write(tmp_path / ".clj-smell.edn", "{:rules {:no-such-rule true}}")
    code, _, err = run_cli("lint", str(f))
    assert code == 0 and "no-such-rule" in err


def test_missing_path_exits_2(tmp_path, run_cli):
    assert run_cli("lint", str(tmp_path / "absent"))[0] == 2


def test_rules_listing(run_cli):
    code, out, _ = run_cli("rules")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 24
    redundant = next(line for line in lines if line.startswith("redundant-do"))
    assert "clojure-specific" in redundant and "warning" in redundant and "Redundant do Block" in redundant
    assert "[G2]" in redundant


def test_rules_explain(run_cli):
    code, out, _ = run_cli("rules", "--explain", "redundant-do")
    assert code == 0
    assert "(when ready? (do (log) (start)))" in out and "(when ready? (log) (start))" in out


def test_rules_explain_unknown(run_cli):
    assert run_cli("rules", "--explain", "nope")[0] == 2


def test_stats_on_empty_corpus(tmp_path, run_cli):
    code, out, _ = run_cli("stats", str(tmp_path))
    assert code == 0
    assert "files scanned: 0" in out
    assert "clojure-specific: 0" in out and "functional: 0" in out and "traditional: 0" in out
    assert out.splitlines()[-1] == ("implemented 24/26 catalog smells "
                                    "(out of scope: Shotgun Surgery, Inappropriate Intimacy)")


def test_stats_json(tmp_path, run_cli):
    write(tmp_path / "f.clj", "(do (f))")
    code, out, _ = run_cli("stats", str(tmp_path), "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["perRule"]["redundant-do"] == 1 and data["implementedSmells"] == 24


def test_version(run_cli):
    code, out, _ = run_cli("--version")
    assert code == 0 and out.startswith("clj-smell ")
