import subprocess
import sys

import pytest

from conftest import fixture_path
from nestedwalk.cli import run_command
from nestedwalk.formats import load_machine
from nestedwalk.nested_words import NestedWord, enumerate_nested_words
from nestedwalk.twovpt import run_d2vpt
from nestedwalk.vpa import evaluate_vpt


def run(*argv):
    code, report = run_command([str(a) for a in argv])
    return code, report


def test_validate():
    code, report = run("validate", fixture_path("sorting3.d2vpt"))
    assert code == 0
    assert report.lines[0] == "kind: d2vpt"


def test_eval_golden_inputs():
    code, report = run("eval", fixture_path("sorting3.d2vpt"), "--input", fixture_path("golden_inputs.txt"))
    assert code == 0
    assert report.lines[:2] == ["<L> 1 r 2 1 r 2 r r 3 r <R>", "<L> 1 r 2 1 r 2 r 3 r r 2 r 3 r <R>"]


def test_eval_rejects_bad_word():
    code, _ = run("eval", fixture_path("sorting3.d2vpt"), "--input", "1 r r")
    assert code == 2


def test_accepts_and_emptiness():
    assert run("emptiness", fixture_path("empty01.2vpa"))[0] == 0
    code, report = run("emptiness", fixture_path("empty08.2vpa"))
    assert code == 1 and report.summary["witness"]
    w = report.summary["witness"]
    assert run("accepts", fixture_path("empty08.2vpa"), "--input", w)[0] == 0


def test_convert(tmp_path):
    out = tmp_path / "m.vpa"
    assert run("convert-2vpa-dvpa", fixture_path("morphism1.2vpa"), "-o", out)[0] == 0
    assert load_machine(str(out)).is_deterministic


@pytest.mark.parametrize("first,method", [("swap12.vpt", "hopcroft-ullman"),
                                          ("parity12.vpt", "hopcroft-ullman-codet")])
def test_compose(tmp_path, first, method):
    out = tmp_path / "c.d2vpt"
    code, report = run("compose", fixture_path(first), fixture_path("sorting2.d2vpt"), "-o", out)
    assert code == 0 and report.summary["method"] == method
    c = load_machine(str(out))
    a = load_machine(fixture_path(first))
    b = load_machine(fixture_path("sorting2.d2vpt"))
    for w in enumerate_nested_words(a.alphabet, 6):
        (mid,) = evaluate_vpt(a, w)
        assert run_d2vpt(c, w) == run_d2vpt(b, NestedWord(b.alphabet, mid))


def test_remove_lookaround(tmp_path):
    out = tmp_path / "plain.d2vpt"
    assert run("remove-la", fixture_path("guarded_echo.d2vpt"), "-o", out)[0] == 0
    assert load_machine(str(out)).lookaround is None
    assert run("remove-la", fixture_path("echo.d2vpt"), "-o", out)[0] == 2


def test_single_use_exit_codes():
    assert run("single-use", fixture_path("echo.d2vpt"))[0] == 0
    code, report = run("single-use", fixture_path("double_copy_same.d2vpt"))
    assert code == 1 and "|" in report.summary["witness"]
    assert run("single-use", fixture_path("echo.d2vpt"), "--states", "nope")[0] == 2


def test_to_stst(tmp_path):
    out = tmp_path / "s.stst"
    code, report = run("to-stst", fixture_path("sorting2.d2vpt"), "-o", out)
    assert code == 0
    code, report = run("eval", out, "--input", "2 r 1 r")
    assert report.lines[-1] == "<L> 1 r 2 r <R>"


def test_typecheck():
    args = ["typecheck", fixture_path("sorting2.d2vpt"), "--range", fixture_path("prefix_L1.fsa")]
    code, report = run(*args, "--domain", fixture_path("universal_sorting2.vpa"))
    assert code == 1 and report.summary["counterexample"] == ""
    assert run(*args, "--domain", fixture_path("top1_sorting2.vpa"))[0] == 0


def test_oracle_check(tmp_path):
    summary = tmp_path / "summary.txt"
    code, _ = run("--summary", summary, "oracle-check", fixture_path("morphism1.2vpa"),
                  "--max-len", 4, "--random", 10)
    assert code == 0
    lines = dict(ln.split("=", 1) for ln in summary.read_text().splitlines())
    assert lines["morphism.mismatches"] == "0" and lines["exit"] == "0"


def test_errors_exit_with_two(tmp_path):
    assert run("validate", tmp_path / "missing.vpa")[0] == 2
    bad = tmp_path / "bad.vpa"
    bad.write_text("kind: vpa\n")
    assert run("validate", bad)[0] == 2
    assert run("no-such-command")[0] == 2
    assert run("to-stst", fixture_path("retry.2vpt"), "-o", tmp_path / "x")[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nestedwalk.cli", "validate", fixture_path("copy.stst")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "kind: stst" in proc.stdout
