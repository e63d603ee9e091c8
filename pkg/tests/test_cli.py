import json
import shutil
import subprocess
import sys

import pytest

from cases import ODES
from elemps.cli import build_parser, load_corpus, main, shipped_corpus


def run(*args):
    return subprocess.run([sys.executable, "-m", "elemps.cli", *args], capture_output=True, text=True, timeout=600)


def test_text_output(capsys):
    assert main(["solve", "diff(y(x),x) = 1"]) == 0
    out = capsys.readouterr().out
    assert "invariant:" in out and "Verified" in out


def test_json_output(capsys):
    assert main(["solve", ODES["exp_ratio"], "--emit", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["strategy"] == "sfunction"
    assert data["system"]["u_definition"] == "exp(y**2/x)"


def test_latex_output(capsys):
    assert main(["solve", "diff(y(x),x) = 1", "--emit", "latex"]) == 0
    assert r"\begin{align*}" in capsys.readouterr().out


def test_file_input(tmp_path, capsys):
    path = tmp_path / "ode.txt"
    path.write_text("diff(y(x),x) = (x - y(x))/x\n")
    assert main(["solve", "--file", str(path)]) == 0


def test_exit_codes(capsys):
    assert main(["solve", "diff(y(x),x) = (x"]) == 1
    assert main(["solve", "diff(y(x),x) = sin(x) + cos(x^2-x)*y(x)"]) == 3
    err = capsys.readouterr().err
    assert "MultipleTowersError" in err
    assert main(["solve", "diff(y(x),x) = exp(x^2) + y(x)^3", "--max-darboux-degree", "1",
                 "--max-pq-degree", "1", "--max-s-degree", "1", "--timeout", "10"]) == 2


def test_usage_error_exits_with_one():
    proc = run("solve", "--strategy", "nope", "diff(y(x),x) = 1")
    assert proc.returncode == 1


def test_missing_or_empty_corpus(tmp_path):
    assert main(["corpus", str(tmp_path / "absent")]) == 5
    assert main(["corpus", str(tmp_path)]) == 5


def test_shipped_corpus_schema():
    cases = load_corpus(shipped_corpus())
    assert len(cases) >= 5
    for case in cases:
        assert {"name", "ode", "expect"} <= set(case)
        assert case["expect"] in ("verified", "unsupported", "none-found")


def test_small_corpus_run(tmp_path, capsys):
    src = shipped_corpus()
    for name in ("06_rational_constant_slope.json", "07_unsupported_two_exponentials.json"):
        if (src / name).exists():
            shutil.copy(src / name, tmp_path / name)
    assert main(["corpus", str(tmp_path)]) == 0
    assert "cases as expected" in capsys.readouterr().out


def test_parser_defaults():
    args = build_parser().parse_args(["solve", "diff(y(x),x) = 1"])
    assert (args.strategy, args.trig_method, args.timeout, args.verify) == ("auto", 2, 60.0, "symbolic")
