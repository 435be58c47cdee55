import json
import subprocess
import sys

import pytest

from rrwd.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


GOLDEN_GEN = {
    (1, 1): "P_1^1 = xi\n",
    (2, 2): "P_2^2 = -xi\n",
    (3, 3): "P_3^3 = 2*xi\n",
    (4, 4): "P_4^4 = -6*xi\n",
    (1, 2): "P_2^1 = -c_1 + binom(xi+1,2)*cp_1\n",
    (2, 3): "P_3^2 = 2*c_1 - xi*cp_1\n",
}


@pytest.mark.parametrize("d,q", sorted(GOLDEN_GEN))
def test_gen_text_golden(capsys, d, q):
    code, out, err = run(capsys, "gen", "--codim", str(d), "--degree", str(q), "--format", "text")
    assert code == 0 and out == GOLDEN_GEN[(d, q)] and err == ""


def test_gen_latex(capsys):
    code, out, _ = run(capsys, "gen", "--codim", "1", "--degree", "2", "--format", "latex")
    assert code == 0
    assert out == ("P_{2}^{1} = -c_{1} + \\left(1 + 2\\binom{\\xi-1}{1} + \\binom{\\xi-1}{2}\\right) c'_{1}\n")


def test_gen_json_roundtrips_through_cache(capsys, tmp_path):
    cache = tmp_path / "c"
    code, first, _ = run(capsys, "gen", "--codim", "2", "--degree", "4", "--format", "json",
                         "--cache-dir", str(cache))
    assert code == 0
    stored = (cache / "P_d2_q4.json").read_text()
    assert stored == first
    code, second, _ = run(capsys, "gen", "--codim", "2", "--degree", "4", "--format", "json",
                          "--cache-dir", str(cache))
    assert second == first
    assert (cache / "P_d2_q4.json").read_text() == stored
    code, listing, _ = run(capsys, "cache", "list", "--cache-dir", str(cache))
    assert "d=2 q=4" in listing
    code, _, err = run(capsys, "cache", "clear", "--cache-dir", str(cache))
    assert code == 0 and "removed 1" in err
    assert not (cache / "P_d2_q4.json").exists()


def test_cache_dir_from_environment(capsys, isolated_cache):
    run(capsys, "gen", "--codim", "1", "--degree", "3")
    assert (isolated_cache / "P_d1_q3.json").exists()


def test_eval_golden(capsys):
    code, out, _ = run(capsys, "eval", "--model", "P2", "--expr", "c(2,[O]-2[O(1)]+[O(2)])")
    assert (code, out) == (0, "-1*h^2\n")
    code, out, _ = run(capsys, "eval", "--model", "proj(P2; O(1)+O(2))", "--expr",
                       "c(2, push_s([O]))", "--format", "json")
    doc = json.loads(out)
    assert doc["value"] == "-2*h^2 + 3*h*x1 - 1*x1^2" and doc["level"] == 1


def test_usage_errors_exit_two(capsys):
    code, out, err = run(capsys, "eval", "--model", "P2", "--expr", "c(2,")
    assert code == 2 and out == "" and "line 1, column 5" in err
    code, _, err = run(capsys, "eval", "--model", "Q2", "--expr", "1")
    assert code == 2 and "UnknownModel" in err
    code, _, _ = run(capsys, "gen", "--codim", "x", "--degree", "1")
    assert code == 2
    code, _, _ = run(capsys, "verify", "--suite", "bogus")
    assert code == 2
    code, _, _ = run(capsys)
    assert code == 2


def test_verify_report_file_and_exit_code(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = run(capsys, "verify", "--suite", "thom", "--jobs", "1", "--report", str(report))
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["suite"] == "thom" and doc["summary"]["fail"] == 0
    assert all("millis" not in inst for inst in doc["instances"])
    assert out.splitlines()[-1].startswith("thom: ")


def test_verify_failure_exits_one(capsys, monkeypatch):
    import rrwd.verifier as vf

    real = vf._p_side
    monkeypatch.setattr(vf, "_p_side", lambda m, b, c, d, q: real(m, b, c, d, q) + 1)
    code, out, _ = run(capsys, "verify", "--suite", "main", "--max-codim", "1", "--max-degree", "1",
                       "--jobs", "1")
    assert code == 1
    assert "integrality-gap" in out


def test_verify_deterministic(capsys):
    args = ("verify", "--suite", "projection", "--seed", "7", "--jobs", "1", "--format", "json")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rrwd", "gen", "--codim", "2", "--degree", "2",
                           "--cache-dir", str(tmp_path)], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout == "P_2^2 = -xi\n"
