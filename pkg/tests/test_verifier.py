import json

import pytest

import rrwd.verifier as vf
from rrwd.errors import CheckFailed
from rrwd.verifier import CheckInstance, Grid, default_grid, run_check, run_suite


def test_main_divisor_example():
    inst = CheckInstance.make("main", "P2", a="[O]", q=2, kind="divisor")
    report = run_check(inst)
    (r,) = report.results
    assert r.status == "pass"
    assert r.lhs == r.rhs == "1*h^2"


def test_thom_example_reports_thom_class():
    report = run_check(CheckInstance.make("thom", "proj(P2; O(1)+O(2))"))
    assert report.ok
    assert report.results[0].lhs == "2*h^2 - 3*h*x1 + 1*x1^2"


def test_excess_with_unit_gives_top_chern():
    from rrwd.chowmodel import build_model, zero_section_pullback, zero_section_pushforward

    m = build_model("proj(P2; O(1)+O(2))")
    got = zero_section_pullback(m, zero_section_pushforward(m, m.one(), 1).ambient, 1)
    assert got == m.chern_V_component(1, 2)


@pytest.mark.parametrize("suite", ["thom", "excess", "projection", "normalization"])
def test_small_suites_pass(suite):
    report = run_suite(suite, grid=Grid(bases=(1, 2), max_codim=2), jobs=1)
    assert report.results and report.ok


def test_empty_grid_is_vacuous_pass():
    report = run_suite("main", instances=[], jobs=1)
    assert report.ok and report.results == []
    assert report.warnings


def test_reports_are_sorted_and_reproducible():
    a = run_suite("projection", grid=Grid(bases=(1,), max_codim=1, draws=3), seed=4, jobs=1)
    b = run_suite("projection", grid=Grid(bases=(1,), max_codim=1, draws=3), seed=4, jobs=1)
    assert a.dumps() == b.dumps()
    keys = [r.instance.key() for r in a.results]
    assert keys == sorted(keys)
    assert "millis" not in a.dumps()
    assert "millis" in a.dumps(timings=True)


def test_parallel_matches_serial():
    grid = Grid(bases=(1,), max_codim=2, max_degree=3)
    assert run_suite("main", grid=grid, jobs=2).dumps() == run_suite("main", grid=grid, jobs=1).dumps()


def test_grid_skips_degrees_above_dimension():
    for inst in default_grid("main"):
        p = inst.p
        if p.get("kind") != "divisor":
            spec_dim = int(inst.model.split("P")[1][0]) + inst.model.count("O(")
            assert int(p["q"]) <= spec_dim
    assert len(default_grid("main")) + len(default_grid("ky2")) >= 20


def _corrupt(monkeypatch, delta):
    real = vf._p_side

    def shifted(model, b, cN, d, q):
        return real(model, b, cN, d, q) + delta

    monkeypatch.setattr(vf, "_p_side", shifted)


def test_broken_polynomial_is_an_integrality_gap(monkeypatch):
    """Main fails while the rational route agrees: must be flagged, never a pass."""
    _corrupt(monkeypatch, 1)
    inst = CheckInstance.make("main", "proj(P1; O(1))", a="[O]", q=1)
    report = run_check(inst)
    r = report.results[0]
    assert r.status == "integrality-gap"
    assert r.lhs != r.rhs
    assert not report.ok
    doc = json.loads(report.dumps())
    assert doc["instances"][0]["lhs"] == r.lhs and doc["instances"][0]["rhs"] == r.rhs
    with pytest.raises(CheckFailed) as err:
        run_check(inst, raise_on_failure=True)
    assert err.value.lhs == r.lhs


def test_failure_reproducible_from_instance(monkeypatch):
    real = vf.zero_section_pullback
    monkeypatch.setattr(vf, "zero_section_pullback", lambda m, c, layer: real(m, c, layer) + m.h())
    inst = CheckInstance.make("projection", "proj(P2; O(1)+O(2))", seed=7, draw=3)
    first = run_check(inst)
    assert first.results[0].status == "fail"
    assert "alpha = " in first.results[0].detail
    assert run_check(inst).dumps() == first.dumps()


def test_text_report_is_aligned():
    report = run_suite("thom", grid=Grid(bases=(1,), max_codim=1), jobs=1)
    lines = report.to_text().splitlines()
    assert lines[0].startswith("check")
    assert lines[-1].startswith("thom: ")
    assert len({ln.index("pass") for ln in lines[1:-1]}) == 1


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("bogus")
