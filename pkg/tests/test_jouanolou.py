"""Universal polynomials against an independent symbolic oracle."""
import itertools
import json
from fractions import Fraction

import pytest
import sympy as sp

from rrwd.errors import NonIntegralEvaluation, TruncationExceeded
from rrwd.exactpoly import GradedPolynomial, VariableTable
from rrwd.jouanolou import (
    JouanolouPolynomial,
    PolynomialCache,
    binomial,
    evaluate,
    generate,
    interpolate_rank,
    rank_sample,
    structural_defect,
    universal_cq,
    universal_cq_grr,
)


def oracle_cq(free, trivial, d, q):
    """c_q(b (x) lambda_{-1}(Q^dual)) with sympy; b = sum of ``free`` root lines plus ``trivial`` copies of O."""
    xs = sp.symbols(f"x1:{free + 1}") if free else ()
    ys = sp.symbols(f"y1:{d + 1}")
    t = sp.Symbol("t")

    def trunc(expr):
        poly = sp.Poly(sp.expand(expr), t)
        return sum(c * t ** k for (k,), c in poly.terms() if k <= q)

    def factor(r, sign):
        if sign > 0:
            return 1 + t * r
        return sum((-t * r) ** k for k in range(q + 1))

    total = sp.Integer(1)
    bases = list(xs) + [0] * abs(trivial)
    signs = [1] * len(xs) + [1 if trivial > 0 else -1] * abs(trivial)
    for base, bsign in zip(bases, signs):
        for size in range(d + 1):
            for S in itertools.combinations(ys, size):
                total = trunc(total * factor(base - sum(S), bsign * (-1) ** size))
    return sp.expand(sp.Poly(total, t).coeff_monomial(t ** q)), xs, ys


def sympy_value(P, rank, xs, ys):
    width = P.width
    c = [sum(sp.Mul(*s) for s in itertools.combinations(xs, i)) for i in range(1, width + 1)]
    cp = [sum(sp.Mul(*s) for s in itertools.combinations(ys, j)) for j in range(1, width + 1)]
    out = 0
    for a, b, coeffs in P.terms:
        v = P.xi_coefficient(coeffs, rank)
        term = sp.Rational(v.numerator, v.denominator) if isinstance(v, Fraction) else sp.Integer(v)
        for ci, n in zip(c, a):
            term *= ci ** n
        for cj, n in zip(cp, b):
            term *= cj ** n
        out += term
    return sp.expand(out * sp.Mul(*ys))


ORACLE_CASES = [
    (1, 0, 1, 1), (1, 0, 1, 2), (1, 0, 1, 3), (2, 0, 1, 2), (2, 0, 1, 3), (3, 0, 1, 3),
    (1, 0, 2, 2), (1, 0, 2, 3), (2, 0, 2, 3), (2, 0, 2, 4), (1, 0, 3, 3), (1, 0, 3, 4),
    (0, -1, 1, 2), (1, -2, 1, 3), (0, -1, 2, 3), (1, 1, 2, 4), (0, 0, 2, 3),
]


@pytest.mark.parametrize("free,trivial,d,q", ORACLE_CASES)
def test_polynomial_matches_symbolic_oracle(free, trivial, d, q):
    expected, xs, ys = oracle_cq(free, trivial, d, q)
    P = generate(d, q)
    assert sympy_value(P, free + trivial, xs, ys) == expected


@pytest.mark.parametrize("e,d,q", [(2, 1, 3), (3, 1, 3), (2, 2, 3), (3, 2, 4), (2, 3, 4)])
def test_reduced_roots_agree_with_full_roots(e, d, q):
    """The cheap sampling ring is a specialization of the full root ring."""
    full = universal_cq(e, d, q)
    m = max(1, q - d)
    reduced = universal_cq(e, d, q, free_roots=m)
    # Setting the extra roots to zero maps full onto reduced.
    names = reduced.table.names
    terms = {}
    for exps, c in full.terms.items():
        named = dict(zip(full.table.names, exps))
        if any(named[f"x{i}"] for i in range(m + 1, e + 1)):
            continue
        key = tuple(named.get(n, 0) for n in names)
        terms[key] = terms.get(key, 0) + c
    assert GradedPolynomial(reduced.table, terms, reduced.truncation) == reduced


@pytest.mark.parametrize("e,d,q", [(1, 1, 2), (2, 1, 3), (1, 2, 2), (2, 2, 4), (3, 3, 3), (2, 3, 5)])
def test_grr_rational_route_agrees(e, d, q):
    assert universal_cq_grr(e, d, q) == universal_cq(e, d, q)


def test_known_polynomials():
    assert generate(1, 1).to_text() == "P_1^1 = xi"
    assert generate(2, 2).to_text() == "P_2^2 = -xi"
    assert generate(3, 3).to_text() == "P_3^3 = 2*xi"
    assert generate(4, 4).to_text() == "P_4^4 = -6*xi"
    P = generate(1, 2)
    assert P.to_text() == "P_2^1 = -c_1 + binom(xi+1,2)*cp_1"
    assert not P.integral_in_monomial_basis()
    for xi in range(-3, 7):
        expected = {((1,), (0,)): -1, ((0,), (1,)): binomial(xi + 1, 2)}
        assert P.at_rank(xi) == {k: v for k, v in expected.items() if v}


def test_trivial_ranges():
    assert generate(3, 0).to_text() == "P_0^3 = 1"
    for q in (1, 2):
        assert generate(3, q).is_zero()


def test_binomial_generalized():
    assert binomial(-1, 2) == 1
    assert binomial(5, 2) == 10
    assert binomial(Fraction(1, 2), 2) == Fraction(-1, 8)
    assert binomial(3, -1) == 0


def test_interpolation_detects_high_degree():
    from rrwd.errors import StabilizationFailure

    samples = [(e, e ** 3) for e in range(1, 5)]
    with pytest.raises(StabilizationFailure):
        interpolate_rank(samples, 1, 2)


def test_rank_sample_is_integer_and_matches():
    P = generate(2, 4)
    for e in range(-2, 5):
        s = rank_sample(e, 2, 4)
        assert all(isinstance(v, int) for v in s.values())
        assert P.at_rank(e) == s


def test_structural_vanishing():
    for d in (1, 2, 3):
        for q in range(1, 6):
            assert structural_defect(generate(d, q)) == {}


def test_evaluate_in_a_ring():
    T = VariableTable(("h",))
    h = GradedPolynomial.variable(T, "h", 3)
    P = generate(1, 2)
    # rank 2, c_1 = h, c'_1 = 2h
    assert evaluate(P, 2, [h], [2 * h]) == h * 5
    with pytest.raises(NonIntegralEvaluation):
        evaluate(P, Fraction(1, 2), [h], [h])


def test_truncation_guard():
    with pytest.raises(TruncationExceeded):
        universal_cq(1, 1, 9)


def test_json_roundtrip_and_cache(tmp_path):
    P = generate(2, 4)
    doc = json.loads(P.dumps())
    assert doc["schema_version"] == 1
    assert all(isinstance(item["coeff"], str) for t in doc["terms"] for item in t["xi_binomial"])
    assert JouanolouPolynomial.from_json(doc) == P
    cache = PolynomialCache(tmp_path)
    path = cache.store(P)
    before = path.read_bytes()
    assert cache.load(2, 4) == P
    assert generate(2, 4, cache=cache) == P
    assert path.read_bytes() == before
    assert [(d, q) for d, q, _ in cache.entries()] == [(2, 4)]
    assert cache.clear() == 1 and cache.load(2, 4) is None


def test_cache_rejects_unknown_schema(tmp_path):
    doc = generate(1, 2).to_json()
    doc["schema_version"] = 99
    with pytest.raises(ValueError):
        JouanolouPolynomial.from_json(doc)


def test_latex_uses_stored_basis():
    text = generate(1, 2).to_latex()
    assert "\\binom{\\xi-1}{2}" in text
