from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrwd.chernroots import (
    TotalClass,
    VirtualBundle,
    chern_character,
    chern_from_character,
    dual,
    elementary_symmetric,
    lambda_minus1_dual,
    tensor,
    todd_inverse,
    total_chern,
)
from rrwd.errors import NegativeSignInput, NonIntegralResult
from rrwd.exactpoly import GradedPolynomial, VariableTable

T = VariableTable(("a", "b", "c"))
D = 5


def lin(**kw):
    return GradedPolynomial.linear(T, kw, D)


def bundle(*roots, sign=1):
    return VirtualBundle.from_roots(T, roots, sign)


def test_total_chern_of_split_bundle():
    V = bundle({"a": 1}, {"a": 2})
    got = total_chern(V, D).total()
    a = lin(a=1)
    assert got == (1 + a) * (1 + 2 * a)


def test_total_chern_is_multiplicative_on_sums():
    V, W = bundle({"a": 1}), bundle({"b": 1}, {"c": -1})
    assert total_chern(V + W, D).total() == total_chern(V, D).total() * total_chern(W, D).total()


def test_negative_part_inverts():
    V = bundle({"a": 1})
    assert total_chern(V - V, D).total() == 1
    assert V.rank == 1 and (V - V).rank == 0


def test_trivial_bundle_negative_rank():
    V = VirtualBundle.trivial(T, -3)
    assert V.rank == -3
    assert total_chern(V, D).total() == 1


def test_chern_character_of_line():
    x = lin(a=1)
    expected = sum((x ** k) * Fraction(1, [1, 1, 2, 6, 24, 120][k]) for k in range(D + 1))
    assert chern_character(bundle({"a": 1}), D).total() == expected


def test_todd_inverse_of_line():
    x = lin(a=1)
    expected = 1 - x * Fraction(1, 2) + x ** 2 * Fraction(1, 6) - x ** 3 * Fraction(1, 24) \
        + x ** 4 * Fraction(1, 120) - x ** 5 * Fraction(1, 720)
    assert todd_inverse(bundle({"a": 1}), D).total() == expected
    with pytest.raises(NegativeSignInput):
        todd_inverse(-bundle({"a": 1}), D)


@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2), st.sampled_from([1, -1])),
                min_size=1, max_size=4))
@settings(max_examples=40, deadline=None)
def test_newton_inverts_character(spec):
    roots = tuple((lin(a=i, b=j), s) for i, j, s in spec)
    V = VirtualBundle(T, roots)
    ch = chern_character(V, D)
    assert chern_from_character(ch, V.rank, D).total() == total_chern(V, D).total()


def test_non_integral_character_rejected():
    ch = TotalClass.from_polynomial(lin(a=1) * Fraction(1, 2), D)
    with pytest.raises(NonIntegralResult):
        chern_from_character(ch, 0, D)


def test_lambda_minus1_dual_rank_two():
    V = bundle({"a": 1}, {"b": 1})
    K = lambda_minus1_dual(V)
    assert K.rank == 0
    # c(1 - L_a^dual - L_b^dual + (L_a L_b)^dual) = (1-a-b)/((1-a)(1-b))
    a, b = lin(a=1), lin(b=1)
    from rrwd.exactpoly import invert_one_plus
    expected = (1 - a - b) * invert_one_plus(-a, D) * invert_one_plus(-b, D)
    assert total_chern(K, D).total() == expected
    with pytest.raises(NegativeSignInput):
        lambda_minus1_dual(-V)


def test_dual_and_tensor():
    L, M = bundle({"a": 1}), bundle({"b": 1}, {"c": 1})
    assert total_chern(dual(L), D).total() == 1 - lin(a=1)
    LM = tensor(L, M)
    assert LM.rank == 2
    assert total_chern(LM, D).total() == (1 + lin(a=1, b=1)) * (1 + lin(a=1, c=1))


def test_elementary_symmetric():
    e2 = elementary_symmetric(T, ("a", "b", "c"), 2, D)
    assert e2 == lin(a=1) * lin(b=1) + lin(a=1) * lin(c=1) + lin(b=1) * lin(c=1)
