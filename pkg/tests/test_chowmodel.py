import random

import pytest

from rrwd.chowmodel import (
    DivisorModel,
    TowerSpec,
    build_model,
    divisor_pushforward,
    proj_pushforward,
    thom_class,
    zero_section_pullback,
    zero_section_pushforward,
)
from rrwd.errors import TowerTooLarge
from rrwd.exactpoly import parse_polynomial, serialize

SPEC = "proj(P2; O(1)+O(2))"


@pytest.fixture
def model():
    return build_model(SPEC)


def P(model, text):
    return parse_polynomial(text, model.table, model.dim)


def test_spec_string_roundtrip():
    spec = TowerSpec(2, ((1, 2),))
    assert str(spec) == SPEC
    assert build_model(SPEC).spec == spec
    assert str(TowerSpec(2, ((1,), (-1,)))) == "proj(proj(P2; O(1)); O(-1))"


def test_relation_reduces_top_power(model):
    x = model.x(1)
    assert model.normal_form(x ** 3) == P(model, "-2*h^2*x1 + 3*h*x1^2")
    assert model.normal_form(model.relation(1)).is_zero()
    assert model.normal_form(model.h() ** 3).is_zero()


def test_thom_class_and_pushforwards(model):
    t = thom_class(model, 1)
    assert serialize(t) == "2*h^2 - 3*h*x1 + 1*x1^2"
    assert proj_pushforward(model, t, 1) == model.one()
    xi = -model.x(1)
    assert proj_pushforward(model, xi ** 3, 1) == P(model, "-3*h")
    assert zero_section_pullback(model, t, 1) == model.chern_V_component(1, 2)


def test_segre_classes(model):
    # p_*(xi^{d+k}) = s_k(V + 1), the inverse Chern class of V
    xi = -model.x(1)
    for k in range(3):
        assert proj_pushforward(model, model.normal_form(xi ** (2 + k)), 1) == model.segre(1, k)
    assert model.segre(1, 1) == P(model, "-3*h")
    assert model.segre(1, 2) == P(model, "7*h^2")


def test_quotient_top_class_is_thom(model):
    from rrwd.exactpoly import homogeneous_part

    assert homogeneous_part(model.chern_Q(1), 2) == thom_class(model, 1)


def test_projection_formula_random(model):
    rng = random.Random(3)
    for _ in range(10):
        alpha = model.random_class(rng, 1)
        b = model.random_class(rng, 0)
        lhs = zero_section_pushforward(
            model, model.mul(zero_section_pullback(model, alpha, 1), b), 1).ambient
        assert lhs == model.mul(alpha, zero_section_pushforward(model, b, 1).ambient)


def test_supported_class_keeps_coordinate(model):
    a = model.h()
    s = zero_section_pushforward(model, a, 1)
    assert s.thom_coordinate == a
    assert s.forget_support() == model.mul(a, thom_class(model, 1))
    with pytest.raises(ValueError):
        zero_section_pushforward(model, model.x(1), 1)


def test_basis_rank(model):
    assert len(model.basis) == 3 * 3
    assert model.dim == 4


def test_divisor_model():
    dm = DivisorModel(2)
    assert divisor_pushforward(dm, dm.divisor.one()) == dm.ambient.h()
    assert divisor_pushforward(dm, dm.divisor.h()) == dm.ambient.h() ** 2
    with pytest.raises(ValueError):
        DivisorModel(0)


def test_size_guards():
    with pytest.raises(TowerTooLarge):
        build_model(TowerSpec(6, ((0, 0, 0),)))
    with pytest.raises(TowerTooLarge):
        build_model(TowerSpec(0, ((0,),) * 6))


def test_point_with_trivial_rank_two_is_p2():
    m = build_model("proj(P0; O(0)+O(0))")
    t = thom_class(m, 1)
    assert t == m.normal_form(m.x(1) ** 2)
    assert proj_pushforward(m, t, 1) == m.one()
