import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rrwd.chowmodel import TowerSpec, build_model
from rrwd.errors import ArityMismatch, ExprSyntaxError, UnknownModel
from rrwd.exactpoly import serialize
from rrwd.exprparse import (
    ChernOf,
    ChowValue,
    EvaluationError,
    KLit,
    KValue,
    ZeroSectionPush,
    evaluate_expression,
    parse_class_expr,
    parse_kclass,
    parse_model_spec,
    tokenize,
)
from rrwd.kmodel import KClass


def test_parse_examples():
    ast = parse_class_expr("c(2, push_s([O]))")
    assert ast == ChernOf(2, ZeroSectionPush(KLit(((),))))
    assert parse_class_expr("proj(P2; O(1)+O(2))") == TowerSpec(2, ((1, 2),))


def test_syntax_error_position():
    with pytest.raises(ExprSyntaxError) as err:
        parse_class_expr("c(2,")
    assert (err.value.line, err.value.column) == (1, 5)
    with pytest.raises(ExprSyntaxError) as err:
        parse_class_expr("c(2, [O])\n + $")
    assert (err.value.line, err.value.column) == (2, 4)


def test_arity_errors():
    with pytest.raises(ArityMismatch):
        parse_class_expr("c(2)")
    with pytest.raises(ArityMismatch):
        parse_class_expr("c(2, [O], [O])")
    with pytest.raises(ArityMismatch):
        parse_class_expr("ch([O], [O])")


def test_unknown_model():
    with pytest.raises(UnknownModel):
        parse_model_spec("Q3")
    with pytest.raises(UnknownModel):
        build_model("proj(P2 O(1))")


CANONICAL = [
    "c(2, push_s([O]))",
    "[O] - 2*[O(1)] + [O(2)]",
    "c(1, [O(1,-2)])*h^2",
    "-(h + x1)^2",
    "push_p(thom()*x1)",
    "pull_s(thom())",
    "P(2,4)(1; c(1, [O(1)]), 0; h, h^2)",
    "ch([O(1)])*tdinv([O(1)+O(2)])",
]


@pytest.mark.parametrize("src", CANONICAL)
def test_print_parse_identity(src):
    ast = parse_class_expr(src)
    assert str(ast) == src
    assert parse_class_expr(str(ast)) == ast


atoms = st.sampled_from(["h", "x1", "[O]", "[O(1)]", "thom()", "3"])


def _combine(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: f"{t[0]} + {t[1]}"),
        st.tuples(children, children).map(lambda t: f"{t[0]} - ({t[1]})"),
        st.tuples(children, children).map(lambda t: f"({t[0]}) * ({t[1]})"),
        children.map(lambda c: f"c(1, {c})"),
        children.map(lambda c: f"({c})^2"),
    )


@given(st.recursive(atoms, _combine, max_leaves=6))
@settings(max_examples=80, deadline=None)
def test_canonical_form_is_a_fixed_point(src):
    once = str(parse_class_expr(src))
    assert str(parse_class_expr(once)) == once


def test_tokenizer_columns():
    toks = tokenize("c(2,\n  [O])")
    assert [(t.text, t.line, t.column) for t in toks if t.text in ("c", "[")] == [("c", 1, 1), ("[", 2, 3)]


def test_parse_kclass():
    assert parse_kclass("[O] - 2[O(1)] + [O(2)]") == \
        KClass.one() - KClass.line(1) * 2 + KClass.line(2)
    assert parse_kclass("[O(1) + O(-1)]") == KClass.line(1) + KClass.line(-1)
    with pytest.raises(ExprSyntaxError):
        parse_kclass("h + [O]")


def test_evaluate_chern_on_p2():
    m = build_model("P2")
    v = evaluate_expression(parse_class_expr("c(2,[O]-2[O(1)]+[O(2)])"), m)
    assert isinstance(v, ChowValue) and serialize(v.p) == "-1*h^2"


def test_evaluate_push_on_tower():
    m = build_model("proj(P2; O(1)+O(2))")
    v = evaluate_expression(parse_class_expr("c(2, push_s([O]))"), m)
    assert serialize(v.p) == "-2*h^2 + 3*h*x1 - 1*x1^2"
    assert v.level == 1
    k = evaluate_expression(parse_class_expr("push_s([O(1)])"), m)
    assert isinstance(k, KValue) and k.k.rank == 0
    one = evaluate_expression(parse_class_expr("push_p(thom())"), m)
    assert serialize(one.p) == "1" and one.level == 0
    theorem = evaluate_expression(parse_class_expr("P(2,2)(1; ; ) * thom()"), m)
    assert theorem.p == v.p


def test_evaluation_errors():
    m = build_model("P2")
    with pytest.raises(EvaluationError):
        evaluate_expression(parse_class_expr("thom()"), m)
    with pytest.raises(EvaluationError):
        evaluate_expression(parse_class_expr("h + [O]"), m)
    with pytest.raises(EvaluationError):
        evaluate_expression(parse_class_expr("push_s([O])"), m)
