"""Chow-style rings of P^n and of towers of projective completions P(V + 1).

A model is ``Z[h, x_1, ..., x_L]`` modulo ``h^{n+1}`` and, for every layer,
``(-x_l) * prod_j (r_j - x_l)`` where the r_j are the Chern roots of the
split bundle V_l (integer multiples of h) and ``x_l = c_1(O(-1))`` on that
layer.  A class "lives on level l" when it only involves h, x_1..x_l; pulling
back along the projections is then the identity on representatives.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product

from .chernroots import VirtualBundle, total_chern
from .errors import TowerTooLarge
from .exactpoly import GradedPolynomial, VariableTable, homogeneous_part, invert_one_plus, substitute

MAX_GENERATORS = 6
MAX_DIMENSION = 8


@dataclass(frozen=True)
class TowerSpec:
    """``P^n`` followed by completions P(V_l + 1) with V_l = sum O(twist) pulled back from P^n."""

    n: int
    layers: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(int(t) for t in v) for v in self.layers))
        if self.n < 0:
            raise ValueError("P^n needs n >= 0")
        if any(len(v) == 0 for v in self.layers):
            raise ValueError("every layer needs a bundle of rank >= 1")

    def __str__(self):
        text = f"P{self.n}"
        for v in self.layers:
            bundle = "+".join(f"O({t})" for t in v)
            text = f"proj({text}; {bundle})"
        return text

    def truncated(self, levels: int) -> "TowerSpec":
        return TowerSpec(self.n, self.layers[:levels])


@dataclass(frozen=True)
class SupportedClass:
    """A class supported on a zero section: Thom coordinate on the base plus its ambient image."""

    model: "SpaceModel"
    layer: int
    thom_coordinate: GradedPolynomial
    ambient: GradedPolynomial

    def forget_support(self) -> GradedPolynomial:
        return self.ambient


class SpaceModel:
    def __init__(self, spec: TowerSpec):
        L = len(spec.layers)
        if 1 + L > MAX_GENERATORS:
            raise TowerTooLarge(f"{1 + L} generators exceed the limit of {MAX_GENERATORS}")
        dim = spec.n + sum(len(v) for v in spec.layers)
        if dim > MAX_DIMENSION:
            raise TowerTooLarge(f"dimension {dim} exceeds the limit of {MAX_DIMENSION}")
        self.spec = spec
        self.n = spec.n
        self.layers = spec.layers
        self.dim = dim
        self.table = VariableTable(("h",) + tuple(f"x{l}" for l in range(1, L + 1)))
        self._memo: dict = {}
        self._rules = [None] + [self._rule(l) for l in range(1, L + 1)]
        self.basis = tuple(
            e for e in product(range(self.n + 1), *[range(len(v) + 1) for v in self.layers])
        )

    def __repr__(self):
        return f"SpaceModel({self.spec})"

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    def rank(self, layer: int) -> int:
        return len(self.layers[layer - 1])

    # generators
    def one(self) -> GradedPolynomial:
        return GradedPolynomial.constant(self.table, 1, self.dim)

    def zero(self) -> GradedPolynomial:
        return GradedPolynomial.zero(self.table, self.dim)

    def gen(self, name: str) -> GradedPolynomial:
        return GradedPolynomial.variable(self.table, name, self.dim)

    def h(self) -> GradedPolynomial:
        return self.gen("h")

    def x(self, layer: int) -> GradedPolynomial:
        return self.gen(f"x{layer}")

    def lift(self, p: GradedPolynomial) -> GradedPolynomial:
        """Re-express a polynomial over a sub-table (e.g. a lower level) in this model's table."""
        if p.table == self.table:
            return p.with_truncation(self.dim)
        names = self.table.names
        terms = {}
        for e, c in p.terms.items():
            full = [0] * len(names)
            for name, k in zip(p.table.names, e):
                full[names.index(name)] = k
            terms[tuple(full)] = c
        return GradedPolynomial(self.table, terms, self.dim)

    def roots(self, layer: int) -> list:
        return [self.h() * t for t in self.layers[layer - 1]]

    def bundle(self, layer: int) -> VirtualBundle:
        return VirtualBundle(self.table, tuple((r, 1) for r in self.roots(layer)))

    def level_of(self, p: GradedPolynomial) -> int:
        used = p.variables_used()
        return max((int(name[1:]) for name in used if name.startswith("x")), default=0)

    # relations and normal form
    def _rule(self, layer: int) -> GradedPolynomial:
        """Polynomial equal to ``x_l^{d+1}`` in the ring, of x_l-degree <= d."""
        x = GradedPolynomial.variable(self.table, f"x{layer}", self.dim + 1)
        rel = -x
        for r in self.roots(layer):
            rel = rel * (r.with_truncation(self.dim + 1) - x)
        d = self.rank(layer)
        lead = (-1) ** (d + 1)
        return x ** (d + 1) - rel * lead

    def relation(self, layer: int) -> GradedPolynomial:
        x = self.x(layer)
        rel = -x
        for r in self.roots(layer):
            rel = rel * (r - x)
        return rel

    def _reduce_monomial(self, e: tuple) -> dict:
        hit = self._memo.get(e)
        if hit is not None:
            return hit
        if e[0] > self.n or self.table.degree(e) > self.dim:
            out: dict = {}
        else:
            top = 0
            for l in range(self.num_layers, 0, -1):
                if e[l] > self.rank(l):
                    top = l
                    break
            if not top:
                out = {e: 1}
            else:
                rest = list(e)
                rest[top] -= self.rank(top) + 1
                out = {}
                for t, c in self._rules[top].terms.items():
                    sub = self._reduce_monomial(tuple(a + b for a, b in zip(rest, t)))
                    for m, v in sub.items():
                        s = out.get(m, 0) + c * v
                        if s:
                            out[m] = s
                        else:
                            out.pop(m, None)
        self._memo[e] = out
        return out

    def normal_form(self, p: GradedPolynomial) -> GradedPolynomial:
        """Unique combination of basis monomials ``h^i prod x_l^{k_l}`` (i <= n, k_l <= rank V_l)."""
        p = self.lift(p) if p.table != self.table else p
        out: dict = {}
        for e, c in p.terms.items():
            for m, v in self._reduce_monomial(e).items():
                out[m] = out.get(m, 0) + c * v
        return GradedPolynomial(self.table, out, self.dim)

    def mul(self, a: GradedPolynomial, b: GradedPolynomial) -> GradedPolynomial:
        return self.normal_form(self.lift(a) * self.lift(b))

    def random_class(self, rng: random.Random, level: int | None = None, spread: int = 3
                     ) -> GradedPolynomial:
        """Random integer combination of basis monomials on the given level."""
        level = self.num_layers if level is None else level
        terms = {}
        for e in self.basis:
            if any(e[l] for l in range(level + 1, self.num_layers + 1)):
                continue
            c = rng.randint(-spread, spread)
            if c:
                terms[e] = c
        return GradedPolynomial(self.table, terms, self.dim)

    # characteristic classes
    def chern_V(self, layer: int) -> GradedPolynomial:
        return self.normal_form(total_chern(self.bundle(layer), self.dim).total())

    def chern_V_component(self, layer: int, k: int) -> GradedPolynomial:
        return homogeneous_part(self.chern_V(layer), k)

    def chern_Q(self, layer: int) -> GradedPolynomial:
        """Total Chern class of the universal quotient ``Q = (V + 1)/O(-1)``, via its roots."""
        roots = self.bundle(layer).roots + ((self.zero(), 1), (self.x(layer), -1))
        return self.normal_form(total_chern(VirtualBundle(self.table, roots), self.dim).total())

    def segre(self, layer: int, k: int) -> GradedPolynomial:
        """k-th Segre class of ``V + 1``: degree-k part of ``c(V)^{-1}``."""
        c = self.chern_V(layer)
        return self.normal_form(homogeneous_part(invert_one_plus(c - 1, self.dim), k))


def build_model(spec) -> SpaceModel:
    """Build a model from a :class:`TowerSpec` or a model string such as ``proj(P2; O(1)+O(2))``."""
    if isinstance(spec, str):
        from .exprparse import parse_model_spec

        spec = parse_model_spec(spec)
    return _build(spec)


_MODELS: dict = {}


def _build(spec: TowerSpec) -> SpaceModel:
    model = _MODELS.get(spec)
    if model is None:
        model = _MODELS[spec] = SpaceModel(spec)
    return model


def normal_form(model: SpaceModel, c: GradedPolynomial) -> GradedPolynomial:
    return model.normal_form(c)


def _check_level(model: SpaceModel, c: GradedPolynomial, level: int, what: str):
    got = model.level_of(c)
    if got > level:
        raise ValueError(f"{what} involves x{got} but must live on level {level}")


def thom_class(model: SpaceModel, layer: int) -> GradedPolynomial:
    """``t(V) = c_d(Q) = sum_i c_i(V) (-x)^{d-i} = prod_j (r_j - x)``."""
    x = model.x(layer)
    t = model.one()
    for r in model.roots(layer):
        t = t * (r - x)
    return model.normal_form(t)


def proj_pushforward(model: SpaceModel, c: GradedPolynomial, layer: int | None = None
                     ) -> GradedPolynomial:
    """``p_*`` from level ``layer`` to level ``layer - 1``: ``p_*(xi^d beta) = beta``, lower xi-powers die."""
    layer = model.num_layers if layer is None else layer
    c = model.normal_form(c)
    _check_level(model, c, layer, "p_* argument")
    d = model.rank(layer)
    sign = (-1) ** d  # x = -xi
    out = {}
    for e, v in c.terms.items():
        if e[layer] == d:
            e2 = list(e)
            e2[layer] = 0
            out[tuple(e2)] = v * sign
    return GradedPolynomial(model.table, out, model.dim)


def zero_section_pushforward(model: SpaceModel, a: GradedPolynomial, layer: int | None = None,
                             refined: bool = True):
    """``s_*(a) = p^*(a) t(V)``; refined form keeps the Thom coordinate ``a``."""
    layer = model.num_layers if layer is None else layer
    a = model.normal_form(a)
    _check_level(model, a, layer - 1, "s_* argument")
    ambient = model.mul(a, thom_class(model, layer))
    if not refined:
        return ambient
    return SupportedClass(model, layer, a, ambient)


def zero_section_pullback(model: SpaceModel, c: GradedPolynomial, layer: int | None = None
                          ) -> GradedPolynomial:
    """``s^*``: the tautological line is trivial along the zero section, so x_l -> 0."""
    layer = model.num_layers if layer is None else layer
    c = model.normal_form(c)
    _check_level(model, c, layer, "s^* argument")
    zero = GradedPolynomial.zero(model.table, model.dim)
    return model.normal_form(substitute(c, {f"x{layer}": zero}))


@dataclass(frozen=True)
class DivisorModel:
    """A hyperplane ``Z = P^{n-1}`` inside ``X = P^n``; both rings use the generator ``h``."""

    n: int
    ambient: SpaceModel = field(init=False)
    divisor: SpaceModel = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a hyperplane needs n >= 1")
        object.__setattr__(self, "ambient", _build(TowerSpec(self.n)))
        object.__setattr__(self, "divisor", _build(TowerSpec(self.n - 1)))


def divisor_pushforward(model: DivisorModel, a: GradedPolynomial) -> GradedPolynomial:
    """``i_*(h_Z^k) = h^{k+1}``."""
    a = model.divisor.normal_form(a)
    out = {}
    for (k,), v in a.terms.items():
        out[(k + 1,)] = v
    return model.ambient.normal_form(GradedPolynomial(model.ambient.table, out, model.ambient.dim))

