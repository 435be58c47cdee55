"""K_0-side models: integer combinations of line-bundle monomials.

A monomial is a tuple of twists ``(a, m_1, ..., m_L)`` standing for
``O_{P^n}(a) (x) O_1(m_1) (x) ... (x) O_L(m_L)``, where ``O_l(1)`` is the
tautological O(1) of layer l.  Trailing zero twists are stripped, so
``()`` is the structure sheaf and pullback along projections is free.
No relations are imposed here; Chern classes are evaluated in the Chow
model, which is where the relations live.
"""
from __future__ import annotations

from dataclasses import dataclass

from .chernroots import VirtualBundle, chern_character, total_chern
from .chowmodel import (
    DivisorModel,
    SpaceModel,
    SupportedClass,
    proj_pushforward,
    thom_class,
)
from .errors import PaperIdentityViolation, RankGuardExceeded
from .exactpoly import GradedPolynomial, homogeneous_part

KOSZUL_RANK_GUARD = 10


def _strip(mono) -> tuple:
    mono = tuple(int(t) for t in mono)
    end = len(mono)
    while end and mono[end - 1] == 0:
        end -= 1
    return mono[:end]


def _add(m1: tuple, m2: tuple) -> tuple:
    n = max(len(m1), len(m2))
    m1 = m1 + (0,) * (n - len(m1))
    m2 = m2 + (0,) * (n - len(m2))
    return _strip(a + b for a, b in zip(m1, m2))


class KClass:
    """Finite integer combination of line-bundle monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean: dict = {}
        for mono, n in (terms or {}).items():
            mono = _strip(mono)
            clean[mono] = clean.get(mono, 0) + int(n)
        self.terms = {m: n for m, n in clean.items() if n}

    @classmethod
    def line(cls, *twists: int, mult: int = 1) -> "KClass":
        return cls({_strip(twists): mult})

    @classmethod
    def one(cls) -> "KClass":
        return cls({(): 1})

    @property
    def rank(self) -> int:
        return sum(self.terms.values())

    @property
    def level(self) -> int:
        return max((max(len(m) - 1, 0) for m in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "KClass") -> "KClass":
        if isinstance(other, int):
            other = KClass({(): other})
        out = dict(self.terms)
        for m, n in other.terms.items():
            out[m] = out.get(m, 0) + n
        return KClass(out)

    __radd__ = __add__

    def __neg__(self) -> "KClass":
        return KClass({m: -n for m, n in self.terms.items()})

    def __sub__(self, other: "KClass") -> "KClass":
        return self + (-other)

    def __mul__(self, other) -> "KClass":
        if isinstance(other, int):
            return KClass({m: n * other for m, n in self.terms.items()})
        if not isinstance(other, KClass):
            return NotImplemented
        out: dict = {}
        for m1, n1 in self.terms.items():
            for m2, n2 in other.terms.items():
                m = _add(m1, m2)
                out[m] = out.get(m, 0) + n1 * n2
        return KClass(out)

    __rmul__ = __mul__

    def dual(self) -> "KClass":
        return KClass({tuple(-t for t in m): n for m, n in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, KClass):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for mono, n in self.sorted_terms():
            lit = "[O]" if not mono else "[O(" + ",".join(str(t) for t in mono) + ")]"
            mag = abs(n)
            body = lit if mag == 1 else f"{mag}{lit}"
            if not out:
                out.append(("-" if n < 0 else "") + body)
            else:
                out.append((" - " if n < 0 else " + ") + body)
        return "".join(out)

    def __repr__(self):
        return f"KClass({self})"


def monomial_root(model: SpaceModel, mono: tuple) -> GradedPolynomial:
    """First Chern class ``a h + sum_l m_l (-x_l)`` of a line-bundle monomial."""
    if len(mono) > model.num_layers + 1:
        raise ValueError(f"monomial {mono} needs more layers than {model.spec}")
    root = GradedPolynomial.zero(model.table, model.dim)
    for i, t in enumerate(mono):
        if t:
            g = model.h() if i == 0 else model.x(i)
            root = root + g * (t if i == 0 else -t)
    return root


def to_virtual_bundle(k: KClass, model: SpaceModel) -> VirtualBundle:
    roots = []
    for mono, n in k.sorted_terms():
        r = monomial_root(model, mono)
        roots.extend([(r, 1 if n > 0 else -1)] * abs(n))
    return VirtualBundle(model.table, tuple(roots))


def total_chern_of_kclass(k: KClass, model: SpaceModel) -> GradedPolynomial:
    total = model.one()
    for mono, n in k.sorted_terms():
        r = monomial_root(model, mono)
        if r.is_zero():
            continue
        factor = total_chern(VirtualBundle(model.table, ((r, 1 if n > 0 else -1),) * abs(n)),
                             model.dim).total()
        total = model.mul(total, factor)
    return total


def chern_of_kclass(k: KClass, q: int, model: SpaceModel) -> GradedPolynomial:
    return homogeneous_part(total_chern_of_kclass(k, model), q)


def chern_character_of_kclass(k: KClass, model: SpaceModel, D: int | None = None
                              ) -> GradedPolynomial:
    D = model.dim if D is None else D
    ch = chern_character(to_virtual_bundle(k, model), D).total()
    return model.normal_form(ch)


def _exterior_powers(lines: list) -> list:
    """``[lambda^0, ..., lambda^r]`` of a sum of line-bundle monomials."""
    powers = [KClass.one()]
    for mono in lines:
        L = KClass({mono: 1})
        nxt = powers + [KClass()]
        for i in range(len(powers), 0, -1):
            nxt[i] = nxt[i] + powers[i - 1] * L
        powers = nxt
    return powers


def koszul_class(model: SpaceModel, layer: int) -> KClass:
    """``sum_i (-1)^i [Lambda^i Q^dual]`` with ``[Q^dual] = [V^dual] + [O] - [O_l(1)]``.

    Exterior powers of the difference use the finite rule
    ``lambda^i(A - L) = sum_j (-1)^j lambda^{i-j}(A) L^j``.
    """
    if not 1 <= layer <= model.num_layers:
        raise ValueError(f"{model.spec} has no layer {layer}")
    twists = model.layers[layer - 1]
    d = len(twists)
    if d > KOSZUL_RANK_GUARD:
        raise RankGuardExceeded(f"rank {d} exceeds the Koszul guard {KOSZUL_RANK_GUARD}")
    A = [_strip((-t,)) for t in twists] + [()]
    lam_A = _exterior_powers(A)
    O1 = KClass({(0,) * layer + (1,): 1})
    O1_powers = [KClass.one()]
    for _ in range(d):
        O1_powers.append(O1_powers[-1] * O1)
    total = KClass()
    for i in range(d + 1):
        lam_i = KClass()
        for j in range(i + 1):
            lam_i = lam_i + lam_A[i - j] * O1_powers[j] * ((-1) ** j)
        total = total + lam_i * ((-1) ** i)
    return total


def koszul_pushforward(b: KClass, model: SpaceModel, layer: int | None = None) -> KClass:
    """``s_!(b) = p^*(b) * lambda_{-1}(Q^dual)`` on the given layer."""
    layer = model.num_layers if layer is None else layer
    if b.level >= layer:
        raise ValueError(f"{b} does not live below layer {layer}")
    return b * koszul_class(model, layer)


def divisor_koszul_pushforward(b: KClass, model: DivisorModel) -> KClass:
    """``i_*[O_Z(k)] = [O(k)] - [O(k-1)]`` for a hyperplane."""
    if b.level > 0:
        raise ValueError("classes on the hyperplane only carry a base twist")
    return b * (KClass.one() - KClass.line(-1))


def refined_chern(b: KClass, q: int, model: SpaceModel, layer: int | None = None,
                  cache=None) -> SupportedClass:
    """Chern class of ``s_!(b)`` with support on the zero section.

    The Thom coordinate comes from the universal polynomial, the ambient class
    from the Koszul K-class; both must agree after forgetting support.
    """
    from .jouanolou import evaluate, generate

    layer = model.num_layers if layer is None else layer
    d = model.rank(layer)
    ambient = chern_of_kclass(koszul_pushforward(b, model, layer), q, model)
    P = generate(d, q, cache=cache)
    cb = total_chern_of_kclass(b, model)
    cV = model.chern_V(layer)
    width = max(q - d, 0)
    coordinate = evaluate(
        P, b.rank,
        [homogeneous_part(cb, i) for i in range(1, width + 1)],
        [homogeneous_part(cV, j) for j in range(1, width + 1)],
        table=model.table, D=model.dim, reduce=model.normal_form,
    )
    expected = model.mul(coordinate, thom_class(model, layer))
    if ambient != expected:
        raise PaperIdentityViolation(
            f"c_{q}(s_!({b})) differs from s_*(P_{q}^{d}) on {model.spec}", lhs=ambient, rhs=expected)
    if proj_pushforward(model, ambient, layer) != coordinate:
        raise PaperIdentityViolation(
            f"Thom coordinate of c_{q}(s_!({b})) is not recovered by p_*", lhs=ambient, rhs=coordinate)
    return SupportedClass(model, layer, coordinate, ambient)
