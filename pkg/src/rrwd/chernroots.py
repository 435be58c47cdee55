"""Splitting-principle calculus on virtual bundles given by signed Chern roots."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Iterable, Sequence

from .errors import MixedVariableTables, NegativeSignInput, NonIntegralResult, RankGuardExceeded
from .exactpoly import (
    GradedPolynomial,
    VariableTable,
    homogeneous_part,
    mul_truncated,
    power_one_plus,
)

LAMBDA_RANK_GUARD = 12


def _root_key(r: GradedPolynomial):
    return tuple(sorted(r.terms.items()))


@dataclass(frozen=True)
class VirtualBundle:
    """Formal difference of sums of line bundles; ``roots`` holds ``(c1, sign)`` pairs."""

    table: VariableTable
    roots: tuple

    def __post_init__(self):
        for r, s in self.roots:
            if s not in (1, -1):
                raise ValueError(f"root sign must be +1 or -1, got {s}")
            if r.table != self.table:
                raise MixedVariableTables(f"root over {r.table.names}, bundle over {self.table.names}")
            if any(r.table.degree(e) != 1 for e in r.terms):
                raise ValueError(f"Chern root {r} is not a linear form")

    @property
    def rank(self) -> int:
        return sum(s for _, s in self.roots)

    @classmethod
    def from_roots(cls, table: VariableTable, roots: Iterable, sign: int = 1) -> "VirtualBundle":
        """Build from linear forms (polynomials or ``{name: coeff}`` dicts)."""
        out = []
        for r in roots:
            if not isinstance(r, GradedPolynomial):
                r = GradedPolynomial.linear(table, r)
            out.append((r, sign))
        return cls(table, tuple(out))

    @classmethod
    def trivial(cls, table: VariableTable, rank: int = 1) -> "VirtualBundle":
        zero = GradedPolynomial.zero(table)
        sign = 1 if rank >= 0 else -1
        return cls(table, tuple((zero, sign) for _ in range(abs(rank))))

    def __add__(self, other: "VirtualBundle") -> "VirtualBundle":
        return direct_sum(self, other)

    def __neg__(self) -> "VirtualBundle":
        return VirtualBundle(self.table, tuple((r, -s) for r, s in self.roots))

    def __sub__(self, other: "VirtualBundle") -> "VirtualBundle":
        return direct_sum(self, -other)

    def multiset(self) -> Counter:
        """Net signed multiplicity of each root; equal classes have equal multisets."""
        c: Counter = Counter()
        for r, s in self.roots:
            c[_root_key(r)] += s
        return Counter({k: v for k, v in c.items() if v})


@dataclass(frozen=True)
class TotalClass:
    """Graded class ``c_0 + c_1 + ... + c_D`` kept as its homogeneous components."""

    components: tuple

    def __getitem__(self, k: int) -> GradedPolynomial:
        if k < len(self.components):
            return self.components[k]
        return GradedPolynomial.zero(self.components[0].table, self.components[0].truncation)

    def __len__(self):
        return len(self.components)

    def total(self) -> GradedPolynomial:
        out = self.components[0]
        for c in self.components[1:]:
            out = out + c
        return out

    @classmethod
    def from_polynomial(cls, p: GradedPolynomial, D: int) -> "TotalClass":
        p = p.with_truncation(D)
        return cls(tuple(homogeneous_part(p, k) for k in range(D + 1)))


def direct_sum(V: VirtualBundle, W: VirtualBundle) -> VirtualBundle:
    if V.table != W.table:
        raise MixedVariableTables(f"{V.table.names} vs {W.table.names}")
    return VirtualBundle(V.table, V.roots + W.roots)


def tensor(V: VirtualBundle, W: VirtualBundle) -> VirtualBundle:
    if V.table != W.table:
        raise MixedVariableTables(f"{V.table.names} vs {W.table.names}")
    roots = tuple((r + s, a * b) for r, a in V.roots for s, b in W.roots)
    return VirtualBundle(V.table, roots)


def dual(V: VirtualBundle) -> VirtualBundle:
    return VirtualBundle(V.table, tuple((-r, s) for r, s in V.roots))


def lambda_minus1_dual(V: VirtualBundle) -> VirtualBundle:
    """Koszul class ``sum_i (-1)^i [Lambda^i V^dual]`` of an honest bundle, as signed roots."""
    if any(s < 0 for _, s in V.roots):
        raise NegativeSignInput("lambda_{-1} is only defined here for honest bundles")
    d = len(V.roots)
    if d > LAMBDA_RANK_GUARD:
        raise RankGuardExceeded(f"rank {d} exceeds the subset guard {LAMBDA_RANK_GUARD}")
    zero = GradedPolynomial.zero(V.table)
    roots = [(zero, 1)]
    for r, _ in V.roots:
        # multiply by (1 - [L^dual]): every existing root is also shifted by -r with flipped sign
        roots = roots + [(x - r, -s) for x, s in roots]
    return VirtualBundle(V.table, tuple(roots))


def total_chern(V: VirtualBundle, D: int) -> TotalClass:
    """``prod (1 + r)^{sign}`` over the roots, truncated at degree ``D``."""
    one = GradedPolynomial.constant(V.table, 1, D)
    total = one
    by_root: dict = {}
    mult: Counter = Counter()
    for r, s in V.roots:
        k = _root_key(r)
        by_root.setdefault(k, r)
        mult[k] += s
    for k in sorted(mult, key=repr):
        n = mult[k]
        r = by_root[k]
        if n == 0 or r.is_zero():
            continue
        total = mul_truncated(total, power_one_plus(r, n, D), D)
    return TotalClass.from_polynomial(total, D)


def _exp_series(r: GradedPolynomial, D: int, sign: int = 1) -> GradedPolynomial:
    """``exp(sign * r)`` truncated at ``D``."""
    r = r.with_truncation(D) * sign
    term = GradedPolynomial.constant(r.table, 1, D)
    out = term
    for k in range(1, D + 1):
        term = mul_truncated(term, r, D) * Fraction(1, k)
        if term.is_zero():
            break
        out = out + term
    return out


def chern_character(V: VirtualBundle, D: int) -> TotalClass:
    out = GradedPolynomial.zero(V.table, D)
    mult: Counter = Counter()
    by_root: dict = {}
    for r, s in V.roots:
        k = _root_key(r)
        by_root.setdefault(k, r)
        mult[k] += s
    for k in sorted(mult, key=repr):
        if mult[k]:
            out = out + _exp_series(by_root[k], D) * mult[k]
    return TotalClass.from_polynomial(out, D)


def todd_inverse(V: VirtualBundle, D: int) -> TotalClass:
    """``prod (1 - exp(-r)) / r`` over the (positive) roots."""
    if any(s < 0 for _, s in V.roots):
        raise NegativeSignInput("todd_inverse expects an honest bundle")
    one = GradedPolynomial.constant(V.table, 1, D)
    out = one
    for r, _ in V.roots:
        r = r.with_truncation(D)
        factor = one
        power = one
        for k in range(1, D + 1):
            power = mul_truncated(power, r, D)
            if power.is_zero():
                break
            factor = factor + power * Fraction((-1) ** k, factorial(k + 1))
        out = mul_truncated(out, factor, D)
    return TotalClass.from_polynomial(out, D)


def chern_from_character(ch: TotalClass, rank: int, D: int,
                         reduce: Callable[[GradedPolynomial], GradedPolynomial] | None = None
                         ) -> TotalClass:
    """Invert the Chern character by Newton's identities.

    ``reduce`` maps a polynomial to its normal form in a quotient ring; it is
    applied along the way and before the integrality check, so the check is
    made on canonical representatives.
    """
    reduce = reduce or (lambda p: p)
    table = ch[0].table
    if ch[0] != rank:
        raise ValueError(f"ch_0 = {ch[0]} does not match rank {rank}")
    power_sums = [None] + [reduce(ch[k] * factorial(k)) for k in range(1, D + 1)]
    c = [GradedPolynomial.constant(table, 1, D)]
    for k in range(1, D + 1):
        acc = GradedPolynomial.zero(table, D)
        for i in range(1, k + 1):
            term = mul_truncated(c[k - i], power_sums[i], D)
            acc = acc + (term if i % 2 == 1 else -term)
        c.append(reduce(homogeneous_part(acc, k) * Fraction(1, k)))
    for k, comp in enumerate(c):
        if not comp.is_integral():
            raise NonIntegralResult(f"c_{k} = {comp} has non-integer coefficients")
    return TotalClass(tuple(c))


def elementary_symmetric(table: VariableTable, names: Sequence[str], k: int,
                         D: int) -> GradedPolynomial:
    """``e_k`` of the listed variables."""
    from itertools import combinations

    terms = {}
    idx = [table.index(n) for n in names]
    for combo in combinations(idx, k):
        e = [0] * len(table)
        for i in combo:
            e[i] = 1
        terms[tuple(e)] = 1
    return GradedPolynomial(table, terms, D)
