"""Truncated graded multivariate polynomials with exact coefficients.

Coefficients are Python ints (arbitrary precision) or ``fractions.Fraction``
for the rational Chern character / Todd computations.  A fraction whose
denominator is 1 is always stored as an int, so integral polynomials coming
out of rational computations compare equal to their integer twins.

Polynomials are treated as immutable values.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import DivisionRemainderNonzero, MixedVariableTables, NonzeroConstantTerm

DEFAULT_TRUNCATION = 8

Exps = tuple  # tuple[int, ...]


def _clean(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


@dataclass(frozen=True)
class VariableTable:
    names: tuple
    weights: tuple

    def __init__(self, names: Iterable[str], weights: Iterable[int] | None = None):
        names = tuple(names)
        weights = tuple(weights) if weights is not None else (1,) * len(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if len(weights) != len(names):
            raise ValueError("one weight per variable is required")
        if any(int(w) < 1 for w in weights):
            raise ValueError("variable weights must be >= 1")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "weights", tuple(int(w) for w in weights))

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def degree(self, exps: Exps) -> int:
        return sum(w * e for w, e in zip(self.weights, exps))

    def zero_exps(self) -> Exps:
        return (0,) * len(self.names)


class GradedPolynomial:
    """A polynomial over a :class:`VariableTable`, truncated above degree ``truncation``."""

    __slots__ = ("table", "terms", "truncation")

    def __init__(self, table: VariableTable, terms: Mapping[Exps, object] | None = None,
                 truncation: int = DEFAULT_TRUNCATION):
        self.table = table
        self.truncation = truncation
        clean = {}
        if terms:
            n = len(table)
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != n:
                    raise ValueError(f"exponent vector {exps} does not match {table.names}")
                if c == 0 or table.degree(exps) > truncation:
                    continue
                clean[exps] = _clean(c)
        self.terms = clean

    # construction helpers
    @classmethod
    def constant(cls, table, c, truncation=DEFAULT_TRUNCATION):
        return cls(table, {table.zero_exps(): c}, truncation)

    @classmethod
    def zero(cls, table, truncation=DEFAULT_TRUNCATION):
        return cls(table, {}, truncation)

    @classmethod
    def variable(cls, table, name, truncation=DEFAULT_TRUNCATION):
        exps = [0] * len(table)
        exps[table.index(name)] = 1
        return cls(table, {tuple(exps): 1}, truncation)

    @classmethod
    def linear(cls, table, coeffs: Mapping[str, object], truncation=DEFAULT_TRUNCATION):
        terms = {}
        for name, c in coeffs.items():
            exps = [0] * len(table)
            exps[table.index(name)] = 1
            terms[tuple(exps)] = terms.get(tuple(exps), 0) + c
        return cls(table, terms, truncation)

    def _new(self, terms, truncation=None):
        out = GradedPolynomial.__new__(GradedPolynomial)
        out.table = self.table
        out.truncation = self.truncation if truncation is None else truncation
        out.terms = terms
        return out

    def _coerce(self, other):
        if isinstance(other, GradedPolynomial):
            if other.table != self.table:
                raise MixedVariableTables(f"{self.table.names} vs {other.table.names}")
            return other
        if isinstance(other, (int, Fraction)):
            return GradedPolynomial.constant(self.table, other, self.truncation)
        return NotImplemented

    # queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.terms.values())

    def degree(self) -> int:
        return max((self.table.degree(e) for e in self.terms), default=-1)

    def constant_term(self):
        return self.terms.get(self.table.zero_exps(), 0)

    def coefficient(self, exps) -> object:
        return self.terms.get(tuple(exps), 0)

    def variables_used(self) -> set:
        used = set()
        for exps in self.terms:
            used.update(i for i, e in enumerate(exps) if e)
        return {self.table.names[i] for i in used}

    def sorted_terms(self):
        """Terms in canonical graded-lex order (by degree, then lex on the table order)."""
        deg = self.table.degree
        return sorted(self.terms.items(), key=lambda t: (deg(t[0]), tuple(-e for e in t[0])))

    # arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, 0) + c
            if s:
                terms[e] = _clean(s)
            else:
                terms.pop(e, None)
        D = min(self.truncation, other.truncation)
        if D < max(self.truncation, other.truncation):
            deg = self.table.degree
            terms = {e: c for e, c in terms.items() if deg(e) <= D}
        return self._new(terms, D)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self._new({})
            return self._new({e: _clean(c * other) for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mul_truncated(self, other, min(self.truncation, other.truncation))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = GradedPolynomial.constant(self.table, 1, self.truncation)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GradedPolynomial.constant(self.table, other, self.truncation)
        if not isinstance(other, GradedPolynomial):
            return NotImplemented
        return self.table == other.table and self.terms == other.terms

    def __hash__(self):
        return hash((self.table, frozenset(self.terms.items())))

    def with_truncation(self, D: int) -> "GradedPolynomial":
        deg = self.table.degree
        return self._new({e: c for e, c in self.terms.items() if deg(e) <= D}, D)

    def map_coefficients(self, f) -> "GradedPolynomial":
        return GradedPolynomial(self.table, {e: f(c) for e, c in self.terms.items()}, self.truncation)

    def serialize(self) -> str:
        return serialize(self)

    def __str__(self):
        return serialize(self)

    def __repr__(self):
        return f"GradedPolynomial({serialize(self)!r}, D={self.truncation})"


def mul_truncated(p: GradedPolynomial, q: GradedPolynomial, D: int) -> GradedPolynomial:
    if p.table != q.table:
        raise MixedVariableTables(f"{p.table.names} vs {q.table.names}")
    deg = p.table.degree
    if not p.terms or not q.terms:
        return GradedPolynomial.zero(p.table, D)
    qs = sorted(((deg(e), e, c) for e, c in q.terms.items()), key=lambda t: t[0])
    out: dict = {}
    get = out.get
    for e1, c1 in p.terms.items():
        d1 = deg(e1)
        if d1 > D:
            continue
        room = D - d1
        for d2, e2, c2 in qs:
            if d2 > room:
                break
            e = tuple([a + b for a, b in zip(e1, e2)])
            out[e] = get(e, 0) + c1 * c2
    terms = {e: _clean(c) for e, c in out.items() if c}
    res = GradedPolynomial.__new__(GradedPolynomial)
    res.table, res.terms, res.truncation = p.table, terms, D
    return res


def invert_one_plus(u: GradedPolynomial, D: int) -> GradedPolynomial:
    """Return ``(1 + u)^{-1}`` truncated at degree ``D``; ``u`` must have no constant term."""
    if u.constant_term() != 0:
        raise NonzeroConstantTerm("invert_one_plus needs a polynomial without constant term")
    u = u.with_truncation(D)
    one = GradedPolynomial.constant(u.table, 1, D)
    if u.is_zero():
        return one
    # Every term of u has degree >= 1, so (-u)^k vanishes for k > D.
    result = one
    power = one
    neg = -u
    for _ in range(D):
        power = mul_truncated(power, neg, D)
        if power.is_zero():
            break
        result = result + power
    return result


def power_one_plus(u: GradedPolynomial, n: int, D: int) -> GradedPolynomial:
    """``(1 + u)^n`` for any integer ``n``, truncated at ``D``."""
    base = GradedPolynomial.constant(u.table, 1, D) + u.with_truncation(D)
    if n < 0:
        base = invert_one_plus(u, D)
        n = -n
    return base.with_truncation(D) ** n


def exact_divide(p: GradedPolynomial, v: str) -> GradedPolynomial:
    """Divide ``p`` by the variable ``v``; raises unless ``p`` vanishes at ``v = 0``."""
    i = p.table.index(v)
    terms = {}
    for e, c in p.terms.items():
        if e[i] == 0:
            raise DivisionRemainderNonzero(
                f"{serialize(p)} is not divisible by {v}: term with {v}^0 present")
        e2 = list(e)
        e2[i] -= 1
        terms[tuple(e2)] = c
    return p._new(terms)


def homogeneous_part(p: GradedPolynomial, k: int) -> GradedPolynomial:
    if k < 0:
        raise ValueError("degree must be non-negative")
    deg = p.table.degree
    return p._new({e: c for e, c in p.terms.items() if deg(e) == k})


def substitute(p: GradedPolynomial, images: Mapping[str, GradedPolynomial],
               target: VariableTable | None = None, D: int | None = None) -> GradedPolynomial:
    """Ring map sending each variable of ``p`` to a polynomial over ``target``.

    Variables missing from ``images`` are sent to the variable of the same name
    in ``target``.
    """
    target = target or p.table
    D = p.truncation if D is None else D
    gens = []
    for name in p.table.names:
        if name in images:
            img = images[name]
            if img.table != target:
                raise MixedVariableTables(f"image of {name} lives over {img.table.names}")
            gens.append(img.with_truncation(D))
        else:
            gens.append(GradedPolynomial.variable(target, name, D))

    # Monomial images: fast path when every generator maps to a monomial.
    mono = []
    for g in gens:
        if len(g.terms) == 1:
            (e, c), = g.terms.items()
            mono.append((e, c))
        elif not g.terms:
            mono.append((None, 0))
        else:
            mono = None
            break

    out: dict = {}
    if mono is not None:
        zero = target.zero_exps()
        deg = target.degree
        for exps, c in p.terms.items():
            acc = list(zero)
            coeff = c
            dead = False
            for (ge, gc), k in zip(mono, exps):
                if not k:
                    continue
                if ge is None:
                    dead = True
                    break
                coeff = coeff * gc ** k
                for j, a in enumerate(ge):
                    acc[j] += a * k
            if dead:
                continue
            key = tuple(acc)
            if deg(key) > D:
                continue
            out[key] = out.get(key, 0) + coeff
        return GradedPolynomial(target, out, D)

    cache: dict = {}

    def gen_pow(i, k):
        key = (i, k)
        if key not in cache:
            cache[key] = gens[i] ** k if k > 1 else gens[i]
        return cache[key]

    result = GradedPolynomial.zero(target, D)
    for exps, c in p.terms.items():
        term = GradedPolynomial.constant(target, c, D)
        for i, k in enumerate(exps):
            if k:
                term = term * gen_pow(i, k)
                if term.is_zero():
                    break
        result = result + term
    return result


def _format_coeff(c) -> str:
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    return str(c)


def serialize(p: GradedPolynomial) -> str:
    """Canonical text form, e.g. ``1 + 3*h + 2*h^2`` or ``-1*h^2``."""
    if not p.terms:
        return "0"
    names = p.table.names
    parts = []
    for exps, c in p.sorted_terms():
        factors = []
        for name, e in zip(names, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        neg = c < 0
        body = _format_coeff(abs(c))
        if factors:
            body = body + "*" + "*".join(factors)
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


def parse_polynomial(text: str, table: VariableTable, truncation: int = DEFAULT_TRUNCATION
                     ) -> GradedPolynomial:
    """Inverse of :func:`serialize` (used by golden files and the cache)."""
    text = text.strip()
    if text == "0":
        return GradedPolynomial.zero(table, truncation)
    terms: dict = {}
    tokens = text.replace(" - ", " + -").split(" + ")
    for tok in tokens:
        tok = tok.strip()
        sign = 1
        if tok.startswith("-"):
            sign, tok = -1, tok[1:]
        pieces = tok.split("*")
        c = Fraction(pieces[0])
        exps = [0] * len(table)
        for f in pieces[1:]:
            name, _, e = f.partition("^")
            exps[table.index(name)] += int(e) if e else 1
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + sign * c
    return GradedPolynomial(table, terms, truncation)
