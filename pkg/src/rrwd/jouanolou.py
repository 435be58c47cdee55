"""Generation of the universal Riemann-Roch-without-denominators polynomials P_q^d.

P_q^d(xi, c_1, ..., c_{q-d}; c'_1, ..., c'_{q-d}) is read off from the
universal identity

    c_q(b * lambda_{-1}(Q^dual)) = P_q^d(rk b, c(b); c(Q)) * c_d(Q)

in a polynomial ring of Chern roots x_i (for b) and y_j (for Q): the left side
is computed with the splitting principle, divided by y_1 ... y_d, rewritten
in elementary symmetric functions and interpolated in the rank.

Rank samples use ``m = max(1, q - d)`` free roots for b together with
``rank - m`` trivial summands.  Only c_1..c_{q-d}(b) occur in P_q^d, and these
stay algebraically independent, so nothing is lost while the ring stays small.
Chern classes c'_j with j > d vanish for a rank-d bundle, so such monomials
never appear in the output.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .chernroots import (
    TotalClass,
    VirtualBundle,
    chern_character,
    chern_from_character,
    elementary_symmetric,
    lambda_minus1_dual,
    tensor,
    todd_inverse,
    total_chern,
)
from .errors import (
    NonIntegralEvaluation,
    NonSymmetricInput,
    RankSamplesInsufficient,
    StabilizationFailure,
    TruncationExceeded,
)
from .exactpoly import (
    DEFAULT_TRUNCATION,
    GradedPolynomial,
    VariableTable,
    exact_divide,
    homogeneous_part,
    invert_one_plus,
    mul_truncated,
    substitute,
)

SCHEMA_VERSION = 1


def binomial(n, k: int):
    """Generalized binomial coefficient ``n choose k``; exact for any integer or Fraction ``n``."""
    if k < 0:
        return 0
    num = 1
    for i in range(k):
        num *= n - i
    out = Fraction(num, factorial(k)) if not isinstance(num, Fraction) else num / factorial(k)
    if isinstance(out, Fraction) and out.denominator == 1:
        return int(out)
    return out


@dataclass(frozen=True)
class UniversalRing:
    """Chern-root ring for b (roots x_1..x_m, rank e) and Q (roots y_1..y_d)."""

    e: int
    d: int
    free_roots: int
    truncation: int

    @property
    def x_names(self):
        return tuple(f"x{i}" for i in range(1, self.free_roots + 1))

    @property
    def y_names(self):
        return tuple(f"y{j}" for j in range(1, self.d + 1))

    @property
    def table(self) -> VariableTable:
        return VariableTable(self.x_names + self.y_names)

    def b(self) -> VirtualBundle:
        t = self.table
        roots = VirtualBundle.from_roots(t, [{x: 1} for x in self.x_names])
        return roots + VirtualBundle.trivial(t, self.e - self.free_roots)

    def Q(self) -> VirtualBundle:
        return VirtualBundle.from_roots(self.table, [{y: 1} for y in self.y_names])


@lru_cache(maxsize=None)
def _line_times_koszul(d: int, D: int) -> GradedPolynomial:
    """Total Chern class of ``L_z (x) lambda_{-1}(Q^dual)`` over the table (z, y_1..y_d)."""
    table = VariableTable(("z",) + tuple(f"y{j}" for j in range(1, d + 1)))
    L = VirtualBundle.from_roots(table, [{"z": 1}])
    Q = VirtualBundle.from_roots(table, [{f"y{j}": 1} for j in range(1, d + 1)])
    return total_chern(tensor(L, lambda_minus1_dual(Q)), D).total()


def universal_total(e: int, d: int, D: int, free_roots: int | None = None) -> GradedPolynomial:
    """Total Chern class of ``b (x) lambda_{-1}(Q^dual)`` in the universal ring, up to degree D."""
    m = e if free_roots is None else free_roots
    ring = UniversalRing(e, d, m, D)
    table = ring.table
    F = _line_times_koszul(d, D)
    ys = {y: GradedPolynomial.variable(table, y, D) for y in ring.y_names}
    total = GradedPolynomial.constant(table, 1, D)
    for x in ring.x_names:
        images = dict(ys, z=GradedPolynomial.variable(table, x, D))
        total = mul_truncated(total, substitute(F, images, table, D), D)
    trivial = e - m
    if trivial:
        F0 = substitute(F, dict(ys, z=GradedPolynomial.zero(table, D)), table, D)
        if trivial < 0:
            F0 = invert_one_plus(F0 - 1, D)
        total = mul_truncated(total, F0 ** abs(trivial), D)
    return total


def universal_cq(e: int, d: int, q: int, free_roots: int | None = None,
                 truncation: int = DEFAULT_TRUNCATION) -> GradedPolynomial:
    """Degree-q part of ``c(b (x) lambda_{-1}(Q^dual))``; b has rank e, Q has rank d.

    With ``free_roots=None`` all e roots of b are independent variables.
    """
    if q > truncation:
        raise TruncationExceeded(f"degree {q} exceeds truncation {truncation}")
    if d < 1 or q < 0:
        raise ValueError("need d >= 1 and q >= 0")
    if free_roots is None and e < 1:
        raise ValueError("rank must be >= 1 without an explicit free_roots count")
    return homogeneous_part(universal_total(e, d, q, free_roots), q)


def universal_cq_grr(e: int, d: int, q: int, free_roots: int | None = None) -> GradedPolynomial:
    """Rational route to the same class: ``c_q`` of ``i_*(ch(b) Td(Q)^{-1})``.

    Pushforward along the zero section is multiplication by ``c_d(Q) = y_1...y_d``;
    Chern classes are recovered from the character by Newton's identities, which
    raises if any coefficient comes out non-integral.
    """
    m = e if free_roots is None else free_roots
    ring = UniversalRing(e, d, m, q)
    table = ring.table
    ch_b = chern_character(ring.b(), q).total()
    td_inv = todd_inverse(ring.Q(), q).total()
    top = GradedPolynomial.constant(table, 1, q)
    for y in ring.y_names:
        top = top * GradedPolynomial.variable(table, y, q)
    ch_push = mul_truncated(mul_truncated(ch_b, td_inv, q), top, q)
    return chern_from_character(TotalClass.from_polynomial(ch_push, q), 0, q)[q]


def express_in_elementary(p: GradedPolynomial, x_names: Sequence[str], y_names: Sequence[str]
                          ) -> dict:
    """Rewrite a polynomial symmetric in each block as a polynomial in e_i(x), e_j(y).

    Returns ``{(c_exps, cp_exps): coeff}`` with one exponent per variable of each block.
    """
    table = p.table
    D = p.truncation
    xi = [table.index(n) for n in x_names]
    yi = [table.index(n) for n in y_names]
    if sorted(xi + yi) != list(range(len(table))):
        raise ValueError("blocks must partition the variable table")
    ex = [None] + [elementary_symmetric(table, x_names, k, D) for k in range(1, len(xi) + 1)]
    ey = [None] + [elementary_symmetric(table, y_names, k, D) for k in range(1, len(yi) + 1)]
    memo: dict = {}

    def elem_monomial(a, b):
        key = (a, b)
        if key not in memo:
            out = GradedPolynomial.constant(table, 1, D)
            for k, n in enumerate(a, start=1):
                if n:
                    out = out * ex[k] ** n
            for k, n in enumerate(b, start=1):
                if n:
                    out = out * ey[k] ** n
            memo[key] = out
        return memo[key]

    def parts(lam):
        return tuple(lam[k] - (lam[k + 1] if k + 1 < len(lam) else 0) for k in range(len(lam)))

    rem = dict(p.terms)
    result: dict = {}
    while rem:
        lead = max(rem, key=lambda e: (tuple(e[i] for i in xi), tuple(e[i] for i in yi)))
        lx = tuple(lead[i] for i in xi)
        ly = tuple(lead[i] for i in yi)
        if list(lx) != sorted(lx, reverse=True) or list(ly) != sorted(ly, reverse=True):
            raise NonSymmetricInput(f"{GradedPolynomial(table, rem, D)} is not block-symmetric")
        coeff = rem[lead]
        a, b = parts(lx), parts(ly)
        result[(a, b)] = result.get((a, b), 0) + coeff
        for e, c in elem_monomial(a, b).terms.items():
            v = rem.get(e, 0) - coeff * c
            if v:
                rem[e] = v
            else:
                rem.pop(e, None)
    return {k: v for k, v in result.items() if v}


@dataclass(frozen=True)
class JouanolouPolynomial:
    """P_q^d with rank dependence in the binomial basis ``binom(xi - base_rank, k)``.

    ``terms`` is a sorted tuple of ``(c_exps, cp_exps, coeffs)`` where ``coeffs[k]``
    multiplies ``binom(xi - base_rank, k)``; exponent tuples have length ``q - d``
    (empty when ``q <= d``).
    """

    d: int
    q: int
    base_rank: int
    terms: tuple

    @property
    def width(self) -> int:
        return max(self.q - self.d, 0)

    def xi_coefficient(self, coeffs, xi):
        return sum(a * binomial(xi - self.base_rank, k) for k, a in enumerate(coeffs))

    def at_rank(self, xi: int) -> dict:
        """``{(c_exps, cp_exps): value}`` for a concrete integer rank."""
        out = {}
        for a, b, coeffs in self.terms:
            v = self.xi_coefficient(coeffs, xi)
            if v:
                out[(a, b)] = v
        return out

    def xi_monomial_coefficients(self, coeffs) -> list:
        """Coefficients of 1, xi, xi^2, ... (Fractions in general)."""
        out = [Fraction(0)] * max(len(coeffs), 1)
        for k, a in enumerate(coeffs):
            # binom(xi - e0, k) = prod_{i<k} (xi - e0 - i) / k!
            poly = [Fraction(1)]
            for i in range(k):
                shift = -(self.base_rank + i)
                nxt = [Fraction(0)] * (len(poly) + 1)
                for j, c in enumerate(poly):
                    nxt[j] += c * shift
                    nxt[j + 1] += c
                poly = nxt
            for j, c in enumerate(poly):
                out[j] += a * c / factorial(k)
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return out

    def integral_in_monomial_basis(self) -> bool:
        return all(c.denominator == 1 for _, _, co in self.terms
                   for c in self.xi_monomial_coefficients(co))

    def is_zero(self) -> bool:
        return not self.terms

    # serialization
    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "d": self.d,
            "q": self.q,
            "base_rank": self.base_rank,
            "terms": [
                {
                    "c_exps": list(a),
                    "cp_exps": list(b),
                    "xi_binomial": [{"k": k, "coeff": str(c)} for k, c in enumerate(co) if c],
                }
                for a, b, co in self.terms
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, doc: Mapping) -> "JouanolouPolynomial":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported cache schema {doc.get('schema_version')!r}")
        terms = {}
        for t in doc["terms"]:
            entries = {int(e["k"]): int(e["coeff"]) for e in t["xi_binomial"]}
            coeffs = [0] * (max(entries) + 1 if entries else 0)
            for k, c in entries.items():
                coeffs[k] = c
            terms[(tuple(t["c_exps"]), tuple(t["cp_exps"]))] = coeffs
        return _make_polynomial(int(doc["d"]), int(doc["q"]), int(doc["base_rank"]), terms)

    # rendering
    def _monomial_text(self, a, b):
        parts = []
        for i, n in enumerate(a, start=1):
            if n:
                parts.append(f"c_{i}" + (f"^{n}" if n > 1 else ""))
        for j, n in enumerate(b, start=1):
            if n:
                parts.append(f"cp_{j}" + (f"^{n}" if n > 1 else ""))
        return "*".join(parts)

    def _xi_text(self, coeffs) -> str:
        mono = self.xi_monomial_coefficients(coeffs)
        pieces = []
        if all(c.denominator == 1 for c in mono):
            for k, c in enumerate(mono):
                if c:
                    var = "" if k == 0 else ("xi" if k == 1 else f"xi^{k}")
                    pieces.append((int(c), var))
        else:
            single = self._single_binomial(coeffs)
            if single is not None:
                return single
            for k, c in enumerate(coeffs):
                if c:
                    var = "" if k == 0 else f"binom(xi-{self.base_rank},{k})"
                    pieces.append((c, var))
        return _join_signed(pieces, "*")

    def _single_binomial(self, coeffs, shifts=range(-8, 9)):
        """Render ``c*binom(xi+s,k)`` when the coefficient has that shape."""
        k = max((i for i, c in enumerate(coeffs) if c), default=0)
        probe = range(self.base_rank - 2, self.base_rank + k + 3)
        for s in shifts:
            c = self.xi_coefficient(coeffs, k - s)
            if c and all(self.xi_coefficient(coeffs, x) == c * binomial(x + s, k) for x in probe):
                shift = f"+{s}" if s > 0 else (f"-{-s}" if s < 0 else "")
                return _join_signed([(c, f"binom(xi{shift},{k})")], "*")
        return None

    def to_text(self) -> str:
        pieces = []
        for a, b, co in self._display_order():
            coeff = self._xi_text(co)
            mono = self._monomial_text(a, b)
            pieces.append(_combine(coeff, mono, "*"))
        body = _join_terms(pieces) if pieces else "0"
        return f"P_{self.q}^{self.d} = {body}"

    def to_latex(self) -> str:
        pieces = []
        for a, b, co in self._display_order():
            xi = []
            for k, c in enumerate(co):
                if c:
                    var = "" if k == 0 else rf"\binom{{\xi-{self.base_rank}}}{{{k}}}"
                    xi.append((c, var))
            coeff = _join_signed(xi, " ")
            mono_parts = []
            for i, n in enumerate(a, start=1):
                if n:
                    mono_parts.append(f"c_{{{i}}}" + (f"^{{{n}}}" if n > 1 else ""))
            for j, n in enumerate(b, start=1):
                if n:
                    mono_parts.append(f"c'_{{{j}}}" + (f"^{{{n}}}" if n > 1 else ""))
            mono = " ".join(mono_parts)
            pieces.append(_combine(coeff, mono, " ", left=r"\left(", right=r"\right)"))
        body = _join_terms(pieces) if pieces else "0"
        return f"P_{{{self.q}}}^{{{self.d}}} = {body}"

    def _display_order(self):
        def weight(t):
            a, b, _ = t
            return (sum(i * n for i, n in enumerate(a, 1)) + sum(j * n for j, n in enumerate(b, 1)),
                    tuple(-n for n in a), tuple(-n for n in b))
        return sorted(self.terms, key=weight)


def _join_signed(pieces, sep) -> str:
    out = []
    for c, var in pieces:
        neg = c < 0
        mag = abs(c)
        if not var:
            body = str(mag)
        elif mag == 1:
            body = var
        else:
            body = f"{mag}{sep if sep == '*' else ''}{var}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out) if out else "0"


def _combine(coeff: str, mono: str, sep: str, left="(", right=")") -> str:
    if not mono:
        return coeff
    if coeff == "1":
        return mono
    if coeff == "-1":
        return "-" + mono
    inner = coeff[1:] if coeff.startswith("-") else coeff
    if " + " in inner or " - " in inner:
        return f"{left}{coeff}{right}{sep}{mono}"
    return f"{coeff}{sep}{mono}"


def _join_terms(pieces) -> str:
    out = pieces[0]
    for p in pieces[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


def _make_polynomial(d, q, base_rank, terms: Mapping) -> JouanolouPolynomial:
    rows = []
    for (a, b), coeffs in terms.items():
        coeffs = list(coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if coeffs:
            rows.append((tuple(a), tuple(b), tuple(coeffs)))
    rows.sort()
    return JouanolouPolynomial(d, q, base_rank, tuple(rows))


def interpolate_rank(samples: Sequence, d: int, q: int) -> JouanolouPolynomial:
    """Fit integer finite-difference coefficients through consecutive rank samples.

    ``samples`` holds ``(rank, value)`` pairs where value is a ``{(c_exps, cp_exps): int}``
    dict or a bare integer (the constant monomial).  The xi-degree of every
    coefficient is at most q, so the (q+1)-st and higher differences must vanish.
    """
    if len(samples) < q + 2:
        raise RankSamplesInsufficient(f"need {q + 2} rank samples, got {len(samples)}")
    width = max(q - d, 0)
    zero_key = ((0,) * width, (0,) * width)
    samples = sorted(((e, v if isinstance(v, Mapping) else {zero_key: v}) for e, v in samples),
                     key=lambda s: s[0])
    ranks = [e for e, _ in samples]
    if ranks != list(range(ranks[0], ranks[0] + len(ranks))):
        raise RankSamplesInsufficient(f"sample ranks {ranks} are not consecutive")
    keys = set()
    for _, v in samples:
        keys.update(v)
    terms = {}
    for key in keys:
        row = [v.get(key, 0) for _, v in samples]
        diffs = []
        while row:
            diffs.append(row[0])
            row = [b - a for a, b in zip(row, row[1:])]
        if any(diffs[q + 1:]):
            raise StabilizationFailure(
                f"coefficient of {key} has xi-degree above {q}: differences {diffs}")
        terms[key] = diffs[: q + 1]
    return _make_polynomial(d, q, ranks[0], terms)


def base_rank(d: int, q: int) -> int:
    return max(1, q - d)


def rank_sample(e: int, d: int, q: int) -> dict:
    """P_q^d at rank e, read off from the universal identity (integer arithmetic only)."""
    m = base_rank(d, q)
    width = max(q - d, 0)
    U = universal_cq(e, d, q, free_roots=m, truncation=max(q, 1))
    ring = UniversalRing(e, d, m, q)
    for y in ring.y_names:
        U = exact_divide(U, y)
    raw = express_in_elementary(U, ring.x_names, ring.y_names)
    out = {}
    for (a, b), c in raw.items():
        if any(a[width:]):
            raise StabilizationFailure("a Chern class of b beyond degree q-d appeared")
        if any(b[width:]):
            raise StabilizationFailure("a Chern class of Q beyond degree q-d appeared")
        a = (tuple(a) + (0,) * width)[:width]
        b = (tuple(b) + (0,) * width)[:width]
        out[(a, b)] = out.get((a, b), 0) + c
    return {k: v for k, v in out.items() if v}


def _trivial_polynomial(d, q) -> JouanolouPolynomial | None:
    if q < 0:
        raise ValueError("degree must be non-negative")
    if d < 1:
        raise ValueError("codimension must be >= 1")
    if q == 0:
        return _make_polynomial(d, 0, 1, {((), ()): [1]})
    if q < d:
        return _make_polynomial(d, q, base_rank(d, q), {})
    return None


@lru_cache(maxsize=None)
def _generate(d: int, q: int, extra_samples: int) -> JouanolouPolynomial:
    trivial = _trivial_polynomial(d, q)
    if trivial is not None:
        return trivial
    e0 = base_rank(d, q)
    count = q + 2 + extra_samples
    samples = [(e, rank_sample(e, d, q)) for e in range(e0, e0 + count)]
    P = interpolate_rank(samples, d, q)
    for e in (e0 + count, e0 + count + 1):
        if P.at_rank(e) != rank_sample(e, d, q):
            raise StabilizationFailure(f"P_{q}^{d} does not reproduce the rank-{e} validation sample")
    return P


def generate(d: int, q: int, cache: "PolynomialCache | None" = None,
             extra_samples: int = 0) -> JouanolouPolynomial:
    """Return P_q^d, reading from / writing to ``cache`` when given."""
    if cache is not None and extra_samples == 0:
        hit = cache.load(d, q)
        if hit is not None:
            return hit
    P = _generate(d, q, extra_samples)
    if cache is not None and extra_samples == 0:
        cache.store(P)
    return P


def evaluate(P: JouanolouPolynomial, rank, c: Sequence, cp: Sequence,
             table: VariableTable | None = None, D: int | None = None,
             reduce: Callable[[GradedPolynomial], GradedPolynomial] | None = None
             ) -> GradedPolynomial:
    """Substitute a rank and Chern classes into P and reduce in the target ring.

    ``c[i-1]`` and ``cp[j-1]`` are the classes c_i and c'_j; missing entries count as 0.
    """
    if isinstance(rank, Fraction) and rank.denominator == 1:
        rank = int(rank)
    if not isinstance(rank, int) or isinstance(rank, bool):
        raise NonIntegralEvaluation(f"rank must be an integer, got {rank!r}")
    known = [x for x in list(c) + list(cp) if x is not None]
    if table is None:
        if not known:
            raise ValueError("cannot infer the target ring: pass table=")
        table = known[0].table
    if D is None:
        D = known[0].truncation if known else DEFAULT_TRUNCATION
    reduce = reduce or (lambda p: p)
    powers: dict = {}

    def power(kind, i, n):
        key = (kind, i, n)
        if key not in powers:
            seq = c if kind == "c" else cp
            base = seq[i] if i < len(seq) and seq[i] is not None else None
            if base is None:
                powers[key] = None
            else:
                powers[key] = reduce(base.with_truncation(D) ** n)
        return powers[key]

    result = GradedPolynomial.zero(table, D)
    for a, b, coeffs in P.terms:
        value = P.xi_coefficient(coeffs, rank)
        if not value:
            continue
        if isinstance(value, Fraction):
            raise NonIntegralEvaluation(f"xi-coefficient {value} at rank {rank}")
        term = GradedPolynomial.constant(table, value, D)
        for kind, exps in (("c", a), ("cp", b)):
            for i, n in enumerate(exps):
                if n:
                    f = power(kind, i, n)
                    if f is None:
                        term = None
                        break
                    term = reduce(term * f)
            if term is None:
                break
        if term is not None:
            result = result + term
    result = reduce(result)
    if not result.is_integral():
        raise NonIntegralEvaluation(f"evaluation produced {result}")
    return result


def structural_defect(P: JouanolouPolynomial) -> dict:
    """Pure-c' monomials that survive at xi = 0 (should be empty)."""
    return {(a, b): P.xi_coefficient(co, 0) for a, b, co in P.terms
            if not any(a) and P.xi_coefficient(co, 0)}


def default_cache_dir() -> Path:
    env = os.environ.get("JOUANOLOU_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "rrwd"


class PolynomialCache:
    """One JSON file per (d, q); writes go through a temporary file and a rename."""

    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()

    def path(self, d: int, q: int) -> Path:
        return self.directory / f"P_d{d}_q{q}.json"

    def load(self, d: int, q: int) -> JouanolouPolynomial | None:
        path = self.path(d, q)
        if not path.exists():
            return None
        P = JouanolouPolynomial.from_json(json.loads(path.read_text(encoding="utf-8")))
        if (P.d, P.q) != (d, q):
            raise ValueError(f"{path} holds P_{P.q}^{P.d}")
        return P

    def store(self, P: JouanolouPolynomial) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(P.d, P.q)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(P.dumps())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path

    def entries(self) -> list:
        if not self.directory.exists():
            return []
        out = []
        for path in sorted(self.directory.glob("P_d*_q*.json")):
            stem = path.stem[len("P_d"):]
            d, _, q = stem.partition("_q")
            out.append((int(d), int(q), path))
        return sorted(out)

    def clear(self) -> int:
        n = 0
        for _, _, path in self.entries():
            path.unlink()
            n += 1
        return n
