"""Catalog of executable identity checks with structured, reproducible reports.

Every check computes two sides of an identity by independent routes and
compares them exactly.  Statuses are ``pass``, ``fail`` and
``integrality-gap``; the last one marks a main-theorem failure where the
rational Grothendieck-Riemann-Roch route still agrees, which is exactly
the situation the integral theorem rules out, so it fails the run.
"""
from __future__ import annotations

import json
import logging
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .chernroots import TotalClass, VirtualBundle, chern_from_character, todd_inverse, total_chern
from .chowmodel import (
    DivisorModel,
    SpaceModel,
    TowerSpec,
    build_model,
    divisor_pushforward,
    proj_pushforward,
    thom_class,
    zero_section_pullback,
    zero_section_pushforward,
)
from .errors import CheckFailed, EngineError, NonIntegralResult
from .exactpoly import DEFAULT_TRUNCATION, GradedPolynomial, homogeneous_part
from .exprparse import parse_kclass
from .jouanolou import (
    evaluate,
    generate,
    rank_sample,
    structural_defect,
)
from .kmodel import (
    KClass,
    chern_character_of_kclass,
    chern_of_kclass,
    divisor_koszul_pushforward,
    koszul_pushforward,
    refined_chern,
    total_chern_of_kclass,
)

log = logging.getLogger(__name__)

SUITES = ("main", "ky2", "thom", "grr", "excess", "projection", "functoriality",
          "normalization", "structure")
PASS, FAIL, GAP = "pass", "fail", "integrality-gap"
RANDOM_DRAWS = 10
GRR_DEGREE = 6


@dataclass(frozen=True)
class CheckInstance:
    check_id: str
    model: str = ""
    params: tuple = ()  # sorted (name, value) pairs
    seed: int = 0

    @classmethod
    def make(cls, check_id, model="", seed=0, **params):
        return cls(check_id, str(model), tuple(sorted(params.items())), seed)

    @property
    def p(self) -> dict:
        return dict(self.params)

    def key(self) -> tuple:
        return (self.check_id, self.model, json.dumps(self.params), self.seed)

    def rng(self) -> random.Random:
        return random.Random(f"{self.seed}|{self.check_id}|{self.model}|{json.dumps(self.params)}")


@dataclass
class CheckResult:
    instance: CheckInstance
    status: str
    lhs: str | None = None
    rhs: str | None = None
    detail: str | None = None
    millis: float = 0.0

    def to_json(self, timings: bool = False) -> dict:
        out = {"check_id": self.instance.check_id, "model": self.instance.model,
               "params": dict(self.instance.params), "status": self.status}
        if self.status != PASS:
            out["lhs"] = self.lhs
            out["rhs"] = self.rhs
        if self.detail:
            out["detail"] = self.detail
        if timings:
            out["millis"] = round(self.millis, 3)
        return out


@dataclass
class Report:
    suite: str
    results: list
    seed: int = 0
    warnings: list = field(default_factory=list)
    engine_version: str = __version__
    truncation: int = DEFAULT_TRUNCATION

    @property
    def ok(self) -> bool:
        return all(r.status == PASS for r in self.results)

    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, GAP: 0}
        for r in self.results:
            out[r.status] += 1
        return out

    def to_json(self, timings: bool = False) -> dict:
        return {
            "suite": self.suite,
            "engine_version": self.engine_version,
            "truncation": self.truncation,
            "seed": self.seed,
            "instances": [r.to_json(timings) for r in self.results],
            "summary": self.counts(),
            "warnings": list(self.warnings),
        }

    def dumps(self, timings: bool = False) -> str:
        return json.dumps(self.to_json(timings), indent=2, sort_keys=True) + "\n"

    def to_text(self, timings: bool = False) -> str:
        rows = [("check", "model", "params", "status") + (("ms",) if timings else ())]
        for r in self.results:
            params = " ".join(f"{k}={v}" for k, v in r.instance.params)
            row = (r.instance.check_id, r.instance.model or "-", params or "-", r.status)
            rows.append(row + ((f"{r.millis:.1f}",) if timings else ()))
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
        c = self.counts()
        lines.append(f"{self.suite}: {c[PASS]} passed, {c[FAIL]} failed, {c[GAP]} integrality-gap")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        for r in self.results:
            if r.status != PASS:
                lines.append(f"{r.status}: {r.instance.check_id} {r.instance.model} "
                             f"{dict(r.instance.params)}: {r.detail or ''}")
                lines.append(f"  lhs = {r.lhs}")
                lines.append(f"  rhs = {r.rhs}")
        return "\n".join(lines) + "\n"


# helpers --------------------------------------------------------------------

def _classes_of(total: GradedPolynomial, upto: int) -> list:
    return [homogeneous_part(total, i) for i in range(1, upto + 1)]


def _p_side(model: SpaceModel, b: KClass, cN: GradedPolynomial, d: int, q: int) -> GradedPolynomial:
    """``P_q^d(rk b, c(b); c(N))`` evaluated in the model."""
    width = max(q - d, 0)
    cb = total_chern_of_kclass(b, model)
    return evaluate(generate(d, q), b.rank, _classes_of(cb, width), _classes_of(cN, width),
                    table=model.table, D=model.dim, reduce=model.normal_form)


def _single_layer(inst: CheckInstance) -> tuple:
    model = build_model(inst.model)
    if model.num_layers < 1:
        raise ValueError(f"{inst.check_id} needs a model with a bundle layer")
    return model, model.num_layers


def _result(inst, lhs, rhs, detail=None):
    status = PASS if lhs == rhs else FAIL
    return CheckResult(inst, status, str(lhs), str(rhs), detail)


def _first_mismatch(inst, pairs):
    """``pairs`` is a list of (label, lhs, rhs); report the first disagreement."""
    for label, lhs, rhs in pairs:
        if lhs != rhs:
            return CheckResult(inst, FAIL, str(lhs), str(rhs), label)
    label, lhs, rhs = pairs[0]
    return CheckResult(inst, PASS, str(lhs), str(rhs))


def _grr_sides(model: SpaceModel, layer: int, b: KClass, D: int):
    """Rational characters of ``s_!(b)`` and of ``s_*(ch(b) Td(V)^{-1})``."""
    sb = koszul_pushforward(b, model, layer)
    lhs = chern_character_of_kclass(sb, model, D).with_truncation(D)
    ch_b = chern_character_of_kclass(b, model, D)
    td_inv = model.normal_form(todd_inverse(model.bundle(layer), D).total())
    rhs = model.mul(model.mul(ch_b, td_inv), thom_class(model, layer)).with_truncation(D)
    return sb, lhs, rhs


# checks ---------------------------------------------------------------------

def _check_main(inst: CheckInstance) -> CheckResult:
    p = inst.p
    b = parse_kclass(p["a"])
    q = int(p["q"])
    if p.get("kind") == "divisor":
        dm = DivisorModel(build_model(inst.model).n)
        Z, X = dm.divisor, dm.ambient
        lhs = chern_of_kclass(divisor_koszul_pushforward(b, dm), q, X)
        coordinate = _p_side(Z, b, Z.one() + Z.h(), 1, q)
        rhs = divisor_pushforward(dm, coordinate)
        return _result(inst, lhs, rhs, None if lhs == rhs else "c_q(i_! a) != i_*(P_q^1)")
    model, layer = _single_layer(inst)
    d = model.rank(layer)
    lhs = chern_of_kclass(koszul_pushforward(b, model, layer), q, model)
    coordinate = _p_side(model, b, model.chern_V(layer), d, q)
    rhs = model.mul(coordinate, thom_class(model, layer))
    if lhs == rhs:
        supported = refined_chern(b, q, model, layer)
        if supported.thom_coordinate != coordinate:
            return CheckResult(inst, FAIL, str(supported.thom_coordinate), str(coordinate),
                               "refined Thom coordinate disagrees")
        return CheckResult(inst, PASS, str(lhs), str(rhs))
    # Integral identity failed; decide whether the rational route still agrees.
    try:
        _, ch_l, ch_r = _grr_sides(model, layer, b, model.dim)
        rational_ok = ch_l == ch_r
    except EngineError:
        rational_ok = False
    status = GAP if rational_ok else FAIL
    return CheckResult(inst, status, str(lhs), str(rhs), "c_q(s_! a) != s_*(P_q^d)")


def _check_ky2(inst: CheckInstance) -> CheckResult:
    model, layer = _single_layer(inst)
    b = parse_kclass(inst.p["a"])
    q = int(inst.p["q"])
    d = model.rank(layer)
    t = thom_class(model, layer)
    lhs = model.mul(_p_side(model, b, model.chern_V(layer), d, q), t)
    rhs = model.mul(_p_side(model, b, model.chern_Q(layer), d, q), t)
    return _result(inst, lhs, rhs, None if lhs == rhs else "P(a, N) t(N) != P(p^*a, Q) t(N)")


def _check_thom(inst: CheckInstance) -> CheckResult:
    model, layer = _single_layer(inst)
    d = model.rank(layer)
    t = thom_class(model, layer)
    one = model.one()
    xi = -model.x(layer)
    pairs = [
        ("s_*(1) = t(V)", zero_section_pushforward(model, one, layer).ambient, t),
        ("c_d(Q) = t(V)", homogeneous_part(model.chern_Q(layer), d), t),
        ("p_*(t(V)) = 1", proj_pushforward(model, t, layer), one),
        ("s^*(t(V)) = c_d(V)", zero_section_pullback(model, t, layer),
         model.chern_V_component(layer, d)),
    ]
    for k in range(0, model.dim - d + 1):
        pairs.append((f"p_*(xi^{d + k}) = s_{k}(V+1)",
                      proj_pushforward(model, model.normal_form(xi ** (d + k)), layer),
                      model.segre(layer, k)))
    if d == 1:
        twist = model.layers[layer - 1][0]
        mono = (twist,) + (0,) * (layer - 1) + (1,)
        pairs.append(("c_1(L (x) O(1)) = t(L)", chern_of_kclass(KClass.line(*mono), 1, model), t))
    return _first_mismatch(inst, pairs)


def _check_grr(inst: CheckInstance) -> CheckResult:
    model, layer = _single_layer(inst)
    b = parse_kclass(inst.p["a"])
    D = min(GRR_DEGREE, model.dim)
    sb, ch_l, ch_r = _grr_sides(model, layer, b, D)
    if ch_l != ch_r:
        return CheckResult(inst, FAIL, str(ch_l), str(ch_r), "ch(s_! a) != s_*(ch(a) Td(V)^{-1})")
    integral = total_chern_of_kclass(sb, model).with_truncation(D)
    try:
        from_oracle = chern_from_character(TotalClass.from_polynomial(ch_r, D), 0, D,
                                           reduce=model.normal_form).total()
    except NonIntegralResult as exc:
        return CheckResult(inst, GAP, str(integral), str(ch_r), f"rational oracle not integral: {exc}")
    if from_oracle != integral:
        return CheckResult(inst, GAP, str(integral), str(from_oracle),
                           "Chern classes from the rational oracle differ from the K-side")
    return CheckResult(inst, PASS, str(ch_l), str(ch_r))


def _check_excess(inst: CheckInstance) -> CheckResult:
    model, layer = _single_layer(inst)
    a = model.random_class(inst.rng(), level=layer - 1)
    lhs = zero_section_pullback(model, zero_section_pushforward(model, a, layer).ambient, layer)
    rhs = model.mul(model.chern_V_component(layer, model.rank(layer)), a)
    return _result(inst, lhs, rhs, None if lhs == rhs else f"s^* s_*(a) != c_d(V) a for a = {a}")


def _check_projection(inst: CheckInstance) -> CheckResult:
    model, layer = _single_layer(inst)
    rng = inst.rng()
    alpha = model.random_class(rng, level=layer)
    b = model.random_class(rng, level=layer - 1)
    lhs = zero_section_pushforward(
        model, model.mul(zero_section_pullback(model, alpha, layer), b), layer).ambient
    rhs = model.mul(alpha, zero_section_pushforward(model, b, layer).ambient)
    detail = None if lhs == rhs else f"alpha = {alpha}, b = {b}"
    return _result(inst, lhs, rhs, detail)


def _check_functoriality(inst: CheckInstance) -> CheckResult:
    model = build_model(inst.model)
    if model.num_layers != 2:
        raise ValueError("functoriality needs a two-layer tower")
    b = parse_kclass(inst.p["a"])
    q = int(inst.p["q"])
    t1, t2 = thom_class(model, 1), thom_class(model, 2)
    t12 = model.mul(t1, t2)
    N = VirtualBundle(model.table, model.bundle(1).roots + model.bundle(2).roots)
    cN = model.normal_form(total_chern(N, model.dim).total())
    d = model.rank(1) + model.rank(2)
    composite_k = koszul_pushforward(koszul_pushforward(b, model, 1), model, 2)
    lhs = chern_of_kclass(composite_k, q, model)
    rhs = model.mul(_p_side(model, b, cN, d, q), t12)
    one = model.one()
    pushed = zero_section_pushforward(
        model, zero_section_pushforward(model, one, 1).ambient, 2).ambient
    bottom = zero_section_pullback(model, zero_section_pullback(model, pushed, 2), 1)
    cd1 = model.chern_V_component(1, model.rank(1))
    cd2 = model.chern_V_component(2, model.rank(2))
    return _first_mismatch(inst, [
        (f"c_{q}(s2_! s1_! a) = s_*(P_{q}^{d}(a, V1+V2))", lhs, rhs),
        ("s2_* s1_*(1) = t(V1) t(V2)", pushed, t12),
        ("s^*(s_*(1)) = c_d1(V1) c_d2(V2)", bottom, model.mul(cd1, cd2)),
        ("c_d1(V1) c_d2(V2) = c_top(V1+V2)", model.mul(cd1, cd2), homogeneous_part(cN, d)),
    ])


def _check_normalization(inst: CheckInstance) -> CheckResult:
    dm = DivisorModel(build_model(inst.model).n)
    rng = inst.rng()
    terms = {}
    for _ in range(rng.randint(1, 3)):
        mono = (rng.randint(-2, 2),)
        terms[mono] = terms.get(mono, 0) + rng.choice([-2, -1, 1, 2])
    a = KClass(terms)
    X = dm.ambient
    pushed = divisor_koszul_pushforward(a, dm)
    return _first_mismatch(inst, [
        (f"c_1(i_! a) = rk(a) h for a = {a}", chern_of_kclass(pushed, 1, X), X.h() * a.rank),
        ("i_*(1) = h", divisor_pushforward(dm, dm.divisor.one()), X.h()),
        ("c_1(i_! O_Z) = i_*(1)", chern_of_kclass(divisor_koszul_pushforward(KClass.one(), dm), 1, X),
         divisor_pushforward(dm, dm.divisor.one())),
    ])


def _check_structure(inst: CheckInstance) -> CheckResult:
    d, q = int(inst.p["d"]), int(inst.p["q"])
    P = generate(d, q)
    defect = structural_defect(P)
    if defect:
        return CheckResult(inst, FAIL, str(defect), "{}", "pure c' monomials survive at xi = 0")
    for xi in range(-3, 7):
        direct = rank_sample(xi, d, q) if q >= d else ({} if q else {((), ()): 1})
        value = P.at_rank(xi)
        if not all(isinstance(v, int) for v in value.values()):
            return CheckResult(inst, FAIL, str(value), str(direct), f"non-integral value at xi = {xi}")
        if value != direct:
            return CheckResult(inst, FAIL, str(value), str(direct), f"rank {xi} sample mismatch")
    stable = generate(d, q, extra_samples=2)
    if stable != P:
        return CheckResult(inst, FAIL, P.to_text(), stable.to_text(), "unstable under extra samples")
    note = None if P.integral_in_monomial_basis() else "integer-valued in xi but not in Z[xi]"
    return CheckResult(inst, PASS, P.to_text(), P.to_text(), note)


_CHECKS = {
    "main": _check_main,
    "ky2": _check_ky2,
    "thom": _check_thom,
    "grr": _check_grr,
    "excess": _check_excess,
    "projection": _check_projection,
    "functoriality": _check_functoriality,
    "normalization": _check_normalization,
    "structure": _check_structure,
}


def execute(inst: CheckInstance) -> CheckResult:
    start = time.perf_counter()
    try:
        result = _CHECKS[inst.check_id](inst)
    except EngineError as exc:
        lhs = getattr(exc, "lhs", None)
        rhs = getattr(exc, "rhs", None)
        result = CheckResult(inst, FAIL, None if lhs is None else str(lhs),
                             None if rhs is None else str(rhs), f"{type(exc).__name__}: {exc}")
    result.millis = (time.perf_counter() - start) * 1000
    return result


def run_check(inst: CheckInstance, raise_on_failure: bool = False) -> Report:
    if inst.check_id not in _CHECKS:
        raise ValueError(f"unknown check {inst.check_id!r}")
    result = execute(inst)
    if raise_on_failure and result.status != PASS:
        raise CheckFailed(result.detail or result.status, lhs=result.lhs, rhs=result.rhs)
    return Report(inst.check_id, [result], seed=inst.seed)


# grids ----------------------------------------------------------------------

TWISTS = {
    1: [(0,), (1,), (-2,)],
    2: [(1, 2), (-1, 0)],
    3: [(0, 1, -2)],
}
CLASSES = ["[O]", "[O(2)]", "[O(1)] - [O(-1)]", "[O(1)] + [O(-2)]", "[O] - 2[O(1)]"]
TOWERS = [TowerSpec(2, ((1,), (-1,))), TowerSpec(2, ((1,), (2, -1)))]


@dataclass(frozen=True)
class Grid:
    bases: tuple = (0, 1, 2)
    max_codim: int = 3
    max_degree: int = 5
    classes: tuple = tuple(CLASSES)
    draws: int = RANDOM_DRAWS
    towers: tuple = tuple(TOWERS)
    structure_degree: int = 6

    def models(self) -> list:
        out = []
        for n in self.bases:
            for d in range(1, self.max_codim + 1):
                twists = TWISTS.get(d, [(0,) * d])
                if n == 0:
                    twists = [(0,) * d]
                for v in twists:
                    out.append(TowerSpec(n, (v,)))
        return out


def default_grid(suite: str, grid: Grid | None = None, seed: int = 0) -> list:
    grid = grid or Grid()
    out = []
    models = grid.models()
    if suite in ("main", "ky2"):
        for spec in models:
            dim = spec.n + len(spec.layers[0])
            for a in grid.classes:
                for q in range(1, min(grid.max_degree, dim) + 1):
                    out.append(CheckInstance.make(suite, spec, seed, a=a, q=q))
        if suite == "main" and grid.max_codim >= 1:
            for n in grid.bases:
                if n < 1:
                    continue
                for a in grid.classes:
                    for q in range(1, min(grid.max_degree, n) + 1):
                        out.append(CheckInstance.make(suite, TowerSpec(n), seed, a=a, q=q,
                                                      kind="divisor"))
    elif suite == "thom":
        out = [CheckInstance.make(suite, spec, seed) for spec in models]
    elif suite == "grr":
        out = [CheckInstance.make(suite, spec, seed, a=a) for spec in models for a in grid.classes]
    elif suite in ("excess", "projection"):
        out = [CheckInstance.make(suite, spec, seed, draw=i)
               for spec in models for i in range(grid.draws)]
    elif suite == "functoriality":
        for spec in grid.towers:
            dim = spec.n + sum(len(v) for v in spec.layers)
            for a in grid.classes:
                for q in range(1, min(grid.max_degree, dim) + 1):
                    out.append(CheckInstance.make(suite, spec, seed, a=a, q=q))
    elif suite == "normalization":
        out = [CheckInstance.make(suite, TowerSpec(n), seed, draw=i)
               for n in grid.bases if n >= 1 for i in range(grid.draws)]
    elif suite == "structure":
        out = [CheckInstance.make(suite, "", seed, d=d, q=q)
               for d in range(1, grid.max_codim + 1)
               for q in range(1, grid.structure_degree + 1)]
    else:
        raise ValueError(f"unknown suite {suite!r}")
    return out


def run_suite(name: str, grid: Grid | None = None, seed: int = 0, jobs: int | None = 1,
              instances: list | None = None) -> Report:
    """Run one suite (or ``all``); results are sorted by instance key."""
    if name != "all" and name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    if instances is None:
        names = SUITES if name == "all" else (name,)
        instances = [inst for s in names for inst in default_grid(s, grid, seed)]
    warnings = []
    if not instances:
        msg = f"suite {name!r} has an empty grid; nothing was checked"
        log.warning(msg)
        warnings.append(msg)
    instances = sorted(instances, key=CheckInstance.key)
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(instances) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(execute, instances, chunksize=max(1, len(instances) // (4 * jobs))))
    else:
        results = [execute(inst) for inst in instances]
    return Report(name, results, seed=seed, warnings=warnings)
