"""Command-line front end: ``rrwd gen|verify|eval|cache``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .chowmodel import build_model
from .errors import EngineError
from .exactpoly import serialize
from .exprparse import ChowValue, EvaluationError, KValue, evaluate_expression, parse_class_expr
from .jouanolou import PolynomialCache, generate
from .verifier import SUITES, Grid, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rrwd", description="Integral Riemann-Roch polynomials and checks.")
    parser.add_argument("--version", action="version", version=f"rrwd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate P_q^d")
    gen.add_argument("--codim", type=_nonneg, required=True, help="codimension d")
    gen.add_argument("--degree", type=_nonneg, required=True, help="Chern degree q")
    gen.add_argument("--format", choices=("text", "json", "latex"), default="text")
    gen.add_argument("--cache-dir", type=Path, default=None,
                     help="cache directory (default $JOUANOLOU_CACHE_DIR or ~/.cache/rrwd)")
    gen.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("--suite", choices=SUITES + ("all",), required=True)
    ver.add_argument("--max-codim", type=_nonneg, default=3)
    ver.add_argument("--max-degree", type=_nonneg, default=5)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    ver.add_argument("--report", type=Path, default=None, help="write the JSON report here")
    ver.add_argument("--format", choices=("text", "json"), default="text")
    ver.add_argument("--timings", action="store_true", help="include per-check milliseconds")

    ev = sub.add_parser("eval", help="evaluate a class expression in a model")
    ev.add_argument("--model", required=True, help="e.g. P2 or 'proj(P2; O(1)+O(2))'")
    ev.add_argument("--expr", required=True)
    ev.add_argument("--format", choices=("text", "json"), default="text")

    cache = sub.add_parser("cache", help="inspect or clear the polynomial cache")
    cache.add_argument("action", choices=("list", "clear"))
    cache.add_argument("--cache-dir", type=Path, default=None)
    return parser


def _cmd_gen(args, out) -> int:
    cache = None if args.no_cache else PolynomialCache(args.cache_dir)
    P = generate(args.codim, args.degree, cache=cache)
    if args.format == "json":
        out.write(P.dumps())
    elif args.format == "latex":
        out.write(P.to_latex() + "\n")
    else:
        out.write(P.to_text() + "\n")
    return EXIT_OK


def _cmd_verify(args, out) -> int:
    if args.jobs is not None and args.jobs < 1:
        print("rrwd verify: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    grid = Grid(max_codim=args.max_codim, max_degree=args.max_degree)
    report = run_suite(args.suite, grid=grid, seed=args.seed, jobs=args.jobs)
    if args.report is not None:
        args.report.write_text(report.dumps(args.timings), encoding="utf-8")
    out.write(report.dumps(args.timings) if args.format == "json" else report.to_text(args.timings))
    for w in report.warnings:
        print(f"rrwd verify: warning: {w}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def _render(value) -> tuple:
    if isinstance(value, ChowValue):
        return "chow", value.level, serialize(value.p)
    if isinstance(value, KValue):
        return "k", value.level, str(value.k)
    return "integer", 0, str(value)


def _cmd_eval(args, out) -> int:
    model = build_model(args.model)
    ast = parse_class_expr(args.expr)
    kind, level, text = _render(evaluate_expression(ast, model))
    if args.format == "json":
        doc = {"model": str(model.spec), "expr": str(ast), "kind": kind, "level": level,
               "value": text}
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        out.write(text + "\n")
    return EXIT_OK


def _cmd_cache(args, out) -> int:
    cache = PolynomialCache(args.cache_dir)
    if args.action == "list":
        for d, q, path in cache.entries():
            out.write(f"d={d} q={q} {path}\n")
    else:
        n = cache.clear()
        print(f"removed {n} cache file(s) from {cache.directory}", file=sys.stderr)
    return EXIT_OK


_COMMANDS = {"gen": _cmd_gen, "verify": _cmd_verify, "eval": _cmd_eval, "cache": _cmd_cache}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("RRWD_LOG", "WARNING"), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, sys.stdout)
    except (EngineError, EvaluationError, ValueError, OSError) as exc:
        print(f"rrwd {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
