"""Lexer, LL(1) parser and evaluator for model specs and class expressions.

Model specs::

    model  := 'P' INT | 'proj' '(' model ';' bundle ')'
    bundle := 'O' '(' INT ')' ('+' 'O' '(' INT ')')*

Class expressions::

    expr    := ['-'] term (('+' | '-') term)*
    term    := power ('*' power)*
    power   := primary ['^' INT]
    primary := INT [klit] | klit | GEN | '(' expr ')' | call
    klit    := '[' 'O' ['(' sint (',' sint)* ')'] ('+' 'O' ...)* ']'
    call    := 'c' '(' INT ',' expr ')' | 'ch' '(' expr ')' | 'tdinv' '(' expr ')'
             | 'push_s' '(' expr ')' | 'push_p' '(' expr ')' | 'pull_s' '(' expr ')'
             | 'thom' '(' ')'
             | 'P' '(' INT ',' INT ')' '(' expr ';' [exprs] ';' [exprs] ')'
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ArityMismatch, ExprSyntaxError, UnknownModel

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[()\[\],;+\-*^]))")


@dataclass(frozen=True)
class Token:
    kind: str  # 'int', 'ident', 'op', 'eof'
    text: str
    line: int
    column: int


def tokenize(src: str) -> list:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while True:
        while pos < len(src) and src[pos].isspace():
            if src[pos] == "\n":
                line, line_start = line + 1, pos + 1
            pos += 1
        if pos >= len(src):
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(Token(kind, m.group(kind), line, start - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, len(src) - line_start + 1))
    return tokens


# AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class KLit:
    monomials: tuple  # tuple of twist tuples

    def __str__(self):
        items = ["O" if not m else "O(" + ",".join(str(t) for t in m) + ")" for m in self.monomials]
        return "[" + "+".join(items) + "]"


@dataclass(frozen=True)
class Gen:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Add:
    items: tuple  # ((sign, expr), ...)

    def __str__(self):
        out = []
        for i, (sign, e) in enumerate(self.items):
            text = _wrap(e, _ADD + 1)
            if i == 0:
                out.append(("-" if sign < 0 else "") + text)
            else:
                out.append((" - " if sign < 0 else " + ") + text)
        return "".join(out)


@dataclass(frozen=True)
class Mul:
    left: object
    right: object

    def __str__(self):
        return f"{_wrap(self.left, _MUL)}*{_wrap(self.right, _MUL + 1)}"


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int

    def __str__(self):
        return f"{_wrap(self.base, _POW + 1)}^{self.exponent}"


@dataclass(frozen=True)
class ChernOf:
    degree: int
    arg: object

    def __str__(self):
        return f"c({self.degree}, {self.arg})"


@dataclass(frozen=True)
class ChernChar:
    arg: object

    def __str__(self):
        return f"ch({self.arg})"


@dataclass(frozen=True)
class ToddInv:
    arg: object

    def __str__(self):
        return f"tdinv({self.arg})"


@dataclass(frozen=True)
class ZeroSectionPush:
    arg: object

    def __str__(self):
        return f"push_s({self.arg})"


@dataclass(frozen=True)
class ProjPush:
    arg: object

    def __str__(self):
        return f"push_p({self.arg})"


@dataclass(frozen=True)
class ZeroSectionPull:
    arg: object

    def __str__(self):
        return f"pull_s({self.arg})"


@dataclass(frozen=True)
class Thom:
    def __str__(self):
        return "thom()"


@dataclass(frozen=True)
class PEval:
    d: int
    q: int
    rank: object
    c: tuple
    cp: tuple

    def __str__(self):
        c = ", ".join(str(e) for e in self.c)
        cp = ", ".join(str(e) for e in self.cp)
        return f"P({self.d},{self.q})({self.rank}; {c}; {cp})"


_ADD, _MUL, _POW = 1, 2, 3


def _precedence(e) -> int:
    if isinstance(e, Add):
        return _ADD if len(e.items) > 1 or e.items[0][0] < 0 else _precedence(e.items[0][1])
    if isinstance(e, Mul):
        return _MUL
    if isinstance(e, Pow):
        return _POW
    if isinstance(e, Num) and e.value < 0:
        return _ADD
    return 4


def _wrap(e, needed: int) -> str:
    return f"({e})" if _precedence(e) < needed else str(e)


# parser -------------------------------------------------------------------

_UNARY = {"ch": ChernChar, "tdinv": ToddInv, "push_s": ZeroSectionPush,
          "push_p": ProjPush, "pull_s": ZeroSectionPull}


class _Parser:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ExprSyntaxError(f"{message}, found {found}", tok.line, tok.column)

    def at(self, text) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def expect_int(self) -> int:
        if self.tok.kind != "int":
            self.error("expected an integer")
        return int(self.advance().text)

    def signed_int(self) -> int:
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        return sign * self.expect_int()

    def finish(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")

    # class expressions
    def expr(self):
        items = []
        sign = 1
        if self.at("-"):
            self.advance()
            sign = -1
        items.append((sign, self.term()))
        while self.at("+") or self.at("-"):
            sign = 1 if self.advance().text == "+" else -1
            items.append((sign, self.term()))
        if len(items) == 1 and items[0][0] == 1:
            return items[0][1]
        return Add(tuple(items))

    def term(self):
        left = self.power()
        while self.at("*"):
            self.advance()
            left = Mul(left, self.power())
        return left

    def power(self):
        base = self.primary()
        if self.at("^"):
            self.advance()
            return Pow(base, self.expect_int())
        return base

    def primary(self):
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            n = Num(int(tok.text))
            if self.at("["):
                return Mul(n, self.klit())
            return n
        if self.at("["):
            return self.klit()
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            return self.call_or_gen()
        self.error("expected a class expression")

    def klit(self):
        self.expect("[")
        monos = [self.line_bundle()]
        while self.at("+"):
            self.advance()
            monos.append(self.line_bundle())
        self.expect("]")
        return KLit(tuple(monos))

    def line_bundle(self) -> tuple:
        self.expect("O")
        if not self.at("("):
            return ()
        self.advance()
        twists = [self.signed_int()]
        while self.at(","):
            self.advance()
            twists.append(self.signed_int())
        self.expect(")")
        while twists and twists[-1] == 0:
            twists.pop()
        return tuple(twists)

    def args(self, name, count):
        open_tok = self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.at(","):
                self.advance()
                out.append(self.expr())
        self.expect(")")
        if len(out) != count:
            raise ArityMismatch(
                f"{name} takes {count} argument(s), got {len(out)} "
                f"(line {open_tok.line}, column {open_tok.column})")
        return out

    def call_or_gen(self):
        tok = self.advance()
        name = tok.text
        if name in _UNARY:
            return _UNARY[name](self.args(name, 1)[0])
        if name == "thom":
            self.args(name, 0)
            return Thom()
        if name == "c":
            self.expect("(")
            q = self.expect_int()
            if not self.at(","):
                if self.at(")"):
                    raise ArityMismatch(f"c takes 2 arguments (line {tok.line}, column {tok.column})")
                self.error("expected ','")
            self.advance()
            arg = self.expr()
            if self.at(","):
                raise ArityMismatch(f"c takes 2 arguments (line {tok.line}, column {tok.column})")
            self.expect(")")
            return ChernOf(q, arg)
        if name == "P":
            self.expect("(")
            d = self.expect_int()
            self.expect(",")
            q = self.expect_int()
            self.expect(")")
            self.expect("(")
            rank = self.expr()
            self.expect(";")
            c = self.expr_list(";")
            self.expect(";")
            cp = self.expr_list(")")
            self.expect(")")
            return PEval(d, q, rank, tuple(c), tuple(cp))
        if name == "h" or re.fullmatch(r"x[1-9][0-9]*", name):
            if self.at("("):
                self.error(f"{name} is a generator, not a function")
            return Gen(name)
        self.error(f"unknown name {name!r}", tok)

    def expr_list(self, stop):
        out = []
        if self.at(stop):
            return out
        out.append(self.expr())
        while self.at(","):
            self.advance()
            out.append(self.expr())
        return out

    # model specs
    def model(self):
        from .chowmodel import TowerSpec

        tok = self.tok
        if tok.kind == "ident" and re.fullmatch(r"P[0-9]+", tok.text):
            self.advance()
            return TowerSpec(int(tok.text[1:]))
        if tok.kind == "ident" and tok.text == "proj":
            self.advance()
            self.expect("(")
            inner = self.model()
            self.expect(";")
            twists = [self.bundle_item()]
            while self.at("+"):
                self.advance()
                twists.append(self.bundle_item())
            self.expect(")")
            return TowerSpec(inner.n, inner.layers + (tuple(twists),))
        raise UnknownModel(f"expected 'P<n>' or 'proj(...)' at line {tok.line}, column {tok.column}")

    def bundle_item(self) -> int:
        self.expect("O")
        self.expect("(")
        k = self.signed_int()
        self.expect(")")
        return k


def parse_class_expr(src: str):
    """Parse a class expression; a bare model spec parses to its :class:`TowerSpec`."""
    p = _Parser(src)
    tok = p.tok
    if tok.kind == "ident" and (tok.text == "proj" or re.fullmatch(r"P[0-9]+", tok.text)):
        m = p.model()
        p.finish()
        return m
    e = p.expr()
    p.finish()
    return e


def parse_kclass(src: str):
    """Parse a K-class literal combination such as ``[O] - 2[O(1)] + [O(2,-1)]``."""
    from .kmodel import KClass

    def ev(e):
        if isinstance(e, Num):
            return KClass.one() * e.value
        if isinstance(e, KLit):
            out = KClass()
            for m in e.monomials:
                out = out + KClass.line(*m)
            return out
        if isinstance(e, Add):
            out = KClass()
            for sign, item in e.items:
                out = out + ev(item) * sign
            return out
        if isinstance(e, Mul):
            return ev(e.left) * ev(e.right)
        raise ExprSyntaxError(f"{e} is not a K-class literal", 1, 1)

    return ev(parse_class_expr(src))


def parse_model_spec(src: str):
    p = _Parser(src)
    try:
        m = p.model()
        p.finish()
    except ExprSyntaxError as exc:
        raise UnknownModel(str(exc)) from exc
    return m


# evaluation ---------------------------------------------------------------

@dataclass(frozen=True)
class KValue:
    k: object  # KClass
    level: int


@dataclass(frozen=True)
class ChowValue:
    p: object  # GradedPolynomial
    level: int


class EvaluationError(Exception):
    pass


def evaluate_expression(ast, model):
    """Evaluate an AST in a :class:`SpaceModel`; returns int, KValue or ChowValue."""
    from . import chernroots, chowmodel, kmodel
    from .jouanolou import evaluate as p_evaluate
    from .jouanolou import generate

    def chow(v):
        if isinstance(v, int):
            return ChowValue(model.one() * v, 0)
        if isinstance(v, KValue):
            raise EvaluationError("expected a Chow class, got a K-class (apply c(...) or ch(...))")
        return v

    def kval(v):
        if isinstance(v, int):
            return KValue(kmodel.KClass.one() * v, 0)
        if isinstance(v, ChowValue):
            raise EvaluationError("expected a K-class, got a Chow class")
        return v

    def check_level(level):
        if level > model.num_layers:
            raise EvaluationError(f"level {level} does not exist in {model.spec}")
        return level

    def ev(e):
        if isinstance(e, Num):
            return e.value
        if isinstance(e, KLit):
            k = kmodel.KClass()
            for m in e.monomials:
                k = k + kmodel.KClass.line(*m)
            return KValue(k, check_level(k.level))
        if isinstance(e, Gen):
            if e.name == "h":
                return ChowValue(model.h(), 0)
            level = int(e.name[1:])
            check_level(level)
            return ChowValue(model.x(level), level)
        if isinstance(e, Add):
            acc = None
            for sign, item in e.items:
                v = ev(item)
                v = v * sign if isinstance(v, int) else _scale(v, sign, model)
                acc = v if acc is None else _add(acc, v, model, chow, kval)
            return acc
        if isinstance(e, Mul):
            a, b = ev(e.left), ev(e.right)
            if isinstance(a, int) and isinstance(b, int):
                return a * b
            if isinstance(a, int):
                return _scale(b, a, model)
            if isinstance(b, int):
                return _scale(a, b, model)
            if isinstance(a, KValue) and isinstance(b, KValue):
                return KValue(a.k * b.k, max(a.level, b.level))
            a, b = chow(a), chow(b)
            return ChowValue(model.mul(a.p, b.p), max(a.level, b.level))
        if isinstance(e, Pow):
            v = ev(e.base)
            if isinstance(v, int):
                return v ** e.exponent
            if isinstance(v, KValue):
                out = kmodel.KClass.one()
                for _ in range(e.exponent):
                    out = out * v.k
                return KValue(out, v.level)
            return ChowValue(model.normal_form(v.p ** e.exponent), v.level)
        if isinstance(e, ChernOf):
            v = kval(ev(e.arg))
            return ChowValue(kmodel.chern_of_kclass(v.k, e.degree, model), v.level)
        if isinstance(e, ChernChar):
            v = kval(ev(e.arg))
            return ChowValue(kmodel.chern_character_of_kclass(v.k, model), v.level)
        if isinstance(e, ToddInv):
            v = kval(ev(e.arg))
            if any(n < 0 for n in v.k.terms.values()):
                raise EvaluationError("tdinv needs an honest bundle (non-negative multiplicities)")
            bundle = kmodel.to_virtual_bundle(v.k, model)
            return ChowValue(model.normal_form(chernroots.todd_inverse(bundle, model.dim).total()),
                             v.level)
        if isinstance(e, ZeroSectionPush):
            v = ev(e.arg)
            if isinstance(v, int):
                v = KValue(kmodel.KClass.one() * v, 0)
            layer = check_level(v.level + 1)
            if isinstance(v, KValue):
                return KValue(kmodel.koszul_pushforward(v.k, model, layer), layer)
            return ChowValue(chowmodel.zero_section_pushforward(model, v.p, layer, refined=False), layer)
        if isinstance(e, (ProjPush, ZeroSectionPull)):
            v = chow(ev(e.arg))
            if v.level < 1:
                raise EvaluationError(f"{type(e).__name__} needs a class on level >= 1")
            if isinstance(e, ProjPush):
                return ChowValue(chowmodel.proj_pushforward(model, v.p, v.level), v.level - 1)
            return ChowValue(chowmodel.zero_section_pullback(model, v.p, v.level), v.level - 1)
        if isinstance(e, Thom):
            if model.num_layers < 1:
                raise EvaluationError("thom() needs a model with at least one layer")
            return ChowValue(chowmodel.thom_class(model, model.num_layers), model.num_layers)
        if isinstance(e, PEval):
            rank = ev(e.rank)
            if not isinstance(rank, int):
                raise EvaluationError("the rank argument of P must be an integer")
            cs = [chow(ev(x)) for x in e.c]
            cps = [chow(ev(x)) for x in e.cp]
            P = generate(e.d, e.q)
            value = p_evaluate(P, rank, [v.p for v in cs], [v.p for v in cps],
                               table=model.table, D=model.dim, reduce=model.normal_form)
            level = max([v.level for v in cs + cps], default=0)
            return ChowValue(value, level)
        raise EvaluationError(f"cannot evaluate {e!r}")

    return ev(ast)


def _scale(v, n, model):
    if isinstance(v, KValue):
        return KValue(v.k * n, v.level)
    return ChowValue(v.p * n, v.level)


def _add(a, b, model, chow, kval):
    if isinstance(a, int) and isinstance(b, int):
        return a + b
    if isinstance(a, KValue) or isinstance(b, KValue):
        a, b = kval(a), kval(b)
        return KValue(a.k + b.k, max(a.level, b.level))
    a, b = chow(a), chow(b)
    return ChowValue(model.normal_form(a.p + b.p), max(a.level, b.level))
