"""Text front end: ``diff(y(x),x) = expr`` into an :class:`Ode1`.

Recursive-descent parser with the usual precedence (``+ -`` < ``* /`` <
unary minus < ``^``, right associative).  Implicit multiplication is
rejected.  A top-level division on the right-hand side is kept apart, so
``(a)/(b)`` yields ``M = a`` and ``N = b``; anything else gives ``N = 1``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import sympy as sp

from .algebra.poly import X, Y
from .errors import ODESyntaxError, UnsupportedFunctionError

FUNCTIONS = {
    "exp": sp.exp, "ln": sp.log, "log": sp.log,
    "sin": sp.sin, "cos": sp.cos, "tan": sp.tan, "sec": sp.sec, "csc": sp.csc, "cot": sp.cot,
    "sinh": sp.sinh, "cosh": sp.cosh, "tanh": sp.tanh, "sech": sp.sech, "csch": sp.csch, "coth": sp.coth,
}
CONSTANTS = {"I": sp.I, "i": sp.I, "pi": sp.pi}

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),=]))")


@dataclass(frozen=True)
class Ode1:
    """dy/dx = M/N with M, N sympy expressions in the internal symbols x, y."""

    M: sp.Expr
    N: sp.Expr
    dependent: str = "y"
    independent: str = "x"

    def rhs(self) -> sp.Expr:
        return self.M / self.N


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list:
    toks, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise ODESyntaxError(f"unexpected character {text[pos + stripped]!r}", *_linecol(text, pos + stripped))
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


def _linecol(text: str, pos: int) -> tuple:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.dep = "y"
        self.indep = "x"

    # helpers ------------------------------------------------------------
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ODESyntaxError(msg, *_linecol(self.text, tok.pos))

    def expect(self, text: str, kind: str = "op") -> _Tok:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text or "end of input"
            raise self.error(f"expected {want!r}, found {got!r}")
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    # grammar -------------------------------------------------------------
    def ode(self) -> Ode1:
        head = self.expect(None, "name")
        if head.text != "diff":
            raise self.error("an ODE must start with diff(y(x),x)", head)
        self.expect("(")
        self.dep = self.expect(None, "name").text
        self.expect("(")
        self.indep = self.expect(None, "name").text
        self.expect(")")
        self.expect(",")
        var = self.expect(None, "name")
        if var.text != self.indep:
            raise self.error(f"derivative variable {var.text!r} differs from {self.indep!r}", var)
        self.expect(")")
        if self.dep == self.indep or self.dep in FUNCTIONS or self.indep in FUNCTIONS:
            raise self.error("invalid variable names")
        self.expect("=")
        M, N = self.rhs()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        if sp.simplify(N) == 0:
            raise self.error("denominator is identically zero", self.toks[-1])
        return Ode1(M, N, self.dep, self.indep)

    def rhs(self):
        # additive level is parsed by hand so a lone top-level quotient survives
        terms = [self.term_split()]
        while self.at("+") or self.at("-"):
            sign = 1 if self.tok.text == "+" else -1
            self.i += 1
            num, den = self.term_split()
            terms.append((sign * num, den))
        if len(terms) == 1:
            return terms[0]
        return sp.Add(*[n / d for n, d in terms]), sp.Integer(1)

    def term_split(self):
        factors = [self.unary()]
        ops = []
        while self.at("*") or self.at("/"):
            ops.append(self.tok.text)
            self.i += 1
            factors.append(self.unary())
        if ops and ops[-1] == "/" and all(o == "*" for o in ops[:-1]):
            return sp.Mul(*factors[:-1]), factors[-1]
        value = factors[0]
        for op, fac in zip(ops, factors[1:]):
            value = value * fac if op == "*" else value / fac
        return value, sp.Integer(1)

    def expr(self) -> sp.Expr:
        value = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> sp.Expr:
        value = self.unary()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.i += 1
            rhs = self.unary()
            value = value * rhs if op == "*" else value / rhs
        return value

    def unary(self) -> sp.Expr:
        if self.at("-"):
            self.i += 1
            return -self.unary()
        if self.at("+"):
            self.i += 1
            return self.unary()
        return self.power()

    def power(self) -> sp.Expr:
        base = self.atom()
        if self.at("^"):
            self.i += 1
            return base ** self.unary()
        return base

    def atom(self) -> sp.Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            value = sp.Rational(tok.text)
            self.no_juxtaposition()
            return value
        if tok.kind == "name":
            self.i += 1
            value = self.named(tok)
            self.no_juxtaposition()
            return value
        if self.at("("):
            self.i += 1
            value = self.expr()
            self.expect(")")
            self.no_juxtaposition()
            return value
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def no_juxtaposition(self):
        if self.tok.kind in ("num", "name") or self.at("("):
            raise self.error("implicit multiplication is not supported; use '*'")

    def named(self, tok: _Tok) -> sp.Expr:
        name = tok.text
        if name == self.dep:
            if self.at("("):
                self.i += 1
                arg = self.expect(None, "name")
                if arg.text != self.indep:
                    raise self.error(f"expected {self.dep}({self.indep})", arg)
                self.expect(")")
            return Y
        if name == self.indep:
            return X
        if name in CONSTANTS:
            return CONSTANTS[name]
        if self.at("("):
            if name not in FUNCTIONS:
                raise UnsupportedFunctionError(
                    f"unsupported function {name!r} (line {_linecol(self.text, tok.pos)[0]}, "
                    f"column {_linecol(self.text, tok.pos)[1]})")
            self.i += 1
            arg = self.expr()
            self.expect(")")
            return FUNCTIONS[name](arg)
        raise self.error(f"unknown identifier {name!r}", tok)


def parse_ode(text: str) -> Ode1:
    return _Parser(text).ode()


def parse_expression(text: str, dependent: str = "y", independent: str = "x") -> sp.Expr:
    """Parse a bare right-hand-side style expression (used by tests and the CLI)."""
    p = _Parser(text)
    p.dep, p.indep = dependent, independent
    value = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return value


# printing -------------------------------------------------------------------

_PRINT_NAMES = {sp.log: "ln"}


def print_expr(e: sp.Expr, dependent: str = "y", independent: str = "x") -> str:
    """Print an expression in the input grammar (fully parenthesised where needed)."""

    def rec(e) -> str:
        if e == sp.I:
            return "I"
        if e == sp.pi:
            return "pi"
        if e.is_Integer:
            return f"({e})" if e < 0 else str(e)
        if e.is_Rational:
            return f"({e.p}/{e.q})"
        if e == Y:
            return f"{dependent}({independent})"
        if e == X:
            return independent
        if e.is_Add:
            return "(" + " + ".join(rec(a) for a in e.args) + ")"
        if e.is_Mul:
            return "(" + "*".join(rec(a) for a in e.args) + ")"
        if e.is_Pow:
            return f"({rec(e.base)}^{rec(e.exp)})"
        if isinstance(e, sp.Function):
            name = _PRINT_NAMES.get(e.func, e.func.__name__)
            return f"{name}({rec(e.args[0])[1:-1] if rec(e.args[0]).startswith('(') and e.args[0].is_Add else rec(e.args[0])})"
        if e.is_Number and not e.is_real:
            return rec(sp.re(e)) + " + I*" + rec(sp.im(e))
        raise ValueError(f"cannot print {e!r}")

    return rec(sp.sympify(e))


def print_ode(ode: Ode1) -> str:
    m = print_expr(ode.M, ode.dependent, ode.independent)
    if ode.N == 1:
        return f"diff({ode.dependent}({ode.independent}),{ode.independent}) = {m}"
    n = print_expr(ode.N, ode.dependent, ode.independent)
    lhs = f"diff({ode.dependent}({ode.independent}),{ode.independent})"
    return f"{lhs} = ({m})/({n})" if not m.startswith("(") else f"{lhs} = {m}/({n})"
