from __future__ import annotations

import sympy as sp

from ..errors import DivisionError
from .poly import MultiPoly


class RatFunc:
    """Reduced fraction num/den; den has leading coefficient 1 (graded-lex)."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: MultiPoly | None = None):
        if den is None:
            den = MultiPoly.constant(1, num.variables)
        if den.is_zero():
            raise DivisionError("zero denominator")
        if num.is_zero():
            self.num = num
            self.den = MultiPoly.constant(1, num.variables)
            return
        g = num.gcd(den)
        if not g.is_constant():
            num = num.exact_div(g)
            den = den.exact_div(g)
        lc = den.leading_coeff()
        self.num = MultiPoly(num.element.quo_ground(lc))
        self.den = MultiPoly(den.element.quo_ground(lc))

    @property
    def variables(self):
        return self.num.variables

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_expr(self) -> sp.Expr:
        return self.num.as_expr() / self.den.as_expr()

    def __add__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.den - other.num * self.den, self.den * other.den)

    def __mul__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        return RatFunc(self.num * other.den, self.den * other.num)

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __eq__(self, other):
        return isinstance(other, RatFunc) and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def diff(self, v) -> "RatFunc":
        return RatFunc(self.num.diff(v) * self.den - self.num * self.den.diff(v), self.den * self.den)

    def __repr__(self):
        return f"RatFunc({self.as_expr()})"

    @classmethod
    def from_expr(cls, expr, variables) -> "RatFunc":
        num, den = sp.fraction(sp.together(sp.sympify(expr)))
        return cls(MultiPoly.from_expr(num, variables), MultiPoly.from_expr(den, variables))
