"""Expressions over a differential tower.

Expressions are plain sympy trees.  A tower is a sequence of
:class:`TransGen`; each generator is a symbol carrying its own partial
derivatives with respect to the base variables.  Unevaluated ``Integral``
nodes are differentiated formally: the derivative of ``Integral(phi, v)``
with respect to ``v`` is ``phi``; with respect to any other variable the
integrand is differentiated under the integral sign.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import sympy as sp

from ..errors import NotRationalError, TowerError
from .poly import X, Y
from .ratfunc import RatFunc

TRANSCENDENTAL_HEADS = (
    sp.exp, sp.log, sp.sin, sp.cos, sp.tan, sp.sec, sp.csc, sp.cot,
    sp.sinh, sp.cosh, sp.tanh, sp.sech, sp.csch, sp.coth,
)


@dataclass(frozen=True)
class TransGen:
    """Transcendental generator, e.g. u = ln(x-5) with du/dx = 1/(x-5)."""

    symbol: sp.Symbol
    rules: tuple = field(default=())  # ((base variable, derivative expr), ...)

    @classmethod
    def make(cls, symbol: sp.Symbol, rules: Mapping[sp.Symbol, sp.Expr]) -> "TransGen":
        return cls(symbol, tuple((v, sp.sympify(r)) for v, r in rules.items()))

    @property
    def name(self) -> str:
        return str(self.symbol)

    def rule(self, v: sp.Symbol) -> sp.Expr:
        for var, r in self.rules:
            if var == v:
                return r
        raise TowerError(f"generator {self.symbol} has no derivative rule for {v}")

    def has_rule(self, v: sp.Symbol) -> bool:
        return any(var == v for var, _ in self.rules)


def integral_nodes(e: sp.Expr) -> list:
    return sorted(e.atoms(sp.Integral), key=sp.default_sort_key)


def _mask_integrals(e: sp.Expr):
    nodes = integral_nodes(e)
    masks = {}
    for k, node in enumerate(nodes):
        masks[node] = sp.Dummy(f"J{k}")
    return e.xreplace(masks), masks


def partial(e: sp.Expr, v: sp.Symbol) -> sp.Expr:
    """Partial derivative with formal treatment of integral nodes."""
    if not e.has(sp.Integral):
        return sp.diff(e, v)
    masked, masks = _mask_integrals(e)
    out = sp.diff(masked, v)
    for node, sym in masks.items():
        if node.limits[0][0] == v and len(node.limits[0]) == 1:
            out += sp.diff(masked, sym) * node.function
        elif node.function.has(v):
            # differentiation under the integral sign stays unevaluated
            out += sp.diff(masked, sym) * sp.Integral(partial(node.function, v), *node.limits)
    back = {sym: node for node, sym in masks.items()}
    return out.xreplace(back)


def expr_derivative(e: sp.Expr, v: sp.Symbol, tower: Sequence[TransGen]) -> sp.Expr:
    """Total derivative d e / d v, applying the chain rule through the tower."""
    e = sp.sympify(e)
    result = partial(e, v)
    for gen in tower:
        if not e.has(gen.symbol):
            continue
        d_gen = partial(e, gen.symbol)
        if d_gen == 0:
            continue
        result += d_gen * gen.rule(v)
    return result


def rational_variables(tower: Sequence[TransGen], base=(X, Y)) -> tuple:
    return tuple(base) + tuple(g.symbol for g in tower)


def check_rational(e: sp.Expr, variables: Sequence[sp.Symbol]) -> None:
    for node in sp.preorder_traversal(e):
        if isinstance(node, sp.Function) or isinstance(node, sp.Integral):
            raise NotRationalError(f"non-rational head {node.func} in {e}")
        if isinstance(node, sp.Pow) and not node.exp.is_Integer:
            raise NotRationalError(f"non-integer power {node}")
        if isinstance(node, sp.Symbol) and node not in variables:
            raise NotRationalError(f"symbol {node} is outside the tower")
        if node in (sp.E, sp.pi):
            raise NotRationalError(f"transcendental constant {node}")


def canonicalize_to_ratfunc(e: sp.Expr, tower: Sequence[TransGen] = (), variables=None) -> RatFunc:
    """Reduce a field-operation expression to a single canonical fraction."""
    e = sp.sympify(e)
    if variables is None:
        variables = rational_variables(tower)
    variables = tuple(variables)
    check_rational(e, variables)
    return RatFunc.from_expr(e, variables)


def is_zero(e: sp.Expr, tower: Sequence[TransGen] = (), variables=None) -> bool:
    return canonicalize_to_ratfunc(e, tower, variables).is_zero()
