"""Turn a first-order ODE with one elementary tower into a 3D polynomial system.

Given dy/dx = M/N where M and N involve a single transcendental function of
(x, y), introduce u for that function.  With dx/dt = N, dy/dt = M and
du/dt = N u_x + M u_y, clearing denominators gives polynomials f, g, h in
(x, y, u).

Supported towers:

* exponentials, plus trigonometric/hyperbolic heads rewritten as
  exponentials: every exponent must be an integer multiple of one base m,
  giving u = exp(m) (u = e^{i a} for trigonometric arguments);
* logarithms whose arguments factor over the same irreducible polynomials
  and appear only through one linear combination, giving u = log(B);
* for trigonometric input, the generator w = F(a) itself when F' is rational
  in F (tan, cot, tanh, coth);
* purely rational input, with the trivial generator u = x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping

import sympy as sp
from sympy import QQ_I

from .algebra.expr import TRANSCENDENTAL_HEADS, TransGen, check_rational
from .algebra.poly import BASE_VARS, U, X, Y, MultiPoly, gcd_all
from .algebra.ratfunc import RatFunc
from .errors import MultipleTowersError, NotRationalError, UnsupportedInputError
from .parser import Ode1

TRIG_HEADS = (sp.sin, sp.cos, sp.tan, sp.sec, sp.csc, sp.cot)
HYP_HEADS = (sp.sinh, sp.cosh, sp.tanh, sp.sech, sp.csch, sp.coth)


class Tag(str, Enum):
    EXP_POLY = "ExpPoly"
    EXP_RATIONAL = "ExpRational"
    LOG_RATIONAL = "LogRational"
    TRIG = "Trig"
    HYPERBOLIC = "Hyperbolic"
    RATIONAL = "Rational"


class Method(str, Enum):
    AUTO = "Auto"
    TRIG_METHOD_1 = "TrigMethod1"
    TRIG_METHOD_2 = "TrigMethod2"


def exponential_form(head, t: sp.Expr) -> sp.Expr:
    """head(a) written through t = e^{a} (hyperbolic) or t = e^{i a} (trigonometric)."""
    I = sp.I
    table = {
        sp.exp: t,
        sp.sin: (t - 1 / t) / (2 * I),
        sp.cos: (t + 1 / t) / 2,
        sp.tan: -I * (t**2 - 1) / (t**2 + 1),
        sp.sec: 2 * t / (t**2 + 1),
        sp.csc: 2 * I * t / (t**2 - 1),
        sp.cot: I * (t**2 + 1) / (t**2 - 1),
        sp.sinh: (t - 1 / t) / 2,
        sp.cosh: (t + 1 / t) / 2,
        sp.tanh: (t**2 - 1) / (t**2 + 1),
        sp.sech: 2 * t / (t**2 + 1),
        sp.csch: 2 * t / (t**2 - 1),
        sp.coth: (t**2 + 1) / (t**2 - 1),
    }
    return sp.cancel(table[head])


# derivative of F as a rational function of w = F(a), for the Method 1 generators
_SELF_RATIONAL = {
    sp.tan: lambda w: 1 + w**2,
    sp.cot: lambda w: -(1 + w**2),
    sp.tanh: lambda w: 1 - w**2,
    sp.coth: lambda w: 1 - w**2,
}


@dataclass(frozen=True)
class FunctionClass:
    tag: Tag
    argument: sp.Expr
    pieces: tuple = ()  # ((name, MultiPoly), ...)
    generator: TransGen | None = None
    original: sp.Expr | None = None
    replacements: tuple = ()  # ((head expr, expr in u), ...)
    method: Method = Method.AUTO

    def piece(self, name: str) -> MultiPoly:
        for key, value in self.pieces:
            if key == name:
                return value
        raise KeyError(name)


@dataclass(frozen=True)
class SubstitutionRecord:
    generator: TransGen
    original: sp.Expr
    inverse_table: tuple = ()  # ((head expr, expr in u), ...)

    def back_substitute(self, e: sp.Expr) -> sp.Expr:
        return sp.sympify(e).xreplace({self.generator.symbol: self.original})

    @property
    def depends_on_x_only(self) -> bool:
        return not self.original.has(Y)


@dataclass(frozen=True)
class System3D:
    f: MultiPoly
    g: MultiPoly
    h: MultiPoly
    record: SubstitutionRecord
    clearing_factor: MultiPoly = field(default=None)
    tag: Tag = Tag.RATIONAL
    method: Method = Method.AUTO

    @property
    def tower(self) -> tuple:
        return (self.record.generator,)

    @property
    def degree(self) -> int:
        return max(self.f.degree(), self.g.degree(), self.h.degree())

    def components(self) -> tuple:
        return (self.f, self.g, self.h)

    @classmethod
    def from_polys(cls, f, g, h, generator: TransGen | None = None, original=None) -> "System3D":
        """Build a system directly from polynomials (u is then a free third coordinate)."""
        polys = [p if isinstance(p, MultiPoly) else MultiPoly.from_expr(p, BASE_VARS) for p in (f, g, h)]
        if generator is None:
            generator = TransGen.make(U, {})
        record = SubstitutionRecord(generator, original if original is not None else U)
        return cls(*polys, record=record, clearing_factor=MultiPoly.constant(1))


# -- analysis of the transcendental content --------------------------------------


def _collect_heads(e: sp.Expr) -> set:
    return {a for a in sp.preorder_traversal(e) if isinstance(a, TRANSCENDENTAL_HEADS)}


def _check_shape(ode: Ode1) -> list:
    heads = set()
    for part in (ode.M, ode.N):
        if part.has(sp.pi):
            raise UnsupportedInputError("the constant pi is not supported in the coefficient field")
        for node in sp.preorder_traversal(part):
            if isinstance(node, sp.Pow) and not node.exp.is_Integer:
                raise UnsupportedInputError(f"non-integer power {node} is outside the supported class")
            if isinstance(node, sp.Function) and not isinstance(node, TRANSCENDENTAL_HEADS):
                raise UnsupportedInputError(f"unsupported function head {node.func}")
        heads |= _collect_heads(part)
    for head in heads:
        arg = head.args[0]
        if _collect_heads(arg):
            raise UnsupportedInputError(f"nested elementary functions in {head}")
        if not arg.free_symbols:
            raise UnsupportedInputError(f"{head} is a transcendental constant, not in QQ(i)")
    return sorted(heads, key=sp.default_sort_key)


def _exponent(head) -> sp.Expr:
    a = head.args[0]
    return sp.I * a if isinstance(head, TRIG_HEADS) else a


def _rational_gcd(values) -> Fraction:
    nums = [abs(v.numerator) for v in values]
    dens = [v.denominator for v in values]
    g = 0
    for n in nums:
        g = math.gcd(g, n)
    lcm = 1
    for d in dens:
        lcm = lcm * d // math.gcd(lcm, d)
    return Fraction(g, lcm)


def _proportionality(k: sp.Expr, base: sp.Expr):
    """Return (rho, c) with k = rho*base + c, rho rational, or None."""
    for v in (X, Y):
        db = sp.diff(base, v)
        if db != 0:
            rho = sp.cancel(sp.diff(k, v) / db)
            break
    else:
        return None
    if rho.free_symbols or not rho.is_Rational:
        return None
    c = sp.cancel(sp.expand(k - rho * base))
    if c.free_symbols:
        return None
    return Fraction(int(rho.p), int(rho.q)), c


def _analyze_exponential(heads: list, ode: Ode1) -> FunctionClass:
    exps = [(h, sp.expand(_exponent(h))) for h in heads]
    best = None
    for _, base in exps:
        fits = []
        for head, k in exps:
            pc = _proportionality(k, base)
            if pc is None:
                break
            fits.append((head, pc))
        else:
            offsets = sum(1 for _, (_, c) in fits if c != 0)
            if best is None or offsets < best[0]:
                best = (offsets, base, fits)
    if best is None:
        raise MultipleTowersError("exponents are not rational multiples of one argument")
    _, base, fits = best
    mu = _rational_gcd([rho for _, (rho, _) in fits])
    m = sp.expand(sp.Rational(mu.numerator, mu.denominator) * base)
    replacements = []
    for head, (rho, c) in fits:
        n = rho / mu
        assert n.denominator == 1
        t = sp.exp(c) * U ** int(n)
        entry = exponential_form(head.func, t)
        replacements.append((head, entry))
    gen = TransGen.make(U, {X: sp.diff(m, X) * U, Y: sp.diff(m, Y) * U})
    if any(isinstance(h, TRIG_HEADS) for h in heads):
        tag = Tag.TRIG
    elif any(isinstance(h, HYP_HEADS) for h in heads):
        tag = Tag.HYPERBOLIC
    else:
        num, den = sp.fraction(sp.together(m))
        tag = Tag.EXP_POLY if not den.free_symbols else Tag.EXP_RATIONAL
    pieces = _pieces(tag, m, heads, gen)
    return FunctionClass(tag, m, pieces, gen, sp.exp(m), tuple(replacements), Method.TRIG_METHOD_2
                         if tag in (Tag.TRIG, Tag.HYPERBOLIC) else Method.AUTO)


def _pieces(tag: Tag, arg: sp.Expr, heads, gen) -> tuple:
    num, den = sp.fraction(sp.together(arg))
    mp = lambda e: MultiPoly.from_expr(e, BASE_VARS)  # noqa: E731
    if tag == Tag.EXP_POLY:
        return (("p", mp(num / den)),)
    if tag == Tag.EXP_RATIONAL:
        return (("p1", mp(num)), ("p2", mp(den)))
    if tag == Tag.LOG_RATIONAL:
        return (("p3", mp(num)), ("p4", mp(den)))
    if tag in (Tag.TRIG, Tag.HYPERBOLIC):
        head = heads[0].func
        entry = exponential_form(head, U)
        n5, d5 = sp.fraction(entry)
        n9, d9 = sp.fraction(sp.cancel(sp.diff(entry, U)))
        return (("p5", mp(n5)), ("p6", mp(d5)), ("p9", mp(n9)), ("p10", mp(d9)))
    return ()


def _analyze_logarithmic(heads: list, ode: Ode1) -> FunctionClass | None:
    factor_syms: dict = {}
    expansion = {}
    for head in heads:
        arg = sp.cancel(head.args[0])
        num, den = sp.fraction(arg)
        terms = []
        for part, sign in ((num, 1), (den, -1)):
            coeff, facs = sp.factor_list(sp.expand(part), X, Y, gaussian=True)
            for fac, mult in facs:
                p = MultiPoly.from_expr(fac, BASE_VARS)
                coeff = coeff * QQ_I.to_sympy(p.leading_coeff()) ** mult
                p = p.monic()
                key = ("poly", p)
                terms.append((key, sign * mult))
            if coeff != 1:
                terms.append((("const", sp.sympify(coeff)), sign))
        lin = 0
        for key, mult in terms:
            if key not in factor_syms:
                factor_syms[key] = sp.Dummy(f"l{len(factor_syms)}")
            lin += mult * factor_syms[key]
        expansion[head] = lin
    R = sp.together(ode.M / ode.N).xreplace(expansion)
    syms = list(factor_syms.values())
    grads = [sp.cancel(sp.diff(R, s)) for s in syms]
    nz = [k for k, g in enumerate(grads) if g != 0]
    if not nz:
        return None
    lead = nz[0]
    weights = []
    for g in grads:
        w = sp.cancel(g / grads[lead])
        if w.free_symbols & ({X, Y} | set(syms)) or not w.is_Rational:
            raise MultipleTowersError("logarithms do not combine into one function")
        weights.append(Fraction(int(w.p), int(w.q)))
    scale = _rational_gcd([w for w in weights if w != 0])
    weights = [w / scale for w in weights]
    keys = list(factor_syms.keys())
    base = sp.Integer(1)
    for key, w in zip(keys, weights):
        if w == 0:
            continue
        value = key[1].as_expr() if key[0] == "poly" else key[1]
        base = base * value ** int(w)
    gen_rule = {v: sp.cancel(sp.diff(base, v) / base) for v in (X, Y)}
    gen = TransGen.make(U, {v: r for v, r in gen_rule.items()})
    # rewrite each head in terms of u: log(a) = sum e_j l_j, with l_lead eliminated
    lead_sym = syms[lead]
    w_lead = weights[lead]
    elim = (U - sum(sp.Rational(w.numerator, w.denominator) * s
                    for s, w, k in zip(syms, weights, range(len(syms))) if k != lead)) \
        / sp.Rational(w_lead.numerator, w_lead.denominator)
    replacements = []
    for head, lin in expansion.items():
        replacements.append((head, sp.expand(lin.xreplace({lead_sym: elim}))))
    m_base = sp.cancel(base)
    pieces = _pieces(Tag.LOG_RATIONAL, m_base, heads, gen)
    return FunctionClass(Tag.LOG_RATIONAL, m_base, pieces, gen, sp.log(m_base), tuple(replacements))


def _analyze_method1(heads: list) -> FunctionClass:
    funcs = {h.func for h in heads}
    args = {h.args[0] for h in heads}
    if len(heads) != 1 or len(funcs) != 1:
        raise UnsupportedInputError("Method 1 handles exactly one trigonometric/hyperbolic function")
    head = heads[0]
    if head.func not in _SELF_RATIONAL:
        raise UnsupportedInputError(
            f"Method 1 needs a head whose derivative is rational in itself (tan, cot, tanh, coth); got {head.func}")
    (a,) = args
    dF = _SELF_RATIONAL[head.func](U)
    gen = TransGen.make(U, {X: sp.diff(a, X) * dF, Y: sp.diff(a, Y) * dF})
    tag = Tag.TRIG if head.func in TRIG_HEADS else Tag.HYPERBOLIC
    pieces = _pieces(tag, a, heads, gen)
    return FunctionClass(tag, a, pieces, gen, head, ((head, U),), Method.TRIG_METHOD_1)


def _analyze(ode: Ode1, method: Method = Method.AUTO) -> FunctionClass:
    heads = _check_shape(ode)
    logs = [h for h in heads if isinstance(h, sp.log)]
    others = [h for h in heads if not isinstance(h, sp.log)]
    if logs and others:
        raise MultipleTowersError("logarithms mixed with exponential-type functions")
    if logs:
        fc = _analyze_logarithmic(logs, ode)
        if fc is not None:
            return fc
        heads = []
    if others:
        trig_like = [h for h in others if isinstance(h, TRIG_HEADS + HYP_HEADS)]
        if method == Method.TRIG_METHOD_1:
            if not trig_like or len(trig_like) != len(others):
                raise UnsupportedInputError("Method 1 applies only to trigonometric/hyperbolic input")
            return _analyze_method1(others)
        return _analyze_exponential(others, ode)
    gen = TransGen.make(U, {X: sp.Integer(1), Y: sp.Integer(0)})
    return FunctionClass(Tag.RATIONAL, X, (), gen, X, ())


def classify(ode: Ode1, method: Method = Method.AUTO) -> FunctionClass:
    """Identify the single tower of the ODE (after log-law and exponent rewriting)."""
    return _analyze(ode, Method(method))


def _replace(e: sp.Expr, cls: FunctionClass) -> sp.Expr:
    return sp.sympify(e).xreplace(dict(cls.replacements))


def rewrite_to_single_u(ode: Ode1, method: Method = Method.AUTO) -> Ode1:
    """Rewrite every elementary head through the single generator, kept in elementary form."""
    cls = classify(ode, method)
    if cls.tag == Tag.RATIONAL or not cls.replacements:
        return ode
    back = {U: cls.original}
    M = _replace(ode.M, cls).xreplace(back)
    N = _replace(ode.N, cls).xreplace(back)
    return Ode1(M, N, ode.dependent, ode.independent)


def _as_ratfunc(e: sp.Expr) -> RatFunc:
    try:
        check_rational(e, BASE_VARS)
    except NotRationalError as exc:
        raise UnsupportedInputError(
            f"after rewriting, {e} is not rational in (x, y, u) over QQ(i): {exc}") from exc
    return RatFunc.from_expr(e, BASE_VARS)


def clear_denominators(M: sp.Expr, N: sp.Expr, cls: FunctionClass):
    """Return (M*, N*, clearing factor) with M*/N* = M/N and a polynomial du/dt.

    The factor is found lazily: first M/N is reduced, then only the
    denominator surviving in N* u_x + M* u_y is multiplied through.
    """
    M_star, N_star, _h, factor = _clear(M, N, cls.generator)
    return M_star, N_star, factor


def _clear(M, N, gen: TransGen):
    R = _as_ratfunc(M) / _as_ratfunc(N)
    g0, f0 = R.num, R.den
    ux = _as_ratfunc(gen.rule(X))
    uy = _as_ratfunc(gen.rule(Y))
    h = RatFunc(f0) * ux + RatFunc(g0) * uy
    factor = h.den
    return g0 * factor, f0 * factor, h.num, factor


def _normalize(f: MultiPoly, g: MultiPoly, h: MultiPoly):
    """Divide out the common polynomial factor and content; make f's leading coefficient positive."""
    common = gcd_all([f, g, h])
    if not common.is_constant():
        f, g, h = (p.exact_div(common) for p in (f, g, h))
    parts = []
    for p in (f, g, h):
        for c in p.terms.values():
            parts.extend([Fraction(int(c.x.numerator), int(c.x.denominator)),
                          Fraction(int(c.y.numerator), int(c.y.denominator))])
    parts = [q for q in parts if q != 0]
    content = _rational_gcd(parts)
    scale = sp.Rational(content.denominator, content.numerator)
    lc = f.leading_coeff()
    re, im = sp.Rational(str(lc.x)), sp.Rational(str(lc.y))
    for unit in (1, -1, sp.I, -sp.I):
        nre = sp.re(unit * (re + sp.I * im))
        nim = sp.im(unit * (re + sp.I * im))
        if nre > 0 and nim >= 0:
            break
    scale = scale * unit
    return tuple(p * scale for p in (f, g, h))


def build_system(ode: Ode1, method: Method = Method.AUTO) -> System3D:
    method = Method(method)
    cls = classify(ode, method)
    M = _replace(ode.M, cls)
    N = _replace(ode.N, cls)
    g, f, h, factor = _clear(M, N, cls.generator)
    f, g, h = _normalize(f, g, h)
    table = tuple((head, expr) for head, expr in cls.replacements)
    record = SubstitutionRecord(cls.generator, cls.original, table)
    return System3D(f, g, h, record, factor, cls.tag, cls.method)


def ratio_matches(system: System3D, ode: Ode1) -> bool:
    """g/f equals M/N once the heads of the ODE are written through u (exact)."""
    cls = classify(ode, system.method if system.method != Method.AUTO else Method.AUTO)
    M = _as_ratfunc(_replace(ode.M, cls))
    N = _as_ratfunc(_replace(ode.N, cls))
    return (RatFunc(system.g) * N - RatFunc(system.f) * M).is_zero()


def system_summary(system: System3D, alias: str = "u") -> Mapping[str, str]:
    sub = {U: sp.Symbol(alias)} if alias != "u" else {}
    return {
        "f": str(sp.factor(system.f.as_expr().xreplace(sub))),
        "g": str(sp.factor(system.g.as_expr().xreplace(sub))),
        "h": str(sp.factor(system.h.as_expr().xreplace(sub))),
        "u_definition": str(system.record.original),
    }
