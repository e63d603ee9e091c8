"""GCD and factorization of multivariate polynomials over QQ(i).

sympy's generic routines for Gaussian coefficients fall back to subresultant
sequences and, for factoring, to a shift search that can stall on inputs as
small as (x - y)^2 + 1.  Here:

* real-coefficient inputs are handed to the (fast) QQ routines;
* the GCD of complex inputs uses a heuristic evaluation/interpolation GCD
  over the Gaussian integers, checked by exact division, with sympy as the
  fallback;
* factorization uses Trager's norm method: shift one variable by s*i until
  the norm P * conj(P) is squarefree over QQ, factor the norm over QQ and
  take GCDs with the shifted polynomial.
"""
from __future__ import annotations

import math
from functools import lru_cache

from sympy import QQ, QQ_I
from sympy.polys.rings import PolyElement, PolyRing

_HEU_TRIES = 6


def _qq_ring(ring: PolyRing) -> PolyRing:
    return _qq_ring_cached(ring.symbols, ring.order)


@lru_cache(maxsize=None)
def _qq_ring_cached(symbols, order) -> PolyRing:
    return PolyRing(symbols, QQ, order)


def is_real(p: PolyElement) -> bool:
    return all(not c.y for c in p.values())


def to_qq(p: PolyElement) -> PolyElement:
    R = _qq_ring(p.ring)
    return R.from_dict({m: c.x for m, c in p.items()})


def from_qq(p: PolyElement, ring: PolyRing) -> PolyElement:
    return ring.from_dict({m: QQ_I.convert(c, QQ) for m, c in p.items()})


def conjugate(p: PolyElement) -> PolyElement:
    return p.ring.from_dict({m: QQ_I(c.x, -c.y) for m, c in p.items()})


def total_degree(p: PolyElement) -> int:
    return max((sum(m) for m in p.keys()), default=-1)


def monic(p: PolyElement) -> PolyElement:
    return p.quo_ground(p.LC) if p else p


# -- Gaussian integers -----------------------------------------------------------


def _gi_divmod_round(a: tuple, b: tuple) -> tuple:
    """Nearest-integer quotient a/b in Z[i] (components as Python ints)."""
    ar, ai = a
    br, bi = b
    n = br * br + bi * bi
    qr_num = ar * br + ai * bi
    qi_num = ai * br - ar * bi
    qr = (2 * qr_num + n) // (2 * n)
    qi = (2 * qi_num + n) // (2 * n)
    return qr, qi


def _gi_gcd(a: tuple, b: tuple) -> tuple:
    while b != (0, 0):
        q = _gi_divmod_round(a, b)
        r = (a[0] - (q[0] * b[0] - q[1] * b[1]), a[1] - (q[0] * b[1] + q[1] * b[0]))
        a, b = b, r
    return a


def _gi_exact_div(a: tuple, b: tuple):
    n = b[0] * b[0] + b[1] * b[1]
    re = a[0] * b[0] + a[1] * b[1]
    im = a[1] * b[0] - a[0] * b[1]
    if re % n or im % n:
        return None
    return re // n, im // n


def _gi_mul(a: tuple, b: tuple) -> tuple:
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


# dict polynomials: {exponent tuple: (re, im)} with integer parts


def _to_gi(p: PolyElement) -> dict:
    den = 1
    for c in p.values():
        for part in (c.x, c.y):
            d = int(part.denominator)
            den = den * d // math.gcd(den, d)
    out = {}
    for m, c in p.items():
        out[m] = (int(c.x * den), int(c.y * den))
    return out


def _content(p: dict) -> tuple:
    g = (0, 0)
    for c in p.values():
        g = _gi_gcd(c, g) if g != (0, 0) else c
        if g in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            return (1, 0)
    return g


def _div_const(p: dict, c: tuple) -> dict:
    out = {}
    for m, v in p.items():
        q = _gi_exact_div(v, c)
        assert q is not None
        out[m] = q
    return out


def _max_norm(p: dict) -> int:
    return max(max(abs(c[0]), abs(c[1])) for c in p.values())


def _evaluate_last(p: dict, xi: int, nv: int) -> dict:
    out: dict = {}
    for m, c in p.items():
        k = m[nv - 1]
        w = xi ** k
        key = m[: nv - 1]
        old = out.get(key, (0, 0))
        out[key] = (old[0] + c[0] * w, old[1] + c[1] * w)
    return {k: v for k, v in out.items() if v != (0, 0)}


def _balanced_digits(n: int, xi: int) -> list:
    digits = []
    while n:
        d = n % xi
        if d > xi // 2:
            d -= xi
        digits.append(d)
        n = (n - d) // xi
    return digits


def _interpolate(h: dict, xi: int, nv: int) -> dict:
    out: dict = {}
    for m, c in h.items():
        re = _balanced_digits(c[0], xi)
        im = _balanced_digits(c[1], xi)
        for k in range(max(len(re), len(im))):
            r = re[k] if k < len(re) else 0
            i = im[k] if k < len(im) else 0
            if r or i:
                out[m + (k,)] = (r, i)
    return out


@lru_cache(maxsize=None)
def _gi_ring(nv: int) -> PolyRing:
    return PolyRing([f"_z{k}" for k in range(nv)], QQ_I)


def _gi_divides(h: dict, f: dict, nv: int) -> bool:
    if nv == 0:
        return _gi_exact_div(f.get((), (0, 0)), h[()]) is not None
    R = _gi_ring(nv)
    _q, r = _from_gi(f, R).div(_from_gi(h, R))
    return not r


def _heu_gcd(f: dict, g: dict, nv: int):
    """Heuristic GCD of Gaussian-integer polynomials in ``nv`` variables (or None).

    The result is the GCD up to a unit, content included.
    """
    cf, cg = _content(f), _content(g)
    common = _gi_gcd(cf, cg)
    if nv == 0:
        return {(): common}
    f, g = _div_const(f, cf), _div_const(g, cg)
    fn, gn = _max_norm(f), _max_norm(g)
    B = 2 * min(fn, gn) + 29
    xi = max(min(B, 99 * math.isqrt(B)), 2 * min(fn, gn) + 2)
    for _ in range(_HEU_TRIES):
        ff = _evaluate_last(f, xi, nv)
        gg = _evaluate_last(g, xi, nv)
        if ff and gg:
            h = _heu_gcd(ff, gg, nv - 1)
            if h is not None:
                H = _interpolate(h, xi, nv - 1)
                if H:
                    H = _div_const(H, _content(H))
                    if _gi_divides(H, f, nv) and _gi_divides(H, g, nv):
                        return {m: _gi_mul(c, common) for m, c in H.items()}
        xi = xi * 73794 * math.isqrt(math.isqrt(xi)) // 27011
    return None


def _from_gi(p: dict, ring: PolyRing) -> PolyElement:
    return ring.from_dict({m: QQ_I(c[0], c[1]) for m, c in p.items()})


def _divides(a: PolyElement, b: PolyElement) -> bool:
    """a | b exactly."""
    _q, r = b.div(a)
    return not r


def gcd(p: PolyElement, q: PolyElement) -> PolyElement:
    """Monic GCD over QQ(i)."""
    ring = p.ring
    if not p:
        return monic(q)
    if not q:
        return monic(p)
    if p.is_ground or q.is_ground:
        return ring.one
    if is_real(p) and is_real(q):
        return monic(from_qq(to_qq(p).gcd(to_qq(q)), ring))
    nv = ring.ngens
    H = _heu_gcd(_to_gi(p), _to_gi(q), nv)
    if H is not None:
        cand = _from_gi(H, ring)
        if cand and _divides(cand, p) and _divides(cand, q):
            return monic(cand)
    return monic(p.gcd(q))


def squarefree_part(p: PolyElement) -> PolyElement:
    g = p
    for gen in p.ring.gens:
        d = p.diff(gen)
        if d:
            g = gcd(g, d)
            if g.is_ground:
                break
    if g.is_ground:
        return monic(p)
    return monic(p.exquo(g))


def _shift(p: PolyElement, shifts: dict, sign: int = 1) -> PolyElement:
    """Substitute x_j -> x_j - sign * s_j * i for every (j, s_j) in ``shifts``."""
    ring = p.ring
    pairs = [(ring.gens[j], ring.gens[j] - ring(QQ_I(0, sign * s))) for j, s in shifts.items() if s]
    return p.compose(pairs) if pairs else p


def _shift_candidates(active: list):
    yield {}
    for t in range(1, 9):
        for signs in (1, -1):
            yield {j: signs * t * (k + 1) for k, j in enumerate(active)}
        yield {j: t * (1 if k % 2 == 0 else -1) * (k + 2) for k, j in enumerate(active)}


def _factor_squarefree(S: PolyElement) -> list:
    ring = S.ring
    if S.is_ground:
        return []
    if total_degree(S) == 1:
        return [monic(S)]
    active = [j for j in range(ring.ngens) if any(m[j] for m in S.keys())]
    for shifts in _shift_candidates(active):
        Ss = _shift(S, shifts)
        Nq = to_qq(Ss * conjugate(Ss))
        _unit, facs = Nq.factor_list()
        if any(e > 1 for _f, e in facs):
            continue
        out = []
        for Nk, _e in facs:
            G = gcd(Ss, from_qq(Nk, ring))
            if not G.is_ground:
                out.append(monic(_shift(G, shifts, -1)))
        return out
    raise ArithmeticError("no squarefree norm found for Trager factorization")


def factor_list(p: PolyElement) -> tuple:
    """(unit, [(monic irreducible factor, multiplicity), ...]) over QQ(i)."""
    ring = p.ring
    if not p:
        return QQ_I.zero, []
    lc = p.LC
    P = monic(p)
    if P.is_ground:
        return lc, []
    if is_real(P):
        _u, facs = to_qq(P).factor_list()
        pieces = []
        for F, e in facs:
            F = monic(from_qq(F, ring))
            for G in _factor_squarefree(F):
                pieces.append((G, e))
        return lc, _merge(pieces)
    S = squarefree_part(P)
    pieces = []
    for F in _factor_squarefree(S):
        e, rest = 0, P
        while True:
            q, r = rest.div(F)
            if r:
                break
            rest, e = q, e + 1
        pieces.append((F, max(e, 1)))
    return lc, _merge(pieces)


def _merge(pieces: list) -> list:
    acc: dict = {}
    order = []
    for F, e in pieces:
        key = frozenset(F.items())
        if key not in acc:
            acc[key] = [F, 0]
            order.append(key)
        acc[key][1] += e
    return [(acc[k][0], acc[k][1]) for k in order]
