"""Recursive case-splitting solver for small polynomial systems over QQ(i).

Used by the Darboux search, the P/Q/n solve and the S-function ansatz.  The
solver only looks for solutions with coordinates in QQ(i).  It prefers cheap
moves (linear elimination with constant pivots, univariate roots, splitting
reducible equations) and falls back to a lex Groebner basis.  Positive
dimensional components are sampled by specializing their free unknowns.
"""
from __future__ import annotations

import logging
import signal
import threading
import time
from dataclasses import dataclass, field
from typing import Sequence

from sympy import QQ_I
from sympy.polys.groebnertools import groebner
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, PolyRing

from ..errors import SearchBudgetExceeded
from .gaussian import factor_list, from_qq, is_real, monic, to_qq

log = logging.getLogger(__name__)


@dataclass
class Budget:
    """Shared cap on case splits plus an optional wall-clock deadline."""

    max_splits: int = 50_000
    deadline: float | None = None
    splits: int = 0

    @classmethod
    def with_timeout(cls, seconds: float | None, max_splits: int = 50_000) -> "Budget":
        deadline = None if seconds is None else time.monotonic() + seconds
        return cls(max_splits=max_splits, deadline=deadline)

    def tick(self, n: int = 1) -> None:
        self.splits += n
        if self.splits > self.max_splits:
            raise SearchBudgetExceeded(f"case-split cap {self.max_splits} exceeded")
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SearchBudgetExceeded("wall-clock budget exhausted")

    def check_time(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SearchBudgetExceeded("wall-clock budget exhausted")


@dataclass
class _State:
    eqs: list
    chain: list = field(default_factory=list)  # (var index, num, den)
    nonzero: list = field(default_factory=list)
    tried_groebner: bool = False
    pending: tuple = ()  # later stages of equations, not yet rewritten through the chain


def _vars_of(p: PolyElement) -> set:
    out = set()
    for mon in p.keys():
        for i, e in enumerate(mon):
            if e:
                out.add(i)
    return out


def _key(p: PolyElement):
    return frozenset(p.items())


def _deg(p: PolyElement, i: int) -> int:
    return max((m[i] for m in p.keys()), default=-1)


def _coeff(p: PolyElement, i: int, j: int) -> PolyElement:
    """Coefficient of x_i^j, as a polynomial free of x_i."""
    out = {}
    for m, c in p.items():
        if m[i] == j:
            out[m[:i] + (0,) + m[i + 1:]] = c
    return p.ring.from_dict(out) if out else p.ring.zero


def _strip_monomial(p: PolyElement, idx: set) -> PolyElement:
    """Divide out the largest power of each variable in ``idx`` dividing p."""
    if not idx:
        return p
    lows = {i: min(m[i] for m in p.keys()) for i in idx}
    if not any(lows.values()):
        return p
    out = {}
    for m, c in p.items():
        out[tuple(e - lows.get(i, 0) for i, e in enumerate(m))] = c
    return p.ring.from_dict(out)


def _substitute(p: PolyElement, gen: PolyElement, num: PolyElement, den: PolyElement) -> PolyElement:
    """den^k * p(gen = num/den), k = deg_gen p."""
    ring = p.ring
    i = ring.gens.index(gen)
    k = _deg(p, i)
    if k <= 0:
        return p
    if den.is_ground:
        num = num.quo_ground(den.LC)
        den = ring.one
    out = ring.zero
    num_pows = [ring.one]
    den_pows = [ring.one]
    for _ in range(k):
        num_pows.append(num_pows[-1] * num)
        den_pows.append(den_pows[-1] * den)
    for j in range(k + 1):
        c = _coeff(p, i, j)
        if c:
            out += c * num_pows[j] * den_pows[k - j] if not den.is_ground else c * num_pows[j]
    return out


class PolySystemSolver:
    def __init__(self, ring: PolyRing, priority: Sequence[int] | None = None,
                 budget: Budget | None = None, samples: str = "basis", groebner_max_vars: int = 8,
                 groebner_seconds: float = 2.0):
        self.ring = ring
        self.n = ring.ngens
        rank = {i: i for i in range(self.n)}
        if priority is not None:
            rank = {v: k for k, v in enumerate(priority)}
            for i in range(self.n):
                rank.setdefault(i, len(rank) + i)
        self.rank = rank
        self.budget = budget or Budget()
        self.samples = samples
        # Buchberger cannot be interrupted by the budget, so it only runs on small systems
        self.groebner_max_vars = groebner_max_vars
        self.groebner_seconds = groebner_seconds
        self.incomplete = False  # a stuck piece was sampled
        self.parametric = False  # some solution branch kept free unknowns (then sampled)
        self.lex_ring = PolyRing(ring.symbols, ring.domain, lex)

    # public -----------------------------------------------------------------
    def solve(self, eqs: Sequence[PolyElement], later: Sequence[Sequence[PolyElement]] = ()) -> list:
        """All solutions of ``eqs`` (sampled on positive-dimensional pieces).

        ``later`` holds further stages of equations.  A stage is only brought
        in once every branch of the previous ones is solved, so an easy
        subsystem can be settled (parameters kept symbolic) before the rest.
        """
        results = self._rec(_State(list(eqs), pending=tuple(list(stage) for stage in later)))
        seen, out = set(), []
        for sol in results:
            key = tuple(sorted(sol.items()))
            if key not in seen:
                seen.add(key)
                out.append(sol)
        return out

    # recursion ----------------------------------------------------------------
    def _normalize(self, eqs, nonzero=()):
        nz_vars = set()
        nz_keys = set()
        for q in nonzero:
            q = q.quo_ground(q.LC)
            nz_keys.add(_key(q))
            if len(q) == 1:
                nz_vars |= _vars_of(q)
        out, seen = [], set()
        for p in eqs:
            if not p:
                continue
            p = _strip_monomial(p, nz_vars)
            if p.is_ground:
                return None
            p = p.quo_ground(p.LC)
            if _key(p) in nz_keys:
                return None
            k = _key(p)
            if k not in seen:
                seen.add(k)
                out.append(p)
        out.sort(key=lambda q: (len(q), q.LM))
        return out

    def _rec(self, st: _State) -> list:
        self.budget.tick()
        eqs = self._normalize(st.eqs, st.nonzero)
        if eqs is None:
            return []
        if not eqs:
            if st.pending:
                return self._rec(self._next_stage(st))
            return self._leaves(st)
        gens = self.ring.gens

        # a single-term equation forces one of its variables to vanish
        for p in eqs:
            if len(p) == 1:
                (mon,) = p.keys()
                out = []
                earlier = []
                for i, e in enumerate(mon):
                    if e:
                        sub = _State(eqs, st.chain, st.nonzero + earlier, pending=st.pending)
                        out.extend(self._assign(sub, eqs, i, self.ring.zero, self.ring.one))
                        earlier = earlier + [self.ring.gens[i]]
                return out

        # linear elimination with a constant pivot
        best = None
        for p in eqs:
            for i in _vars_of(p):
                if _deg(p, i) != 1:
                    continue
                c = _coeff(p, i, 1)
                if c.is_ground:
                    score = (self.rank[i], len(p))
                    if best is None or score < best[0]:
                        best = (score, p, i)
        if best is not None:
            _, p, i = best
            c = _coeff(p, i, 1)
            rest = p - c * gens[i]
            num = -rest.quo_ground(c.LC)
            return self._assign(st, eqs, i, num, self.ring.one, drop=p)

        # univariate equation: branch over its QQ(i) roots
        for p in eqs:
            vs = _vars_of(p)
            if len(vs) == 1:
                (i,) = vs
                _, facs = factor_list(p)
                out = []
                for fac, _m in facs:
                    if _deg(fac, i) == 1:
                        c1 = _coeff(fac, i, 1)
                        c0 = fac - c1 * gens[i]
                        root = -c0.quo_ground(c1.LC)
                        out.extend(self._assign(st, eqs, i, root, self.ring.one))
                return out

        # reducible equation: one branch per distinct factor
        for p in eqs[:6]:
            if len(p) > 40:
                continue
            facs = _split_factors(p)
            if len(facs) > 1:
                out = []
                earlier = []
                for fac, _m in facs:
                    self.budget.tick()
                    new = [q for q in eqs if q is not p] + [fac]
                    out.extend(self._rec(_State(new, list(st.chain), list(st.nonzero) + earlier, pending=st.pending)))
                    earlier = earlier + [fac]
                return out

        # linear in some unknown with a non-constant pivot
        best = None
        for p in eqs:
            for i in _vars_of(p):
                if _deg(p, i) != 1:
                    continue
                c = _coeff(p, i, 1)
                score = (len(c), self.rank[i], len(p))
                if best is None or score < best[0]:
                    best = (score, p, i, c)
        if best is not None:
            _, p, i, c = best
            rest = p - c * gens[i]
            others = [q for q in eqs if q is not p]
            out = self._rec(_State(others + [c, rest], list(st.chain), list(st.nonzero), pending=st.pending))
            out.extend(self._assign(st, eqs, i, -rest, c, drop=p, nonzero=c))
            return out

        active = set().union(*(_vars_of(p) for p in eqs))
        if not st.tried_groebner and len(active) <= self.groebner_max_vars:
            lex_eqs = [self.lex_ring.from_dict(dict(p)) for p in eqs]
            gb = _groebner_with_limit(lex_eqs, self.lex_ring, self._groebner_seconds())
        else:
            gb = None
        if gb is not None:
            gb = [self.ring.from_dict(dict(g)) for g in gb]
            if any(g.is_ground and g for g in gb):
                return []
            new = _State(gb, list(st.chain), list(st.nonzero), tried_groebner=True, pending=st.pending)
            return self._rec(new)

        # stuck on a nonlinear positive-dimensional piece: sample it
        self.incomplete = True
        i = max(set().union(*(_vars_of(p) for p in eqs)), key=lambda k: self.rank[k])
        log.debug("sampling unknown %s in a stuck system of %d equations", self.ring.symbols[i], len(eqs))
        out = []
        for val in (0, 1):
            out.extend(self._assign(st, eqs, i, self.ring(val), self.ring.one))
        return out

    def _assign(self, st, eqs, i, num, den, drop=None, nonzero=None):
        gen = self.ring.gens[i]
        new_eqs = []
        for q in eqs:
            if q is not drop:
                # a substitution can be slow once the equations have swollen
                self.budget.check_time()
                new_eqs.append(_substitute(q, gen, num, den))
        new_nz = [_substitute(q, gen, num, den) for q in st.nonzero]
        if nonzero is not None:
            new_nz.append(nonzero)
        if any(q.is_ground and not q for q in new_nz):
            return []
        chain = list(st.chain) + [(i, num, den)]
        return self._rec(_State(new_eqs, chain, new_nz, pending=st.pending))

    def _next_stage(self, st: _State) -> _State:
        """Bring in the next stage, rewritten through the elimination chain."""
        stage = list(st.pending[0])
        for i, num, den in st.chain:
            gen = self.ring.gens[i]
            stage = [_substitute(q, gen, num, den) for q in stage]
            self.budget.check_time()
        return _State(stage, list(st.chain), list(st.nonzero), pending=st.pending[1:])

    def _groebner_seconds(self) -> float:
        limit = self.groebner_seconds
        if self.budget.deadline is not None:
            limit = min(limit, max(self.budget.deadline - time.monotonic(), 0.01))
        return limit

    # leaves -------------------------------------------------------------------
    def _leaves(self, st: _State) -> list:
        eliminated = {i for i, _, _ in st.chain}
        free = [i for i in range(self.n) if i not in eliminated]
        if free:
            self.parametric = True
        params = free
        trials = [dict.fromkeys(params, 0)]
        if self.samples == "basis":
            for j in params:
                d = dict.fromkeys(params, 0)
                d[j] = 1
                trials.append(d)
        out = []
        for base in trials:
            for shift in range(6):
                sol = self._resolve(st, free, {k: v + shift * (k + 1) if v or shift else v for k, v in base.items()})
                if sol is not None:
                    out.append(sol)
                    break
        return out

    def _resolve(self, st, free, params):
        dom = self.ring.domain
        values = [dom.zero] * self.n
        for i in free:
            values[i] = dom.convert(params.get(i, 0))
        for i, num, den in reversed(st.chain):
            d = den(*values) if not den.is_ground else den.LC
            if not d:
                return None
            nv = num(*values) if not num.is_ground else (num.LC if num else dom.zero)
            values[i] = nv / d
        for q in st.nonzero:
            val = q(*values) if not q.is_ground else q.LC
            if not val:
                return None
        return {i: values[i] for i in range(self.n)}


def _split_factors(p: PolyElement) -> list:
    """Factors to branch on.  Rational factors suffice for real p: every branch
    is still an equation, and splitting further over QQ(i) is costly."""
    if is_real(p):
        _u, facs = to_qq(p).factor_list()
        return [(monic(from_qq(F, p.ring)), e) for F, e in facs if not F.is_ground]
    return factor_list(p)[1]


class _GroebnerTimeout(Exception):
    pass


def _groebner_with_limit(eqs, ring, seconds: float):
    """Lex Groebner basis, or None when it does not finish within ``seconds``.

    Buchberger's loop cannot poll the budget, so it is interrupted with a
    real-time timer; off the main thread (no signals) it is skipped.
    """
    if threading.current_thread() is not threading.main_thread() or not hasattr(signal, "setitimer"):
        return None

    def on_alarm(signum, frame):
        raise _GroebnerTimeout()

    previous = signal.signal(signal.SIGALRM, on_alarm)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        return groebner(eqs, ring)
    except _GroebnerTimeout:
        log.debug("Groebner basis abandoned after %.2fs", seconds)
        return None
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, previous)


def coefficient_equations(p: PolyElement, nmain: int, coeff_ring: PolyRing) -> list:
    """Split a polynomial in (main vars, unknowns) into equations in the unknowns.

    The first ``nmain`` generators of ``p.ring`` are the main variables; the
    remaining generators map one-to-one onto ``coeff_ring``'s generators.
    """
    groups: dict = {}
    for mon, c in p.items():
        groups.setdefault(mon[:nmain], {})[mon[nmain:]] = c
    return [coeff_ring.from_dict(d) for _, d in sorted(groups.items(), reverse=True)]


def gaussian_domain():
    return QQ_I
