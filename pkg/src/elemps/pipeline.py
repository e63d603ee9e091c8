"""parse -> reduce -> solver -> quadrature -> verify, as one call."""
from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field

import sympy as sp

from .algebra.polysolve import Budget
from .errors import (AssociatedUnsolved, ElempsError, GuardViolation, NonElementaryResidual,
                     NotFound, NotReducible, SearchBudgetExceeded, VerificationFailure)
from .parser import Ode1, parse_ode, print_ode
from .reducer import TRIG_HEADS, HYP_HEADS, Method, System3D, build_system, system_summary
from .solver_ps import solve_ps_system
from .solver_s import solve_s
from .verifier import check_invariant, numeric_crosscheck

log = logging.getLogger(__name__)

STRATEGIES = ("auto", "ps", "sfunction")
DRIFT_TOLERANCE = 1e-6

# failures that mean "this strategy found nothing", not "the input is bad"
_SEARCH_FAILURES = (NotFound, SearchBudgetExceeded, AssociatedUnsolved, NotReducible,
                    NonElementaryResidual, GuardViolation)


@dataclass
class SolveConfig:
    strategy: str = "auto"
    trig_method: int = 2
    max_darboux_degree: int = 2
    max_pq_degree: int = 2
    max_s_degree: int = 2
    timeout: float = 60.0
    verify: str = "symbolic"
    seed: int = 0
    timings: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.trig_method not in (1, 2):
            raise ValueError("trig method must be 1 or 2")
        if self.verify not in ("symbolic", "symbolic+numeric"):
            raise ValueError(f"unknown verification mode {self.verify!r}")

    @property
    def effective_timeout(self) -> float:
        env = os.environ.get("ELEMPS_TIMEOUT")
        return float(env) if env else self.timeout


@dataclass
class Solution:
    ode: Ode1
    system: System3D
    strategy: str
    invariant_u: sp.Expr  # in (x, y, u)
    invariant: sp.Expr  # in (x, y) with u replaced by its definition
    details: dict = field(default_factory=dict)
    symbolic: str = "Verified"
    numeric_drift: float | None = None
    timings: dict = field(default_factory=dict)


class NoInvariant(ElempsError):
    """Every enabled strategy finished without a verified invariant."""

    def __init__(self, message, system=None, attempts=None):
        super().__init__(message)
        self.system = system
        self.attempts = attempts or {}


def choose_method(ode: Ode1, trig_method: int) -> Method:
    if trig_method == 1 and (ode.M.has(*TRIG_HEADS, *HYP_HEADS) or ode.N.has(*TRIG_HEADS, *HYP_HEADS)):
        return Method.TRIG_METHOD_1
    return Method.TRIG_METHOD_2 if trig_method == 2 else Method.AUTO


def present(I: sp.Expr, system: System3D) -> sp.Expr:
    """The invariant written in the ODE's own variables."""
    e = sp.powsimp(system.record.back_substitute(I))
    if e.has(sp.Integral):
        return e.replace(lambda n: isinstance(n, sp.Integral), _pull_constant)
    simpler = sp.powsimp(sp.together(e))
    return simpler if sp.count_ops(simpler) <= sp.count_ops(e) else e


def _pull_constant(node: sp.Integral) -> sp.Expr:
    var = node.limits[0][0]
    c, rest = sp.factor_terms(node.function).as_independent(var, as_Add=False)
    return c * sp.Integral(rest, *node.limits) if c != 1 else node


def _run_strategy(name: str, system: System3D, cfg: SolveConfig):
    budget = Budget.with_timeout(cfg.effective_timeout)
    if name == "sfunction":
        res = solve_s(system, cfg.max_s_degree, budget)
        details = {"S": str(res.S.as_expr()), "G": str(res.associated.G),
                   "subsolver": res.associated.subsolver, "phi": str(res.extension.phi)}
        return res.integral.value, details
    res = solve_ps_system(system, cfg.max_darboux_degree, cfg.max_pq_degree, budget)
    details = {"mode": res.mode, "darboux_degree": res.darboux_degree,
               "darboux_polynomials": [str(p.p) for p in res.pairs]}
    cand = res.candidate
    if res.mode == "3d":
        details.update({"P": str(cand.P), "Q": str(cand.Q)})
    details["exponents"] = [[str(p), str(n)] for p, n in cand.exponents]
    return res.integral.value, details


def solve_system(ode: Ode1, system: System3D, cfg: SolveConfig, timings: dict) -> Solution:
    order = ["sfunction", "ps"] if cfg.strategy == "auto" else [cfg.strategy]
    attempts = {}
    for name in order:
        t0 = time.perf_counter()
        try:
            I, details = _run_strategy(name, system, cfg)
        except _SEARCH_FAILURES as exc:
            attempts[name] = f"{type(exc).__name__}: {exc}"
            log.info("strategy %s failed: %s", name, exc)
            continue
        finally:
            timings[name] = time.perf_counter() - t0
        verdict = check_invariant(I, system, seed=cfg.seed)
        if not verdict or verdict.degenerate:
            raise VerificationFailure(f"strategy {name} returned an invariant that does not verify: {I}")
        sol = Solution(ode, system, name, I, present(I, system), details)
        if cfg.verify == "symbolic+numeric":
            t1 = time.perf_counter()
            report = numeric_crosscheck(I, system, seed=cfg.seed)
            timings["numeric"] = time.perf_counter() - t1
            sol.numeric_drift = report.max_drift
            if report.max_drift > DRIFT_TOLERANCE:
                raise VerificationFailure(
                    f"numeric drift {report.max_drift:.3g} exceeds {DRIFT_TOLERANCE} for {I}")
        return sol
    raise NoInvariant("no verified invariant within the configured budgets", system, attempts)


def solve(text: str, cfg: SolveConfig | None = None) -> Solution:
    """Solve an ODE given as text.  Raises UnsupportedInputError, NoInvariant or VerificationFailure."""
    cfg = cfg or SolveConfig()
    timings: dict = {}
    t0 = time.perf_counter()
    ode = parse_ode(text)
    system = build_system(ode, choose_method(ode, cfg.trig_method))
    timings["reduce"] = time.perf_counter() - t0
    sol = solve_system(ode, system, cfg, timings)
    sol.timings = timings if cfg.timings else {}
    return sol


def to_json_dict(sol: Solution | None, text: str, cfg: SolveConfig, error: str | None = None,
                 system: System3D | None = None) -> dict:
    system = sol.system if sol is not None else system
    out = {
        "input": text,
        "system": dict(system_summary(system)) if system is not None else None,
        "strategy": sol.strategy if sol else None,
        "invariant": str(sol.invariant) if sol else None,
        "verification": {
            "symbolic": sol.symbolic if sol else None,
            "numeric_drift": sol.numeric_drift if sol else None,
        },
        "timings": ({k: round(v, 6) for k, v in sol.timings.items()} if sol and cfg.timings else None),
    }
    if error is not None:
        out["error"] = error
    return out


__all__ = ["SolveConfig", "Solution", "NoInvariant", "solve", "solve_system", "present",
           "to_json_dict", "choose_method", "print_ode", "DRIFT_TOLERANCE"]
