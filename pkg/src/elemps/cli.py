"""Command line interface: ``elemps solve`` and ``elemps corpus``.

Exit codes: 0 verified invariant, 1 malformed input or usage, 2 no invariant
within the budgets, 3 unsupported input class, 4 verification failure
(an internal bug), 5 missing or empty corpus.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from importlib import resources
from pathlib import Path

import sympy as sp

from .errors import (ODESyntaxError, NotRationalError, UnsupportedFunctionError, UnsupportedInputError,
                     VariableError, VerificationFailure)
from .parser import parse_expression, parse_ode
from .pipeline import NoInvariant, SolveConfig, Solution, solve, to_json_dict
from .reducer import system_summary
from .verifier import functionally_dependent

EXIT_OK, EXIT_USAGE, EXIT_NONE, EXIT_UNSUPPORTED, EXIT_BUG, EXIT_NO_CORPUS = 0, 1, 2, 3, 4, 5

_UNSUPPORTED = (UnsupportedInputError, UnsupportedFunctionError, NotRationalError)
_MALFORMED = (ODESyntaxError, VariableError)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; 2 means "no invariant" here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=("auto", "ps", "sfunction"), default="auto")
    p.add_argument("--trig-method", type=int, choices=(1, 2), default=2)
    p.add_argument("--max-darboux-degree", type=int, default=2, metavar="N")
    p.add_argument("--max-pq-degree", type=int, default=2, metavar="N")
    p.add_argument("--max-s-degree", type=int, default=2, metavar="N")
    p.add_argument("--timeout", type=float, default=60.0, metavar="SECONDS",
                   help="wall-clock budget per strategy (ELEMPS_TIMEOUT overrides)")
    p.add_argument("--verify", choices=("symbolic", "symbolic+numeric"), default="symbolic")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the output")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="elemps", description="Elementary first integrals of first-order ODEs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("solve", help="solve one ODE")
    s.add_argument("ode", nargs="?", help='e.g. "diff(y(x),x) = (x - y(x))/x"; omit to read --file or stdin')
    s.add_argument("--file", type=Path, help="read the ODE from a file")
    s.add_argument("--emit", choices=("text", "json", "latex"), default="text")
    _add_solver_flags(s)
    c = sub.add_parser("corpus", help="run a directory of ODE cases")
    c.add_argument("directory", nargs="?", type=Path, help="corpus directory (default: the shipped corpus)")
    _add_solver_flags(c)
    return parser


def config_from_args(args, trig_method: int | None = None) -> SolveConfig:
    return SolveConfig(
        strategy=args.strategy,
        trig_method=trig_method or args.trig_method,
        max_darboux_degree=args.max_darboux_degree,
        max_pq_degree=args.max_pq_degree,
        max_s_degree=args.max_s_degree,
        timeout=args.timeout,
        verify=args.verify,
        seed=args.seed,
        timings=args.timings,
    )


# -- emission --------------------------------------------------------------------------


def _emit_text(sol: Solution) -> str:
    summary = system_summary(sol.system)
    lines = [
        f"ode:        {sol.ode.dependent}' = {sp.sstr(sol.ode.rhs())}",
        f"u:          {summary['u_definition']}",
        f"system:     x' = {summary['f']}",
        f"            y' = {summary['g']}",
        f"            u' = {summary['h']}",
        f"strategy:   {sol.strategy}",
    ]
    for key, value in sol.details.items():
        lines.append(f"  {key}: {value}")
    lines.append(f"invariant:  {sp.sstr(sol.invariant)}")
    verdict = f"verification: {sol.symbolic} (symbolic)"
    if sol.numeric_drift is not None:
        verdict += f", numeric drift {sol.numeric_drift:.3g}"
    lines.append(verdict)
    if sol.timings:
        lines.append("timings:    " + ", ".join(f"{k} {v:.3f}s" for k, v in sol.timings.items()))
    return "\n".join(lines)


def _emit_latex(sol: Solution) -> str:
    summary = system_summary(sol.system)
    f, g, h = (sp.sympify(summary[k]) for k in ("f", "g", "h"))
    return "\n".join([
        r"\begin{align*}",
        rf"y' &= {sp.latex(sol.ode.rhs())} \\",
        rf"\dot x &= {sp.latex(f)},\quad \dot y = {sp.latex(g)},\quad \dot u = {sp.latex(h)}"
        rf",\quad u = {sp.latex(sol.system.record.original)} \\",
        rf"I(x, y) &= {sp.latex(sol.invariant)} = C",
        r"\end{align*}",
    ])


def _read_input(args) -> str:
    if args.ode:
        return args.ode
    if args.file:
        return args.file.read_text().strip()
    return sys.stdin.read().strip()


def run_solve(args) -> int:
    text = _read_input(args)
    cfg = config_from_args(args)
    random.seed(cfg.seed)
    system, error, code, sol = None, None, EXIT_OK, None
    try:
        sol = solve(text, cfg)
    except _MALFORMED as exc:
        error, code = f"{type(exc).__name__}: {exc}", EXIT_USAGE
    except _UNSUPPORTED as exc:
        msg = str(exc)
        error = msg if msg.startswith(type(exc).__name__) else f"{type(exc).__name__}: {msg}"
        code = EXIT_UNSUPPORTED
    except NoInvariant as exc:
        error, code, system = str(exc) + "".join(
            f"\n  {k}: {v}" for k, v in exc.attempts.items()), EXIT_NONE, exc.system
    except VerificationFailure as exc:
        error, code = f"VerificationFailure: {exc}", EXIT_BUG
    if args.emit == "json":
        print(json.dumps(to_json_dict(sol, text, cfg, error, system), indent=2))
    elif sol is not None:
        print(_emit_latex(sol) if args.emit == "latex" else _emit_text(sol))
    if error is not None:
        print(error, file=sys.stderr)
    return code


# -- corpus ------------------------------------------------------------------------------


def shipped_corpus() -> Path:
    return Path(str(resources.files("elemps") / "corpus"))


def load_corpus(directory: Path) -> list:
    cases = []
    for path in sorted(directory.glob("*.json")):
        data = json.loads(path.read_text())
        data.setdefault("name", path.stem)
        data.setdefault("expect", "verified")
        cases.append(data)
    return cases


def _check_reference(sol: Solution, reference: str) -> bool:
    ref = parse_expression(reference)
    return functionally_dependent(sol.invariant_u, ref, sol.system.record)


def run_corpus(args) -> int:
    directory = args.directory or shipped_corpus()
    if not directory.is_dir():
        print(f"corpus directory {directory} does not exist", file=sys.stderr)
        return EXIT_NO_CORPUS
    cases = load_corpus(directory)
    if not cases:
        print(f"corpus directory {directory} has no *.json cases", file=sys.stderr)
        return EXIT_NO_CORPUS
    failures = 0
    print(f"{'case':34} {'expect':12} {'outcome':12} {'strategy':10} {'time':>8}")
    for case in cases:
        cfg = config_from_args(args, case.get("trig_method"))
        t0 = time.perf_counter()
        strategy, outcome = "-", "?"
        try:
            sol = solve(case["ode"], cfg)
            strategy = sol.strategy
            outcome = "verified"
            if case.get("reference") and not _check_reference(sol, case["reference"]):
                outcome = "mismatch"
        except _UNSUPPORTED:
            outcome = "unsupported"
        except NoInvariant:
            outcome = "none-found"
        except VerificationFailure:
            outcome = "bug"
        except _MALFORMED:
            outcome = "malformed"
        elapsed = time.perf_counter() - t0
        ok = outcome == case["expect"]
        failures += not ok
        print(f"{case['name']:34} {case['expect']:12} {outcome:12} {strategy:10} {elapsed:7.2f}s"
              + ("" if ok else "  FAIL"))
    print(f"{len(cases) - failures}/{len(cases)} cases as expected")
    return EXIT_OK if failures == 0 else EXIT_NONE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    if args.command == "solve":
        return run_solve(args)
    return run_corpus(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
