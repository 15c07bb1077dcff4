"""Command-line front end.

Every subcommand prints a JSON document (floats with 17 significant digits)
to stdout. Diagnostics go to stderr prefixed with ``error:`` or ``warning:``.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure; with
``check --exit-verdict``: Solvable 0, NotSolvable 3, Boundary 4.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .besselkit import bessel_zero
from .disc_spectrum import enumerate_eigenvalues, mode_from_indices, mode_from_rank
from .errors import NumericalError
from .exprlang import (
    NONLINEARITY_VARIABLES,
    ExprDomainError,
    ExprSyntaxError,
    Nonlinearity,
    parse,
    validate_nonlinearity,
)
from .heat_sim import run as heat_run
from .resonance import Verdict, check_solvability, compute_jnm, project
from .spectral_solver import FourierBesselBasis, SpectralField, solve
from .square_spectrum import count_representations, find_multiplicity

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
VERDICT_EXIT = {Verdict.SOLVABLE: 0, Verdict.NOT_SOLVABLE: 3, Verdict.BOUNDARY: 4}


class UsageError(Exception):
    pass


# --- JSON with fixed float formatting --------------------------------------

def _fmt(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return {True: "true", False: "false", None: "null"}[value]
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(value, str):
        import json

        return json.dumps(value)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{_fmt(str(k))}: {_fmt(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if dataclasses.is_dataclass(value):
        return _fmt(dataclasses.asdict(value))
    if hasattr(value, "value"):
        return _fmt(value.value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def dumps(obj: Any) -> str:
    """JSON text with every float printed to 17 significant digits."""
    return _fmt(obj)


# --- configuration ---------------------------------------------------------

@dataclass
class RunConfig:
    radius: float = 1.0
    mode: str | None = None
    f: str = "0"
    g: str = "u/sqrt(u^2+1)"
    gplus: float = 1.0
    gminus: float = -1.0
    radial_order: int = 64
    angular_order: int = 64
    tie_tol: float | None = None
    strict_g: bool = False
    nmax: int = 8
    mmax: int = 8
    tol: float = 1e-8
    max_iter: int = 40
    restarts: int = 5
    seed: int = 0
    dt: float | None = None
    tend: float = 1.0
    u0: str = "0"
    stable_subspace: bool = False
    out: str | None = None
    report: str | None = None

    def validate(self, needs_mode: bool) -> None:
        if not self.radius > 0:
            raise UsageError(f"--radius must be positive, got {self.radius}")
        if needs_mode and not self.mode:
            raise UsageError("a mode selector is required: --mode K (rank) or --mode N,M")
        for name in ("tol", "tend"):
            if not getattr(self, name) > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        for name in ("tie_tol", "dt"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if self.radial_order < 1 or self.angular_order < 1:
            raise UsageError("quadrature orders must be >= 1")
        if self.restarts < 1 or self.max_iter < 1:
            raise UsageError("--restarts and --max-iter must be >= 1")


def _coerce(name: str, text: str) -> Any:
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = kinds[name]
    if "bool" in kind:
        low = text.strip().lower()
        if low not in {"true", "false", "1", "0", "yes", "no"}:
            raise UsageError(f"config key {name!r} expects a boolean, got {text!r}")
        return low in {"true", "1", "yes"}
    if "int" in kind:
        return int(text)
    if "float" in kind:
        return float(text)
    return text.strip()


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; keys are the long flag names, ``#`` starts a comment."""
    known = {f.name for f in fields(RunConfig)}
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in known:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values)


def resolve_mode(cfg: RunConfig):
    text = cfg.mode.replace(" ", "")
    try:
        if "," in text:
            n, m = (int(p) for p in text.split(","))
            if n < 0 or m < 1:
                raise ValueError
            return mode_from_indices(n, m, cfg.radius)
        k = int(text)
        if k < 1:
            raise ValueError
        return mode_from_rank(k, cfg.radius)
    except ValueError:
        raise UsageError(f"bad mode selector {cfg.mode!r}: use a rank K >= 1 or N,M") from None


def _double_mode(cfg: RunConfig):
    mode = resolve_mode(cfg)
    if mode.n < 1:
        raise UsageError(
            f"mode ({mode.n},{mode.m}) is a radial n = 0 mode with a one-dimensional eigenspace; "
            "choose a double eigenvalue (n >= 1)"
        )
    return mode


def _nonlinearity(cfg: RunConfig) -> tuple[Nonlinearity, dict]:
    try:
        nl = Nonlinearity(parse(cfg.g, NONLINEARITY_VARIABLES), cfg.gplus, cfg.gminus)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep = validate_nonlinearity(nl)
    if not rep.passed:
        for msg in rep.messages:
            print(("error: " if cfg.strict_g else "warning: ") + msg, file=sys.stderr)
        if cfg.strict_g:
            raise UsageError("nonlinearity failed validation (--strict-g)")
    return nl, dataclasses.asdict(rep)


def _emit(doc: dict, cfg: RunConfig | None = None) -> None:
    text = dumps(doc)
    print(text)
    if cfg is not None and cfg.report:
        Path(cfg.report).write_text(text + "\n", encoding="utf-8")


# --- subcommands -----------------------------------------------------------

def cmd_eig_list(args, cfg: RunConfig) -> int:
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    modes = enumerate_eigenvalues(cfg.radius, args.count)
    _emit({"radius": cfg.radius, "eigenvalues": [dataclasses.asdict(m) for m in modes]})
    return EXIT_OK


def cmd_eig_square(args, cfg: RunConfig) -> int:
    if args.mult < 1 or args.max < 1:
        raise UsageError("--mult and --max must be >= 1")
    hits = find_multiplicity(args.mult, args.max)
    _emit({
        "multiplicity": args.mult, "max": args.max, "eigenvalues": hits,
        "representations": {str(N): [list(p) for p in count_representations(N).pairs] for N in hits[:50]},
    })
    return EXIT_OK


def cmd_bessel_zero(args, cfg: RunConfig) -> int:
    if args.n < 0 or args.m < 1:
        raise UsageError("need N >= 0 and M >= 1")
    _emit({"n": args.n, "m": args.m, "alpha": bessel_zero(args.n, args.m)})
    return EXIT_OK


def cmd_jnm(args, cfg: RunConfig) -> int:
    if args.n < 1 or args.m < 1:
        raise UsageError("J_nm needs N >= 1 and M >= 1")
    _emit({"n": args.n, "m": args.m, "radius": cfg.radius, "J_nm": compute_jnm(args.n, args.m, cfg.radius)})
    return EXIT_OK


def cmd_project(args, cfg: RunConfig) -> int:
    mode = _double_mode(cfg)
    f = parse(cfg.f)
    A_k, B_k = project(f, mode, cfg.radius, cfg.radial_order, cfg.angular_order)
    _emit({"n": mode.n, "m": mode.m, "rank": mode.rank, "radius": cfg.radius, "f": cfg.f,
           "A_k": A_k, "B_k": B_k, "norm": math.hypot(A_k, B_k)}, cfg)
    return EXIT_OK


def cmd_check(args, cfg: RunConfig) -> int:
    mode = _double_mode(cfg)
    f = parse(cfg.f)
    nl, validation = _nonlinearity(cfg)
    rep = check_solvability(f, nl, mode, cfg.radius, cfg.tie_tol, cfg.radial_order, cfg.angular_order)
    doc = rep.to_dict()
    doc["f"] = cfg.f
    doc["g"] = cfg.g
    doc["g_validation"] = validation
    _emit(doc, cfg)
    return VERDICT_EXIT[rep.verdict] if args.exit_verdict else EXIT_OK


def cmd_solve(args, cfg: RunConfig) -> int:
    mode = _double_mode(cfg)
    f = parse(cfg.f)
    nl, validation = _nonlinearity(cfg)
    rep = check_solvability(f, nl, mode, cfg.radius, cfg.tie_tol, cfg.radial_order, cfg.angular_order)
    out = solve(f, nl, mode, cfg.radius, (cfg.nmax, cfg.mmax), cfg.tol, cfg.max_iter, cfg.restarts, seed=cfg.seed)
    doc = {"verdict": rep.verdict.value, "lhs": rep.lhs, "rhs": rep.rhs}
    doc.update(out.to_dict())
    if not out.converged:
        doc["note"] = "no attempt converged; this is evidence against existence, not a proof"
    doc["g_validation"] = validation
    _emit(doc, cfg)
    return EXIT_OK


def cmd_heat(args, cfg: RunConfig) -> int:
    mode = _double_mode(cfg)
    f = parse(cfg.f)
    nl, validation = _nonlinearity(cfg)
    floor = mode.lam if cfg.stable_subspace else None
    basis = FourierBesselBasis(cfg.radius, cfg.nmax, cfg.mmax, lam_floor=floor)
    u0 = SpectralField.from_expression(basis, parse(cfg.u0))
    trace = heat_run(f, nl, mode, u0, cfg.dt, cfg.tend)
    if cfg.out:
        trace.to_csv(cfg.out)
    H = trace.H_values
    doc = {
        "n": mode.n, "m": mode.m, "rank": mode.rank, "radius": cfg.radius,
        "dt": trace.dt, "steps": int(H.size - 1), "t_end": float(trace.times[-1]),
        "epsilon": trace.epsilon, "H_0": float(H[0]), "H_end": float(H[-1]),
        "drift_bound": float(H[0] - 0.9 * trace.epsilon * trace.times[-1]) if trace.epsilon > 0 else None,
        "basis_size": len(basis), "stable_subspace": cfg.stable_subspace, "trace_csv": cfg.out,
        "g_validation": validation,
    }
    _emit(doc, cfg)
    return EXIT_OK


def cmd_selftest(args, cfg: RunConfig) -> int:
    from .selftest import run_suite

    results = run_suite()
    for r in results:
        print(r.line(), file=sys.stderr)
    _emit({"passed": all(r.passed for r in results),
           "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


# --- parser ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _problem_flags(p: argparse.ArgumentParser, with_g: bool = True) -> None:
    p.add_argument("--radius", type=float, help="disc radius a (default 1)")
    p.add_argument("--mode", help="eigenvalue rank K, or N,M for the zero alpha_{N,M}")
    p.add_argument("--f", help="forcing f in x, y, r, theta (default 0)")
    if with_g:
        p.add_argument("--g", help="nonlinearity g in u (default u/sqrt(u^2+1))")
        p.add_argument("--gplus", type=float, help="declared g(+inf)")
        p.add_argument("--gminus", type=float, help="declared g(-inf)")
        p.add_argument("--strict-g", dest="strict_g", action="store_const", const=True,
                       help="fail when the sampled validation of g fails")
        p.add_argument("--tie-tol", dest="tie_tol", type=float)
    p.add_argument("--radial-order", dest="radial_order", type=int)
    p.add_argument("--angular-order", dest="angular_order", type=int)
    p.add_argument("--report", help="also write the JSON report to this path")


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nmax", type=int, help="angular truncation (default 8)")
    p.add_argument("--mmax", type=int, help="radial truncation (default 8)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="resodisc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"resodisc {__version__}")
    parser.add_argument("--config", help="flat key=value file mirroring the long flags")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    eig = sub.add_parser("eig", help="disc and square spectra")
    eig_sub = eig.add_subparsers(dest="eig_command", parser_class=_Parser)
    eig_sub.required = True
    p = eig_sub.add_parser("list", help="smallest disc eigenvalues")
    p.add_argument("--radius", type=float)
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_eig_list)
    p = eig_sub.add_parser("square", help="square eigenvalues n^2+m^2 of a given multiplicity")
    p.add_argument("--mult", type=int, required=True)
    p.add_argument("--max", type=int, required=True)
    p.set_defaults(func=cmd_eig_square)

    bessel = sub.add_parser("bessel", help="Bessel function utilities")
    b_sub = bessel.add_subparsers(dest="bessel_command", parser_class=_Parser)
    b_sub.required = True
    p = b_sub.add_parser("zero", help="m-th positive zero of J_n")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.set_defaults(func=cmd_bessel_zero)

    p = sub.add_parser("jnm", help="sign-split radial integral J_nm")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--radius", type=float)
    p.set_defaults(func=cmd_jnm)

    p = sub.add_parser("project", help="projections A_k, B_k of f on the eigenspace")
    _problem_flags(p, with_g=False)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("check", help="solvability verdict")
    _problem_flags(p)
    p.add_argument("--exit-verdict", dest="exit_verdict", action="store_true",
                   help="exit 0/3/4 for Solvable/NotSolvable/Boundary")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", help="Galerkin-Newton solve")
    _problem_flags(p)
    _solver_flags(p)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("heat", help="semilinear heat flow and the drift of H(t)")
    _problem_flags(p)
    _solver_flags(p)
    p.add_argument("--dt", type=float)
    p.add_argument("--tend", type=float)
    p.add_argument("--u0", help="initial data in x, y, r, theta (default 0)")
    p.add_argument("--out", help="CSV trace path (columns t,H)")
    p.add_argument("--stable-subspace", dest="stable_subspace", action="store_const", const=True,
                   help="keep only modes with eigenvalue >= lambda_k")
    p.set_defaults(func=cmd_heat)

    p = sub.add_parser("selftest", help="run the invariant suites")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = build_config(args)
        cfg.validate(needs_mode=args.func in (cmd_project, cmd_check, cmd_solve, cmd_heat))
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExprSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ExprDomainError, ArithmeticError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def run() -> None:
    sys.exit(main())
