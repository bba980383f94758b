"""Batch front-end: ``fvie {solve,converge,oracle,verify-bounds,dump-rule}``.

Exit status
-----------
0  success
1  unexpected internal error
2  usage error (bad flag, malformed number, unknown problem or config key)
3  non-convergence or inner numeric failure
4  invariant violation: fuzzy validity, kernel positivity, breakpoint order,
   singular system, failed bound or agreement check
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import report
from .collocation import CollocationConfig, convergence_study, discrete_residual, node_error, solve
from .errors import (AssemblyError, BreakpointOrderError, DomainError, FuzzyValidityError,
                     GridMismatchError, NonConvergenceError, NumericFailureError,
                     PositivityViolationError, ProblemNotFoundError, SingularSystemError)
from .picard import (PicardConfig, estimate_lipschitz, oracle_agreement,
                     picard_solve, sup_distance, tail_bound, verify_contraction)
from .problems import estimate_kernel_sup, registry_get, registry_names

log = logging.getLogger("fvie")

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_NONCONVERGENCE, EXIT_VIOLATION = 0, 1, 2, 3, 4
COMMANDS = ("solve", "converge", "oracle", "verify-bounds", "dump-rule")
DISCRETIZATION_SLACK = 1e-5


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: Optional[str] = None
    N: int = 8
    quad_N: Optional[int] = None
    levels: int = 11
    segment_mode: str = "default"
    tol: float = 1e-10
    max_iters: int = 200
    out: Optional[str] = None
    format: str = "json"
    threads: int = 1
    orders: tuple = (2, 4, 6, 8)
    kernel_scale: float = 1.0
    arithmetic: str = "levelwise"
    grid_N: int = 16

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("threads")
        d["orders"] = list(self.orders)
        return d


# config key -> converter; keys match RunConfig fields (dashes also accepted)
_CONVERTERS = {
    "problem": str,
    "N": int,
    "quad_N": int,
    "levels": int,
    "segment_mode": str,
    "tol": float,
    "max_iters": int,
    "out": str,
    "format": str,
    "threads": int,
    "orders": lambda s: tuple(int(v) for v in s.split(",") if v.strip()),
    "kernel_scale": float,
    "arithmetic": str,
    "grid_N": int,
}
_CHOICES = {"segment_mode": ("default", "paper"), "format": ("csv", "json"),
            "arithmetic": ("levelwise", "fuzzy")}


def read_config_file(path) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = _convert(key, value, f"{path}:{lineno}")
    return out


def _convert(key, value, where):
    try:
        v = _CONVERTERS[key](value)
    except ValueError:
        raise UsageError(f"{where}: malformed value for {key}: {value!r}") from None
    if key in _CHOICES and v not in _CHOICES[key]:
        raise UsageError(f"{where}: {key} must be one of {', '.join(_CHOICES[key])}")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    d = RunConfig(command="solve")
    common = _Parser(add_help=False)
    g = common.add_argument_group("run options")
    g.add_argument("--config", metavar="FILE", help="flat key=value file; flags override it")
    g.add_argument("--problem", help=f"registered problem: {', '.join(registry_names())}")
    g.add_argument("--N", type=str, help=f"collocation order (default {d.N}); for dump-rule the rule order")
    g.add_argument("--quad-N", dest="quad_N", type=str, help="quadrature order (default: N)")
    g.add_argument("--levels", type=str, help=f"number of alpha levels (default {d.levels})")
    g.add_argument("--segment-mode", dest="segment_mode", type=str,
                   help="segment limits: default integrates segment p over [a_{p-1}, a_p]; "
                        "paper integrates every segment from the lower domain edge to a_p "
                        "(default default)")
    g.add_argument("--tol", type=str, help=f"iteration tolerance (default {d.tol:g})")
    g.add_argument("--max-iters", dest="max_iters", type=str,
                   help=f"fixed-point / Picard iteration cap (default {d.max_iters})")
    g.add_argument("--out", help="output file (default stdout)")
    g.add_argument("--format", type=str, help=f"csv or json (default {d.format})")
    g.add_argument("--threads", type=str, help="worker threads for converge (default 1)")
    g.add_argument("--orders", type=str, help="comma list of orders for converge (default 2,4,6,8)")
    g.add_argument("--kernel-scale", dest="kernel_scale", type=str,
                   help="multiply every kernel by this factor (default 1)")
    g.add_argument("--arithmetic", type=str,
                   help="levelwise or fuzzy coefficient arithmetic (default levelwise)")
    g.add_argument("--grid-N", dest="grid_N", type=str,
                   help=f"Picard evaluation grid order (default {d.grid_N})")
    parser = _Parser(prog="fvie", description=(
        "Solve 2-D fuzzy Volterra integral equations with piecewise kernels. "
        "Exit codes: 0 ok, 2 usage, 3 non-convergence, 4 invariant violation, 1 other. "
        "Set FVIE_LOG=DEBUG|INFO|WARNING for diagnostics on stderr."))
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    helps = {"solve": "collocation solve, writes node values",
             "converge": "error table over several orders",
             "oracle": "compare collocation with the Picard limit",
             "verify-bounds": "check measured Picard contraction against the a-priori bound",
             "dump-rule": "print Chebyshev nodes and the Gauss-Legendre rule of order N"}
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Command line (and optional ``--config`` file) to a validated RunConfig."""
    ns = build_parser().parse_args(list(argv))
    if ns.command is None:
        raise UsageError(f"a command is required: {', '.join(COMMANDS)}")
    values = read_config_file(ns.config) if ns.config else {}
    for key in _CONVERTERS:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = _convert(key, v, f"--{key.replace('_', '-')}") if isinstance(v, str) else v
    cfg = RunConfig(command=ns.command, **values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.command != "dump-rule" and not cfg.problem:
        raise UsageError(f"{cfg.command}: --problem is required")
    checks = [(cfg.N >= 0, "N must be >= 0"),
              (cfg.quad_N is None or cfg.quad_N >= 0, "quad-N must be >= 0"),
              (cfg.levels >= 2, "levels must be >= 2"),
              (cfg.tol > 0, "tol must be > 0"),
              (cfg.max_iters >= 1, "max-iters must be >= 1"),
              (cfg.threads >= 1, "threads must be >= 1"),
              (cfg.grid_N >= 1, "grid-N must be >= 1"),
              (np.isfinite(cfg.kernel_scale), "kernel-scale must be finite"),
              (all(o >= 0 for o in cfg.orders), "orders must be >= 0")]
    for ok, msg in checks:
        if not ok:
            raise UsageError(msg)
    if cfg.command == "converge" and len(set(cfg.orders)) < 2:
        raise UsageError("converge needs at least two distinct orders")


# -- commands -----------------------------------------------------------------

def _spec(cfg: RunConfig):
    return registry_get(cfg.problem, levels=cfg.levels, kernel_scale=cfg.kernel_scale)


def _collocation(cfg: RunConfig, N: int | None = None) -> CollocationConfig:
    return CollocationConfig(N=cfg.N if N is None else N, quad_N=cfg.quad_N,
                             segment_mode=cfg.segment_mode, max_fixed_point_iters=cfg.max_iters,
                             fixed_point_tol=cfg.tol, arithmetic=cfg.arithmetic)


def _picard(cfg: RunConfig, min_iters: int = 0) -> PicardConfig:
    quad = max(24, cfg.quad_N or 0)
    return PicardConfig(quad_N=quad, grid_N=cfg.grid_N, max_iters=cfg.max_iters,
                        tol=cfg.tol, min_iters=min_iters)


def _cmd_solve(cfg, meta):
    spec = _spec(cfg)
    sol = solve(spec, _collocation(cfg))
    res = discrete_residual(spec, sol)
    payload = {"command": "solve", "config": cfg.to_dict(),
               "max_node_error": node_error(spec, sol) if spec.exact_solution else None,
               "max_residual": float(np.max(res)),
               "diagnostics": sol.diagnostics,
               "solution": sol.grid.to_dict()}
    if cfg.format == "json":
        return report.to_json(payload), EXIT_OK
    return report.to_csv(report.SOLUTION_HEADER, report.solution_rows(sol.grid)), EXIT_OK


def _cmd_converge(cfg, meta):
    spec = _spec(cfg)
    rows = convergence_study(spec, cfg.orders, _collocation(cfg, cfg.orders[0]),
                             threads=cfg.threads)
    meta["runtime_ms"] = {str(r.N): r.runtime_ms for r in rows}
    if cfg.format == "json":
        text = report.to_json({"command": "converge", "config": cfg.to_dict(),
                               "rows": [{"N": r.N, "error": r.error, "iterations": r.iterations,
                                         "status": r.status} for r in rows]})
    else:
        text = report.to_csv(report.CONVERGENCE_HEADER, report.convergence_rows(rows))
    status = EXIT_OK if all(r.status == "ok" for r in rows) else EXIT_NONCONVERGENCE
    return text, status


def _cmd_oracle(cfg, meta):
    spec = _spec(cfg)
    estimate_kernel_sup(spec)  # positivity gate
    pcfg = _picard(cfg)
    coll = _collocation(cfg)
    sol = solve(spec, coll)
    first = picard_solve(spec, pcfg)
    second = picard_solve(spec, pcfg, z0="zero")
    agreement = oracle_agreement(first, sol)
    gap = sup_distance(first.grid, second.grid)
    threshold = max(10 * pcfg.tol, 10 * coll.fixed_point_tol) + DISCRETIZATION_SLACK
    ok = agreement <= threshold and gap <= 2 * pcfg.tol
    if cfg.format == "json":
        text = report.to_json({
            "command": "oracle", "config": cfg.to_dict(),
            "agreement": agreement, "agreement_threshold": threshold,
            "uniqueness_gap": gap, "uniqueness_threshold": 2 * pcfg.tol,
            "picard_iterations": first.iterations, "picard_iterations_from_zero": second.iterations,
            "picard_distances": first.trace.distances, "ok": ok})
    else:
        text = first.trace.to_csv()
    if not ok:
        log.error("oracle check failed: agreement %.3e (limit %.3e), uniqueness gap %.3e",
                  agreement, threshold, gap)
    return text, EXIT_OK if ok else EXIT_VIOLATION


def _cmd_verify_bounds(cfg, meta):
    spec = _spec(cfg)
    m_list = estimate_kernel_sup(spec)
    result = picard_solve(spec, _picard(cfg, min_iters=11))
    L = estimate_lipschitz(spec, result.trace)
    rep = verify_contraction(result.trace, m_list, L, spec=spec)
    c = sum(rep.M_list) * L * 4.0
    if cfg.format == "json":
        text = report.to_json({
            "command": "verify-bounds", "config": cfg.to_dict(),
            "M_list": rep.M_list, "lipschitz": L, "extent": list(rep.extent),
            "contraction_constant": c, "re_estimated": rep.re_estimated,
            "rows": [dataclasses.asdict(r) for r in rep.rows],
            "tail_bound_n50_q5": tail_bound(rep.M_list, L, 2.0, 2.0, 50, 5,
                                            result.trace.distances[0]),
            "ok": rep.ok})
    else:
        text = rep.to_csv()
    for r in rep.violations:
        log.error("bound violated at k=%d: measured %.3e > bound %.3e", r.k, r.measured, r.bound)
    return text, EXIT_OK if rep.ok else EXIT_VIOLATION


def _cmd_dump_rule(cfg, meta):
    if cfg.format == "json":
        return report.to_json(report.rule_payload(cfg.N)), EXIT_OK
    return report.to_csv(report.RULE_HEADER, report.rule_rows(cfg.N)), EXIT_OK


_HANDLERS = {"solve": _cmd_solve, "converge": _cmd_converge, "oracle": _cmd_oracle,
             "verify-bounds": _cmd_verify_bounds, "dump-rule": _cmd_dump_rule}

_EXIT_FOR = [
    (ProblemNotFoundError, EXIT_USAGE),
    ((NonConvergenceError, NumericFailureError), EXIT_NONCONVERGENCE),
    ((FuzzyValidityError, PositivityViolationError, BreakpointOrderError, SingularSystemError,
      AssemblyError, DomainError, GridMismatchError), EXIT_VIOLATION),
]


def exit_code_for(exc: BaseException) -> int:
    for types, code in _EXIT_FOR:
        if isinstance(exc, types):
            return code
    return EXIT_ERROR


def run(cfg: RunConfig) -> int:
    """Execute one command; writes the report and returns the exit status."""
    meta = {"command": cfg.command, "problem": cfg.problem,
            "python": platform.python_version(), "numpy": np.__version__}
    t0 = time.perf_counter()
    try:
        text, status = _HANDLERS[cfg.command](cfg, meta)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        code = exit_code_for(exc)
        if code == EXIT_ERROR:
            log.exception("internal error")
        print(f"fvie {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    report.emit(text, cfg.out)
    meta["total_runtime_ms"] = 1000.0 * (time.perf_counter() - t0)
    meta["exit_status"] = status
    report.write_meta(cfg.out, meta)
    return status


def _setup_logging():
    level = os.environ.get("FVIE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
