"""
Command-line entry point: ``qmem <command> <action> [options]``.

Results go to stdout (or ``--out``) as JSON; figure tables are written as
CSV. Exit status is 0 on success, 2 for invalid input and 3 when a
computation is infeasible or a reproduction check falls outside tolerance.
"""

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Type, TypeVar

from qmem import __version__
from qmem.bounds import (
    LOG2_TERM,
    LOG_TERMS,
    MODES,
    POINTWISE_MIN,
    depolarizing_capacity_ub,
    depolarizing_dissipation_ub,
    one_shot_bound,
    second_order_bound,
)
from qmem.classical import (
    NEW,
    OLD,
    classical_point,
    classical_ub,
    compare_bounds,
    delta_h_star,
    max_gap_alpha,
)
from qmem.codes import (
    BUILTIN_CODES,
    DISTANCE_BUDGET,
    BbPolynomial,
    CssCode,
    bb_code,
    builtin_code,
    hypergraph_product,
    steane_code,
)
from qmem.config import load_record, read_json
from qmem.decoder_time import OptimizerConfig, constraint_curve, contour_grid, optimize
from qmem.errors import CapacityError, ConfigError, InfeasibleError, QmemError
from qmem.gf2 import BinaryMatrix
from qmem.memory import (
    ExpanderFamilyConstants,
    bb_complexity,
    bb_logical_error,
    bb_multi_cycle_error,
    depolarizing_from_local_stochastic,
    expander_complexity,
    expander_logical_error,
    expander_threshold,
    multi_cycle_error,
)
from qmem.sim import SimConfig, simulate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILED = 3


class ReproductionFailure(QmemError):
    """A reproduced number fell outside its tolerance."""


R = TypeVar("R")

CODE_FAMILIES = ("hgp", "bb", "steane", "builtin")
#: "expander" names the same hypergraph-product family as "hgp"
MEMORY_FAMILIES = ("hgp", "expander", "bb")


@dataclass(frozen=True)
class CodeOptions:
    """Options of ``code build`` and ``code export``; ``--params`` keys use these names."""

    family: Optional[str] = None
    h: Optional[str] = None
    l: Optional[int] = None
    m: Optional[int] = None
    a: Optional[str] = None
    b: Optional[str] = None
    labeled_distance: Optional[int] = None
    name: Optional[str] = None
    distance_budget: int = DISTANCE_BUDGET

    def __post_init__(self) -> None:
        if self.family is None:
            raise ConfigError("give --family or a 'family' key in --params")
        if self.family not in CODE_FAMILIES:
            raise ConfigError(f"family must be one of {CODE_FAMILIES}, got {self.family!r}")


@dataclass(frozen=True)
class RateOptions:
    """Options of ``memory rate``; ``--params`` keys use these names."""

    family: str = "hgp"
    d_a: int = 7
    d_b: int = 8
    n_a: Optional[int] = None
    n_b: Optional[int] = None
    n: int = 144
    k: int = 12

    def __post_init__(self) -> None:
        if self.family not in MEMORY_FAMILIES:
            raise ConfigError(f"family must be one of {MEMORY_FAMILIES}, got {self.family!r}")


def _options(args: argparse.Namespace, cls: Type[R]) -> R:
    """The record `cls` from the command-line flags, overlaid by ``--params``."""
    given: Dict[str, Any] = {f.name: getattr(args, f.name) for f in dataclasses.fields(cls)}
    if args.params is not None:
        given.update(read_json(args.params))
    return load_record(cls, given)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _dump_json(obj: Any, out: Optional[str]) -> None:
    text = json.dumps(_jsonable(obj), indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
        logger.info("wrote %s", out)


def _dump_csv(fieldnames: Sequence[str], rows: Iterable[Sequence[Any]], out: Optional[str]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    if out is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(out).write_text(buf.getvalue(), encoding="utf-8")
        logger.info("wrote %s", out)


def _matrix_arg(text: str) -> BinaryMatrix:
    """Rows of '0'/'1' separated by commas, semicolons or newlines."""
    rows = [r.strip() for r in text.replace(";", ",").replace("\n", ",").split(",") if r.strip()]
    if not rows:
        raise ConfigError("empty check matrix")
    return BinaryMatrix(rows)


# -- code ---------------------------------------------------------------------


def _build_code(opts: CodeOptions) -> CssCode:
    budget = opts.distance_budget
    if opts.family == "hgp":
        if opts.h is None:
            raise ConfigError("--family hgp needs --h")
        return hypergraph_product(_matrix_arg(opts.h), distance_budget=budget)
    if opts.family == "bb":
        missing = [name for name in ("l", "m", "a", "b") if getattr(opts, name) is None]
        if missing:
            raise ConfigError(f"--family bb needs {', '.join('--' + m for m in missing)}")
        return bb_code(
            opts.l,
            opts.m,
            BbPolynomial.parse(opts.a),
            BbPolynomial.parse(opts.b),
            labeled_distance=opts.labeled_distance,
        )
    if opts.family == "steane":
        return steane_code(distance_budget=budget)
    if opts.name is None:
        raise ConfigError("--family builtin needs --name")
    return builtin_code(opts.name)


def cmd_code_build(args: argparse.Namespace) -> int:
    _dump_json(_build_code(_options(args, CodeOptions)).certificate(), args.out)
    return EXIT_OK


def cmd_code_export(args: argparse.Namespace) -> int:
    code = _build_code(_options(args, CodeOptions))
    _dump_json(
        {"label": code.label, "h_x": code.h_x.to_text(), "h_z": code.h_z.to_text()}, args.out
    )
    return EXIT_OK


def load_code(source: str) -> CssCode:
    """A built-in code name, or a JSON file with ``h_x``/``h_z`` text blocks."""
    if source in BUILTIN_CODES:
        return builtin_code(source)
    data = read_json(source)
    unknown = set(data) - {"h_x", "h_z", "label"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in code file")
    try:
        h_x, h_z = data["h_x"], data["h_z"]
    except KeyError as exc:
        raise ConfigError(f"code file lacks {exc.args[0]!r}")
    return CssCode(
        BinaryMatrix.from_text(h_x), BinaryMatrix.from_text(h_z), label=data.get("label", "")
    )


# -- memory -------------------------------------------------------------------


def _consts(args: argparse.Namespace) -> ExpanderFamilyConstants:
    return ExpanderFamilyConstants(args.d_a, args.d_b, args.gamma, args.delta)


def cmd_memory_rate(args: argparse.Namespace) -> int:
    opts = _options(args, RateOptions)
    if opts.family == "bb":
        breakdown = bb_complexity(opts.n, opts.k)
    else:
        breakdown = expander_complexity(opts.n_a, opts.n_b, d_A=opts.d_a, d_B=opts.d_b)
    _dump_json(breakdown.to_dict(), args.out)
    return EXIT_OK


def cmd_memory_pe(args: argparse.Namespace) -> int:
    out: Dict[str, Any]
    if args.family == "bb":
        pe = bb_logical_error(args.p, args.d_circ)
        out = {"pe": pe, "log10_pe": math.log10(pe) if pe > 0 else -math.inf, "flags": []}
        if args.storage_time_s is not None:
            out["log10_pe_total"] = bb_multi_cycle_error(
                args.p, args.d_circ, args.storage_time_s, args.cycle_time_ns * 1e-9
            )
    else:
        if args.n is None:
            raise ConfigError(f"--family {args.family} needs --n")
        bound = expander_logical_error(args.n, args.p, args.p_r, _consts(args))
        out = bound.to_dict()
        if args.storage_time_s is not None:
            out["log10_pe_total"] = multi_cycle_error(
                bound.log10_pe, args.storage_time_s, args.cycle_time_ns * 1e-9
            )
    _dump_json(out, args.out)
    return EXIT_OK


def cmd_memory_threshold(args: argparse.Namespace) -> int:
    _dump_json(_consts(args).to_dict(), args.out)
    return EXIT_OK


# -- bounds -------------------------------------------------------------------


def cmd_bounds_upper(args: argparse.Namespace) -> int:
    if args.zeta is None:
        res = depolarizing_capacity_ub(args.p_tilde, args.mode)
    else:
        res = depolarizing_dissipation_ub(args.p_tilde, args.zeta, args.mode)
    _dump_json(res.to_dict(), args.out)
    return EXIT_OK


def cmd_bounds_second_order(args: argparse.Namespace) -> int:
    res = second_order_bound(args.p_tilde, args.n, args.eps, args.mode, args.log_term)
    _dump_json(res.to_dict(), args.out)
    return EXIT_OK


def cmd_bounds_one_shot(args: argparse.Namespace) -> int:
    _dump_json(one_shot_bound(args.q_cap, args.n, args.eps).to_dict(), args.out)
    return EXIT_OK


# -- optimize / classical / simulate -------------------------------------------


def _optimizer_config(args: argparse.Namespace) -> OptimizerConfig:
    if args.config is None:
        return OptimizerConfig()
    return load_record(OptimizerConfig, read_json(args.config))


def cmd_optimize(args: argparse.Namespace) -> int:
    result = optimize(_optimizer_config(args))
    _dump_json(result.to_dict(with_trace=args.trace), args.out)
    return EXIT_OK


def cmd_classical_ub(args: argparse.Namespace) -> int:
    if args.variant is None:
        p = classical_point(args.alpha)
        out: Dict[str, Any] = {
            "alpha": p.alpha,
            "p_star": p.p_star,
            "delta_h_star": p.delta_h_star,
            "ub_new": p.ub_new,
            "ub_old": p.ub_old,
            "gap": p.gap,
        }
    else:
        out = {
            "alpha": args.alpha,
            "variant": args.variant,
            "ub": classical_ub(args.alpha, args.variant),
        }
    _dump_json(out, args.out)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = SimConfig(
        code=load_code(args.code),
        p_tilde=args.p_tilde,
        q=args.q,
        cycles=args.cycles,
        trials=args.trials,
        seed=args.seed,
    )
    _dump_json(simulate(cfg).to_dict(), args.out)
    return EXIT_OK


# -- emit ---------------------------------------------------------------------


def cmd_emit_fig2(args: argparse.Namespace) -> int:
    cfg = _optimizer_config(args)
    rows = contour_grid(
        cfg,
        (args.n_min, args.n_max),
        (args.tau_min_ns * 1e-9, args.tau_max_ns * 1e-9),
        args.resolution,
    )
    _dump_csv(("n", "tau_ns", "q_so"), ((n, t * 1e9, q) for n, t, q in rows), args.out)
    if args.curve_out is not None:
        ns = [float(n) for n, _, _ in rows[:: args.resolution]]
        curve = constraint_curve(cfg, ns)
        _dump_csv(
            ("n", "tau_ns", "p_tilde", "q_so"),
            ((n, t * 1e9, p, q) for n, t, p, q in curve),
            args.curve_out,
        )
    return EXIT_OK


def cmd_emit_fig3(args: argparse.Namespace) -> int:
    points = compare_bounds(args.grid)
    _dump_csv(
        ("alpha", "p_star", "delta_h_star", "ub_new", "ub_old", "gap"),
        ((p.alpha, p.p_star, p.delta_h_star, p.ub_new, p.ub_old, p.gap) for p in points),
        args.out,
    )
    return EXIT_OK


# -- reproduce ----------------------------------------------------------------


def _check(
    name: str, value: float, expected: float, tol: float, relative: bool = False
) -> Dict[str, Any]:
    err = abs(value - expected) / abs(expected) if relative else abs(value - expected)
    return {
        "name": name,
        "value": value,
        "expected": expected,
        "tolerance": tol,
        "relative": relative,
        "pass": bool(err <= tol),
    }


def _bracket(name: str, value: float, lo: float, hi: float) -> Dict[str, Any]:
    return {"name": name, "value": value, "range": [lo, hi], "pass": bool(lo <= value <= hi)}


def reference_report() -> Dict[str, Any]:
    """Recompute the headline numbers of the storage-capacity comparison."""
    consts = ExpanderFamilyConstants(7, 8)
    rate = expander_complexity(d_A=7, d_B=8).storage_rate
    p_th = expander_threshold(consts)
    bb = bb_complexity(144, 12)
    gross = builtin_code("gross")
    pe_bb = bb_logical_error(1e-3, 10)
    q_so = second_order_bound(1e-3, 144, pe_bb).value
    asym = depolarizing_dissipation_ub(depolarizing_from_local_stochastic(p_th), 0.0)
    opt = optimize(OptimizerConfig())
    dh0 = delta_h_star(0.0)
    dh_half = delta_h_star(0.5)
    fig3 = compare_bounds(500)
    max_gap_at = max_gap_alpha(fig3)

    checks: List[Dict[str, Any]] = [
        _check("expander_rate", float(rate), 0.0004246, 1e-7),
        _check("expander_threshold", p_th, 2.212e-19, 0.01, relative=True),
        _check("bb_chi", bb.chi, 1728, 0),
        _check("bb_rate", float(bb.storage_rate), 0.006944, 1e-6),
        _check("gross_n", gross.n, 144, 0),
        _check("gross_k", gross.k, 12, 0),
        _check("bb_logical_error", pe_bb, 2.3639e-7, 1e-3, relative=True),
        _check("second_order_bound", q_so, 0.8813, 2e-3),
        _bracket("dissipation_deficit", asym.deficit, 2e-17, 8e-17),
        _check("optimizer_n_star", opt.n_star, 2.565e6, 0.05, relative=True),
        _check("optimizer_tau_star_ns", opt.tau_star * 1e9, 51.12, 0.02, relative=True),
        _check("optimizer_q_star", opt.q_star, 0.99273207, 1e-6),
        _check("delta_h_star_0_p", dh0[0], 0.0, 1e-6),
        _check("delta_h_star_0_value", dh0[1], math.log2(3.0), 1e-6),
        _check("delta_h_star_half_p", dh_half[0], 0.25, 1e-6),
        _check("delta_h_star_half_value", dh_half[1], 1.0, 1e-6),
        _bracket("classical_max_gap_alpha", max_gap_at, 0.0, 0.2),
        {
            "name": "classical_new_dominates_old",
            "pass": all(p.ub_new >= p.ub_old - 1e-12 for p in fig3),
        },
    ]
    informational = {
        "asymptotic_gap": asym.value - float(rate),
        "asymptotic_upper_deficit": asym.deficit,
        "non_asymptotic_gap": q_so - float(bb.storage_rate),
        "optimizer_flags": list(opt.flags),
    }
    return {
        "checks": checks,
        "informational": informational,
        "pass": all(c["pass"] for c in checks),
    }


def cmd_reproduce(args: argparse.Namespace) -> int:
    report = reference_report()
    _dump_json(report, args.out)
    if not report["pass"]:
        failed = [c["name"] for c in report["checks"] if not c["pass"]]
        raise ReproductionFailure(f"out of tolerance: {', '.join(failed)}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _add_code_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=CODE_FAMILIES)
    p.add_argument("--params", help="JSON object or path with the same option names")
    p.add_argument("--h", help="classical check rows, e.g. '110,011'")
    p.add_argument("--l", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--a", help="polynomial such as 'x^3+y+y^2'")
    p.add_argument("--b")
    p.add_argument("--labeled-distance", type=int)
    p.add_argument("--name", choices=sorted(BUILTIN_CODES))
    p.add_argument("--distance-budget", type=int, default=DISTANCE_BUDGET)


def _add_expander_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d-a", type=int, default=7)
    p.add_argument("--d-b", type=int, default=8)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=1e-5)


def _subcommands(
    parent: argparse._SubParsersAction, name: str, help: str
) -> argparse._SubParsersAction:
    p = parent.add_parser(name, help=help)
    sub = p.add_subparsers(dest="action", metavar="ACTION")
    sub.required = True
    return sub


def _leaf(
    parent: argparse._SubParsersAction, name: str, func: Callable[[argparse.Namespace], int], help: str
) -> argparse.ArgumentParser:
    p = parent.add_parser(name, help=help)
    p.add_argument("--out", help="write to this path instead of stdout")
    p.set_defaults(func=func)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmem", description="Storage capacity of quantum memories."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    code = _subcommands(commands, "code", "construct and certify CSS codes")
    _add_code_options(_leaf(code, "build", cmd_code_build, "print the certified parameters"))
    _add_code_options(_leaf(code, "export", cmd_code_export, "print the check matrices"))

    memory = _subcommands(commands, "memory", "storage rate and logical error of a memory")
    p = _leaf(memory, "rate", cmd_memory_rate, "complexity and storage rate of one cycle")
    p.add_argument("--family", choices=MEMORY_FAMILIES, default="hgp")
    p.add_argument("--params", help="JSON object or path with the same option names")
    p.add_argument("--d-a", type=int, default=7)
    p.add_argument("--d-b", type=int, default=8)
    p.add_argument("--n-a", type=int)
    p.add_argument("--n-b", type=int)
    p.add_argument("--n", type=int, default=144)
    p.add_argument("--k", type=int, default=12)
    p = _leaf(memory, "pe", cmd_memory_pe, "logical error bound")
    p.add_argument("--family", choices=MEMORY_FAMILIES, default="hgp")
    p.add_argument("--n", type=float)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--p-r", type=float, default=0.0)
    p.add_argument("--d-circ", type=int, default=10)
    p.add_argument("--storage-time-s", type=float)
    p.add_argument("--cycle-time-ns", type=float, default=1000.0)
    _add_expander_options(p)
    p = _leaf(memory, "threshold", cmd_memory_threshold, "expander family constants")
    _add_expander_options(p)

    bounds = _subcommands(commands, "bounds", "capacity upper bounds")
    p = _leaf(bounds, "upper", cmd_bounds_upper, "asymptotic bound")
    p.add_argument("--p-tilde", type=float, required=True)
    p.add_argument("--zeta", type=float, help="refresh noise; omit for the capacity bound")
    p.add_argument("--mode", choices=MODES, default=POINTWISE_MIN)
    p = _leaf(bounds, "second-order", cmd_bounds_second_order, "finite blocklength bound")
    p.add_argument("--p-tilde", type=float, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--mode", choices=MODES, default=POINTWISE_MIN)
    p.add_argument("--log-term", choices=LOG_TERMS, default=LOG2_TERM)
    p = _leaf(bounds, "one-shot", cmd_bounds_one_shot, "one-shot bound")
    p.add_argument("--q-cap", type=float, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)

    opt = _subcommands(commands, "optimize", "optimisers")
    p = _leaf(opt, "decoder-time", cmd_optimize, "best code size under a decoder-time constraint")
    p.add_argument("--config", help="JSON object or path, keys as in OptimizerConfig")
    p.add_argument("--trace", action="store_true", help="include the scanned objective")

    classical = _subcommands(commands, "classical", "classical storage bounds")
    p = _leaf(classical, "ub", cmd_classical_ub, "bound at one flip probability")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--variant", choices=(NEW, OLD))

    p = commands.add_parser("simulate", help="Monte Carlo of noisy memory cycles")
    p.add_argument("--code", required=True, help=f"JSON file or one of {sorted(BUILTIN_CODES)}")
    p.add_argument("--p-tilde", type=float, required=True)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--cycles", type=int, default=1)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    emit = _subcommands(commands, "emit", "figure tables as CSV")
    p = _leaf(emit, "fig2", cmd_emit_fig2, "bound over code size and cycle time")
    p.add_argument("--config")
    p.add_argument("--n-min", type=float, default=1e2)
    p.add_argument("--n-max", type=float, default=1e10)
    p.add_argument("--tau-min-ns", type=float, default=10.0)
    p.add_argument("--tau-max-ns", type=float, default=100.0)
    p.add_argument("--resolution", type=int, default=60)
    p.add_argument("--curve-out", help="also write the constraint curve here")
    p = _leaf(emit, "fig3", cmd_emit_fig3, "old and new classical bounds")
    p.add_argument("--grid", type=int, default=500)

    reproduce = _subcommands(commands, "reproduce", "recompute reference numbers")
    _leaf(reproduce, "section7", cmd_reproduce, "storage capacity comparison")
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (InfeasibleError, CapacityError, ReproductionFailure) as exc:
        logger.error("%s", exc)
        return EXIT_FAILED
    except ValueError as exc:
        logger.error("%s", exc)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
