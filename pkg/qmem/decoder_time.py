"""
Storage capacity under a decoder-time constraint.

A refresh cycle must last at least as long as decoding, ``tau(n) = c1 ln(n)
tau_c + tau_0``, so a larger code waits longer and suffers more noise. The
optimiser maximises the second-order bound along that constraint curve. All
searching happens in ``ln n``, since the feasible range of n can be far
beyond double precision.

Example:
    >>> cfg = OptimizerConfig()
    >>> round(tau_of_n(2.565e6, cfg) * 1e9, 2)
    51.12
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from qmem.bounds import LN_TERM, LOG_TERMS, MODES, POINTWISE_MIN, second_order_from_log_n
from qmem.errors import DomainError, InfeasibleError
from qmem.memory import wait_noise
from qmem.search import count_sign_changes, scan_then_refine

logger = logging.getLogger(__name__)

#: readout time inferred for the reference decoder-time instance
DEFAULT_TAU_0 = 5e-9

GROWTH_LAWS = ("log_n",)

# ln of the largest finite double
_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Parameters of the decoder-time problem. Times are in seconds.

    Example:
        >>> OptimizerConfig(eps=0.7)
        Traceback (most recent call last):
        ...
        qmem.errors.DomainError: eps must lie in (0, 1/2), got 0.7
    """

    c1: float = 10.0
    tau_c: float = field(default=1.0 / 3.2e9, metadata={"unit": "s"})
    tau_0: float = field(default=DEFAULT_TAU_0, metadata={"unit": "s"})
    tau_r: float = field(default=49e-6, metadata={"unit": "s"})
    tau_d: float = field(default=95e-6, metadata={"unit": "s"})
    eps: float = 1e-6
    g: str = "log_n"
    grid_points: int = 2000
    #: absolute tolerance of the refinement, in ln n
    refine_tol: float = 1e-9
    #: feasible ranges beyond this ln n are reported as unbounded
    log_n_ceiling: float = 1e5
    mode: str = POINTWISE_MIN
    #: the blocklength term log(n) / (2n) takes the natural logarithm
    log_term: str = LN_TERM

    def __post_init__(self) -> None:
        for name in ("c1", "tau_c", "tau_0", "tau_r", "tau_d"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.eps < 0.5:
            raise DomainError(f"eps must lie in (0, 1/2), got {self.eps}")
        if self.g not in GROWTH_LAWS:
            raise DomainError(f"growth law must be one of {GROWTH_LAWS}, got {self.g!r}")
        if self.grid_points < 100:
            raise DomainError(f"grid_points must be at least 100, got {self.grid_points}")
        if not self.refine_tol > 0:
            raise DomainError(f"refine_tol must be positive, got {self.refine_tol}")
        if not self.log_n_ceiling > 0:
            raise DomainError(f"log_n_ceiling must be positive, got {self.log_n_ceiling}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.log_term not in LOG_TERMS:
            raise DomainError(f"log_term must be one of {LOG_TERMS}, got {self.log_term!r}")


def _exp_or_inf(log_n: float) -> float:
    return math.exp(log_n) if log_n < _LOG_FLOAT_MAX else math.inf


def tau_of_log_n(log_n: float, cfg: OptimizerConfig) -> float:
    return cfg.c1 * log_n * cfg.tau_c + cfg.tau_0


def tau_of_n(n: float, cfg: OptimizerConfig) -> float:
    """
    Cycle time forced by decoding a code of size `n`.

    Example:
        >>> tau_of_n(1, OptimizerConfig()) == DEFAULT_TAU_0
        True
    """
    if not n >= 1:
        raise DomainError(f"n must be at least 1, got {n}")
    return tau_of_log_n(math.log(n), cfg)


def p_tilde_of_tau(tau: float, cfg: OptimizerConfig) -> float:
    """Depolarizing parameter after a wait of `tau` seconds."""
    return 1.5 * wait_noise(tau, cfg.tau_r, cfg.tau_d)


@dataclass(frozen=True)
class FeasibleRange:
    """Largest feasible code size, as ``ln n_max``."""

    log_n_max: float
    tau_max: float
    flags: Tuple[str, ...] = ()

    @property
    def n_max(self) -> float:
        return _exp_or_inf(self.log_n_max)


def n_max(cfg: OptimizerConfig) -> FeasibleRange:
    """
    Largest n whose cycle time keeps the depolarizing parameter at or below
    1/4, found by root bracketing on the monotone map from time to noise.

    Example:
        >>> fr = n_max(OptimizerConfig())
        >>> fr.log_n_max > math.log(2.565e6), fr.flags
        (True, ())
    """
    quarter = 0.25
    if p_tilde_of_tau(cfg.tau_0, cfg) >= quarter:
        raise InfeasibleError("noise already reaches 1/4 at n = 1")
    tau_ceiling = tau_of_log_n(cfg.log_n_ceiling, cfg)
    if p_tilde_of_tau(tau_ceiling, cfg) <= quarter:
        logger.warning("noise stays below 1/4 up to ln n = %g", cfg.log_n_ceiling)
        return FeasibleRange(cfg.log_n_ceiling, tau_ceiling, ("unbounded",))

    tau_max = brentq(
        lambda t: p_tilde_of_tau(t, cfg) - quarter, cfg.tau_0, tau_ceiling, xtol=1e-30, rtol=1e-15
    )
    log_n_max = (tau_max - cfg.tau_0) / (cfg.c1 * cfg.tau_c)
    while log_n_max > 0 and p_tilde_of_tau(tau_of_log_n(log_n_max, cfg), cfg) > quarter:
        log_n_max = float(np.nextafter(log_n_max, 0.0))
    logger.debug("feasible range ln n <= %r (tau <= %r s)", log_n_max, tau_max)
    return FeasibleRange(log_n_max, tau_of_log_n(log_n_max, cfg))


def objective_from_log_n(log_n: float, cfg: OptimizerConfig) -> float:
    """Second-order bound at ``n = exp(log_n)`` on the constraint curve."""
    p_tilde = p_tilde_of_tau(tau_of_log_n(log_n, cfg), cfg)
    if p_tilde >= 0.25:
        return 0.0
    return second_order_from_log_n(p_tilde, log_n, cfg.eps, cfg.mode, cfg.log_term).value


def objective(n: float, cfg: OptimizerConfig) -> float:
    """
    Example:
        >>> round(objective(2.565e6, OptimizerConfig()), 4)
        0.9927
    """
    if not n >= 1:
        raise DomainError(f"n must be at least 1, got {n}")
    return objective_from_log_n(math.log(n), cfg)


@dataclass(frozen=True)
class OptimizerResult:
    """
    Optimum of the decoder-time problem. `trace` holds the scanned
    ``(ln n, objective)`` pairs and `certificate` the refinement brackets in
    ln n.
    """

    n_star: float
    log_n_star: float
    tau_star: float
    q_star: float
    p_tilde_star: float
    log_n_max: float
    trace: Tuple[Tuple[float, float], ...] = field(repr=False)
    certificate: Tuple[Tuple[float, float], ...] = field(repr=False)
    flags: Tuple[str, ...] = ()

    def to_dict(self, with_trace: bool = False) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "n_star": self.n_star,
            "log_n_star": self.log_n_star,
            "tau_star_ns": self.tau_star * 1e9,
            "q_star": self.q_star,
            "p_tilde_star": self.p_tilde_star,
            "log_n_max": self.log_n_max,
            "refinement_steps": len(self.certificate),
            "flags": list(self.flags),
        }
        if with_trace:
            out["trace"] = [{"log_n": x, "q_so": y} for x, y in self.trace]
        return out


def _integer_optimum(
    log_n: float, log_n_max: float, cfg: OptimizerConfig
) -> Tuple[float, float, float]:
    """Better of floor and ceil of ``exp(log_n)`` inside the feasible range."""
    n_cont = _exp_or_inf(log_n)
    n_top = _exp_or_inf(log_n_max)
    if n_cont > 2.0**53:
        return n_cont, log_n, objective_from_log_n(log_n, cfg)
    candidates = {max(1, math.floor(n_cont)), max(1, math.ceil(n_cont))}
    if n_top < 2.0**53:
        candidates = {min(c, max(1, math.floor(n_top))) for c in candidates}
    best: Optional[Tuple[float, float, float]] = None
    for n in sorted(candidates):
        log_c = math.log(n)
        value = objective_from_log_n(log_c, cfg)
        if best is None or value > best[2]:
            best = (float(n), log_c, value)
    assert best is not None
    return best


def optimize(cfg: OptimizerConfig) -> OptimizerResult:
    """
    Global maximum of the second-order bound along the constraint curve.

    A uniform grid in ln n over the feasible range certifies the best cell;
    golden section search refines inside it, and the continuous optimum is
    rounded to the better neighbouring integer.
    """
    feasible = n_max(cfg)
    flags = list(feasible.flags)
    if cfg.tau_0 == DEFAULT_TAU_0:
        flags.append("tau_0_inferred")
    if feasible.log_n_max <= 0:
        raise InfeasibleError("the feasible range holds only n = 1")
    grid = np.linspace(0.0, feasible.log_n_max, cfg.grid_points)
    logger.debug("scanning %d points over ln n in [0, %r]", grid.size, feasible.log_n_max)
    values = np.array([objective_from_log_n(float(x), cfg) for x in grid])
    refined, _ = scan_then_refine(
        lambda x: objective_from_log_n(x, cfg), grid, tol=cfg.refine_tol, values=values
    )
    best_index = int(np.argmax(values))
    if best_index == grid.size - 1:
        logger.warning("optimum sits at the end of the feasible range")
        flags.append("boundary")
    if count_sign_changes(values, atol=1e-15) > 1:
        logger.warning("objective is not unimodal along the constraint curve")
        flags.append("multimodal")

    n_star, log_n_star, q_star = _integer_optimum(refined.x, feasible.log_n_max, cfg)
    tau_star = tau_of_log_n(log_n_star, cfg)
    logger.info("decoder-time optimum n*=%g, tau*=%g s, Q*=%r", n_star, tau_star, q_star)
    return OptimizerResult(
        n_star=n_star,
        log_n_star=log_n_star,
        tau_star=tau_star,
        q_star=q_star,
        p_tilde_star=p_tilde_of_tau(tau_star, cfg),
        log_n_max=feasible.log_n_max,
        trace=tuple(zip(grid.tolist(), values.tolist())),
        certificate=refined.history,
        flags=tuple(flags),
    )


def _q_so(n: float, tau: float, cfg: OptimizerConfig) -> float:
    p_tilde = p_tilde_of_tau(tau, cfg)
    if p_tilde >= 0.25:
        return 0.0
    return second_order_from_log_n(p_tilde, math.log(n), cfg.eps, cfg.mode, cfg.log_term).value


Resolution = Union[int, Tuple[int, int]]


def contour_grid(
    cfg: OptimizerConfig,
    n_range: Tuple[float, float],
    tau_range: Tuple[float, float],
    resolution: Resolution = 50,
) -> List[Tuple[float, float, float]]:
    """
    ``(n, tau, Q_so)`` on a grid log-spaced in n and linear in tau, rows
    ordered by n then tau.

    Example:
        >>> rows = contour_grid(OptimizerConfig(), (1e3, 1e6), (20e-9, 60e-9), 2)
        >>> [(n, round(t * 1e9)) for n, t, _ in rows]
        [(1000.0, 20), (1000.0, 60), (1000000.0, 20), (1000000.0, 60)]
    """
    nx, ny = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nx < 2 or ny < 2:
        raise DomainError(f"need at least two points per axis, got {nx}x{ny}")
    if not (1 <= n_range[0] < n_range[1]):
        raise DomainError(f"n range must be increasing and start at 1 or more, got {n_range}")
    if not (0 < tau_range[0] < tau_range[1]):
        raise DomainError(f"tau range must be positive and increasing, got {tau_range}")
    ns = np.geomspace(n_range[0], n_range[1], nx)
    taus = np.linspace(tau_range[0], tau_range[1], ny)
    return [(float(n), float(t), _q_so(float(n), float(t), cfg)) for n in ns for t in taus]


def constraint_curve(
    cfg: OptimizerConfig, n_values: Sequence[float]
) -> List[Tuple[float, float, float, float]]:
    """``(n, tau(n), p_tilde(tau(n)), Q_so)`` along the constraint curve."""
    rows = []
    for n in n_values:
        tau = tau_of_n(float(n), cfg)
        rows.append((float(n), tau, p_tilde_of_tau(tau, cfg), objective(float(n), cfg)))
    return rows
