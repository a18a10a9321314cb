"""
One-dimensional maximisation shared by the decoder-time optimiser and the
classical bound: a dense grid scan to locate the global cell, then golden
section search inside the neighbouring cells.

Example:
    >>> res = golden_section_max(lambda x: -(x - 2.0) ** 2, 0.0, 5.0, tol=1e-9)
    >>> round(res.x, 6)
    2.0
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from qmem.errors import DomainError

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class GoldenResult:
    x: float
    value: float
    #: successive (lo, hi) brackets, outermost first
    history: Tuple[Tuple[float, float], ...] = field(default=(), repr=False)


def grid_argmax(values: Sequence[float]) -> int:
    """
    Index of the largest finite value; the first one wins on ties.

    Example:
        >>> grid_argmax([0.0, 3.0, 1.0, 3.0])
        1
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise DomainError("cannot take the argmax of an empty grid")
    masked = np.where(np.isfinite(arr), arr, -np.inf)
    return int(np.argmax(masked))


def golden_section_max(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> GoldenResult:
    """
    Maximise a unimodal `func` on ``[lo, hi]`` to an absolute bracket width
    of `tol`.
    """
    if not hi >= lo:
        raise DomainError(f"bracket [{lo}, {hi}] is empty")
    history: List[Tuple[float, float]] = [(lo, hi)]
    dist = hi - lo
    if dist <= tol:
        x = 0.5 * (lo + hi)
        return GoldenResult(x, float(func(x)), tuple(history))

    c = lo + INV_PHI_SQ * dist
    d = lo + INV_PHI * dist
    fc = func(c)
    fd = func(d)
    for _ in range(max_iter):
        if dist <= tol:
            break
        # the smaller interior value bounds the side the maximum cannot be on
        if fc >= fd:
            hi, d, fd = d, c, fc
            dist = hi - lo
            c = lo + INV_PHI_SQ * dist
            fc = func(c)
        else:
            lo, c, fc = c, d, fd
            dist = hi - lo
            d = lo + INV_PHI * dist
            fd = func(d)
        history.append((lo, hi))
    else:
        logger.warning("golden section stopped after %d iterations", max_iter)

    x, fx = (c, fc) if fc >= fd else (d, fd)
    logger.debug("golden section converged to %r after %d brackets", x, len(history))
    return GoldenResult(float(x), float(fx), tuple(history))


def scan_then_refine(
    func: Callable[[float], float],
    grid: Sequence[float],
    tol: float = 1e-10,
    values: Optional[Sequence[float]] = None,
) -> Tuple[GoldenResult, np.ndarray]:
    """
    Evaluate `func` on `grid`, then refine between the neighbours of the best
    grid point. The grid point is kept unless refinement strictly improves it.

    Returns the refined result and the sampled values. Values already
    computed in bulk can be passed as `values`.

    Example:
        >>> res, ys = scan_then_refine(lambda x: -abs(x - 0.3), [0.0, 0.25, 0.5, 1.0])
        >>> round(res.x, 6), len(ys)
        (0.3, 4)
    """
    xs = np.asarray(grid, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise DomainError("grid must hold at least two strictly increasing points")
    if values is None:
        ys = np.array([func(float(x)) for x in xs])
    else:
        ys = np.asarray(values, dtype=float)
        if ys.shape != xs.shape:
            raise DomainError(f"{ys.size} values for a grid of {xs.size} points")
    best = grid_argmax(ys)
    lo = xs[max(best - 1, 0)]
    hi = xs[min(best + 1, xs.size - 1)]
    logger.debug("refining around grid index %d in [%r, %r]", best, lo, hi)
    refined = golden_section_max(func, float(lo), float(hi), tol=tol)
    if refined.value > ys[best]:
        return refined, ys
    return GoldenResult(float(xs[best]), float(ys[best]), refined.history), ys


def count_sign_changes(values: Sequence[float], atol: float = 0.0) -> int:
    """
    Number of sign changes of the discrete differences of `values`, ignoring
    steps no larger than `atol`. A unimodal sequence has at most one.

    Example:
        >>> count_sign_changes([0, 1, 2, 1, 0])
        1
        >>> count_sign_changes([0, 2, 1, 3])
        2
    """
    steps = np.diff(np.asarray(values, dtype=float))
    signs = np.sign(steps[np.abs(steps) > atol])
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))
