"""
Upper bounds on the classical storage capacity of a memory whose components
each flip their bit with probability `alpha`.

The refined bound maximises the entropy dissipated by a noisy gate over its
input distribution instead of fixing the input to be uniform.

Example:
    >>> p, dh = delta_h_star(0.5)
    >>> round(p, 6), round(dh, 9)
    (0.25, 1.0)
    >>> round(classical_ub(0.1, "old"), 3)
    0.374
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from qmem.bounds import binary_entropy
from qmem.errors import DomainError
from qmem.search import scan_then_refine

logger = logging.getLogger(__name__)

LOG2_3 = math.log2(3.0)

#: points of the coarse scan over the input parameter
INPUT_GRID = 1024

#: absolute tolerance on the maximising input parameter
INPUT_TOL = 1e-10

NEW = "new"
OLD = "old"


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 0.5:
        raise DomainError(f"alpha must lie in [0, 1/2], got {alpha}")


def bsc_capacity(alpha: float) -> float:
    """
    Capacity ``1 - h2(alpha)`` of the binary symmetric channel, the default
    per-component capacity.
    """
    return 1.0 - float(binary_entropy(alpha))


def delta_h(alpha: float, p: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Entropy dissipated when a gate with input distribution
    ``(p, (1-p)/3, (1-p)/3, (1-p)/3)`` produces a bit that is one with
    probability ``alpha + p - 2 alpha p``.

    Example:
        >>> round(delta_h(0.0, 0.0), 5)
        1.58496
        >>> round(delta_h(0.5, 0.25), 12)
        1.0
    """
    _check_alpha(alpha)
    arr = np.asarray(p, dtype=float)
    if np.any((arr < 0) | (arr > 1)):
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    value = (
        binary_entropy(arr)
        + (1.0 - arr) * LOG2_3
        - binary_entropy(alpha + arr - 2.0 * alpha * arr)
    )
    return float(value) if np.ndim(value) == 0 else value


def delta_h_star(alpha: float) -> Tuple[float, float]:
    """
    Maximum of `delta_h` over the input parameter, as ``(p_star, value)``.

    A 1024-point scan of ``[0, 1]`` is refined by golden section search to
    1e-10 in p.

    Example:
        >>> delta_h_star(0.0) == (0.0, LOG2_3)
        True
    """
    _check_alpha(alpha)
    grid = np.linspace(0.0, 1.0, INPUT_GRID)
    best, _ = scan_then_refine(
        lambda p: float(delta_h(alpha, p)),
        grid,
        tol=INPUT_TOL,
        values=delta_h(alpha, grid),
    )
    return best.x, best.value


@dataclass(frozen=True)
class ClassicalBoundPoint:
    alpha: float
    p_star: float
    delta_h_star: float
    ub_new: float
    ub_old: float

    @property
    def gap(self) -> float:
        return self.ub_new - self.ub_old


def _ratio_bound(capacity: float, h: float, dissipated: float) -> float:
    if capacity == 0:
        return 0.0
    return capacity / (1.0 + h / dissipated)


def classical_ub(
    alpha: float,
    variant: str = NEW,
    capacity: Callable[[float], float] = bsc_capacity,
) -> float:
    """
    Classical storage capacity bound ``C / (1 + h2(alpha) / dH)``.

    The ``new`` variant takes ``dH`` as the maximised dissipation
    `delta_h_star`; ``old`` takes the uniform-input value
    ``2 - h2(alpha/2 + 1/4)``.

    Example:
        >>> classical_ub(0.0), classical_ub(0.5, "old")
        (1.0, 0.0)
    """
    _check_alpha(alpha)
    if variant == NEW:
        dissipated = delta_h_star(alpha)[1]
    elif variant == OLD:
        dissipated = 2.0 - float(binary_entropy(alpha / 2.0 + 0.25))
    else:
        raise DomainError(f"variant must be {NEW!r} or {OLD!r}, got {variant!r}")
    return _ratio_bound(capacity(alpha), float(binary_entropy(alpha)), dissipated)


def classical_point(
    alpha: float, capacity: Callable[[float], float] = bsc_capacity
) -> ClassicalBoundPoint:
    p_star, dh_star = delta_h_star(alpha)
    c = capacity(alpha)
    h = float(binary_entropy(alpha))
    ub_old = _ratio_bound(c, h, 2.0 - float(binary_entropy(alpha / 2.0 + 0.25)))
    return ClassicalBoundPoint(alpha, p_star, dh_star, _ratio_bound(c, h, dh_star), ub_old)


def compare_bounds(
    grid: int = 500, capacity: Callable[[float], float] = bsc_capacity
) -> List[ClassicalBoundPoint]:
    """
    Old and new bounds on `grid` evenly spaced values of alpha in ``[0, 1/2]``.

    Example:
        >>> pts = compare_bounds(3)
        >>> [(p.alpha, round(p.ub_old, 4)) for p in pts]
        [(0.0, 1.0), (0.25, 0.1063), (0.5, 0.0)]
    """
    if grid < 2:
        raise DomainError(f"need at least two grid points, got {grid}")
    logger.debug("evaluating classical bounds on %d points", grid)
    return [classical_point(float(a), capacity) for a in np.linspace(0.0, 0.5, grid)]


def max_gap_alpha(points: Sequence[ClassicalBoundPoint]) -> float:
    """Alpha at which the new bound improves most on the old one."""
    gaps = [p.gap for p in points]
    return points[int(np.argmax(gaps))].alpha
