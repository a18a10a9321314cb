"""
Converse bounds on quantum storage capacity.

Rates are in qubits per circuit component. Every bound is returned as a
`BoundResult` that records which formula or branch produced it, so a reported
number can always be traced back. Bounds close to one also carry their
`deficit` (one minus the value) computed without cancellation, since numbers
like ``1 - 4e-17`` do not survive double precision.

Example:
    >>> res = depolarizing_capacity_ub(0.05)
    >>> res.branch, round(res.value, 4)
    ('degradable-ext', 0.7093)
    >>> round(second_order_bound(1e-3, 144, 2.3639e-7).value, 4)
    0.8813
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr, log_ndtr, ndtr, ndtri, xlog1py

from qmem.errors import DimensionError, DomainError

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

HASHING = "hashing"
DEGRADABLE_EXT = "degradable-ext"
NO_CLONING = "no-cloning"
SECOND_ORDER = "second-order"
DISSIPATION = "dissipation"
ONE_SHOT = "one-shot"
BRANCHES = (HASHING, DEGRADABLE_EXT, NO_CLONING, SECOND_ORDER, DISSIPATION, ONE_SHOT)

POINTWISE_MIN = "pointwise_min"
CONVEX_ENVELOPE = "convex_envelope"
MODES = (POINTWISE_MIN, CONVEX_ENVELOPE)

#: logarithm used in the log(n) / (2n) term of the second-order bound
LOG2_TERM = "log2"
LN_TERM = "ln"
LOG_TERMS = (LOG2_TERM, LN_TERM)

#: default number of grid points for the convex-envelope mode
ENVELOPE_GRID = 4096

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class BoundResult:
    """
    A bound value with the branch that produced it and the inputs used.

    Example:
        >>> BoundResult(0.25, "no-cloning", {"p_tilde": 0.1875}).deficit
        0.75
    """

    value: float
    branch: str
    inputs: Dict[str, Any] = field(default_factory=dict, compare=False)
    flags: Tuple[str, ...] = ()
    deficit: Optional[float] = None

    def __post_init__(self) -> None:
        if self.branch not in BRANCHES:
            raise DomainError(f"unknown branch {self.branch!r}")
        if not self.value >= 0:
            raise DomainError(f"bound value must be nonnegative, got {self.value}")
        if self.deficit is None:
            object.__setattr__(self, "deficit", 1.0 - self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "deficit": self.deficit,
            "branch": self.branch,
            "inputs": dict(self.inputs),
            "flags": list(self.flags),
        }


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def _check_log_term(log_term: str) -> None:
    if log_term not in LOG_TERMS:
        raise DomainError(f"log_term must be one of {LOG_TERMS}, got {log_term!r}")


def _scalar_or_array(x: np.ndarray) -> Union[float, np.ndarray]:
    return float(x) if x.ndim == 0 else x


# -- entropies ----------------------------------------------------------------


def binary_entropy(x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Binary entropy in bits, elementwise.

    Example:
        >>> binary_entropy(0.5)
        1.0
        >>> binary_entropy([0.0, 0.25]).round(4).tolist()
        [0.0, 0.8113]
    """
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)):
        raise DomainError(f"binary entropy needs arguments in [0, 1], got {x!r}")
    # -(1 - x) ln(1 - x) through log1p keeps the O(x) term for tiny x
    return _scalar_or_array((entr(arr) - xlog1py(1.0 - arr, -arr)) / LN2)


def _one_minus_h2_half_plus(t: float) -> float:
    """``1 - h2(1/2 + t)`` for ``|t| <= 1/2`` without cancellation."""
    return float((xlog1py(1 + 2 * t, 2 * t) + xlog1py(1 - 2 * t, -2 * t)) / (2 * LN2))


def entropy(probs: Sequence[float]) -> float:
    """
    Shannon entropy in bits of a probability vector, with ``0 log 0 = 0``.

    Example:
        >>> entropy([0.5, 0.5])
        1.0
        >>> entropy([0.5, 0.6])
        Traceback (most recent call last):
        ...
        qmem.errors.DomainError: probabilities sum to 1.1, not 1
    """
    arr = np.asarray(probs, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError("entropy needs a nonempty 1-D probability vector")
    if np.any(arr < 0):
        raise DomainError(f"probabilities must be nonnegative, got {arr.tolist()}")
    total = float(arr.sum())
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"probabilities sum to {total:.6g}, not 1")
    return float(entr(arr).sum() / LN2)


def gamma_fn(p_tilde: float) -> float:
    """
    ``4 (sqrt(1 - p) - 1 + p)``, evaluated as ``4 p s / (1 + s)`` with
    ``s = sqrt(1 - p)`` so tiny arguments keep their precision.

    Example:
        >>> round(gamma_fn(0.25), 5)
        0.4641
        >>> gamma_fn(1e-20)
        2e-20
    """
    _check_unit(p_tilde, "p_tilde")
    s = math.sqrt(1.0 - p_tilde)
    return 4.0 * p_tilde * s / (1.0 + s)


def _check_unit(x: float, name: str, hi: float = 1.0) -> None:
    if not 0.0 <= x <= hi:
        raise DomainError(f"{name} must lie in [0, {hi:g}], got {x}")


# -- depolarizing channel -----------------------------------------------------


def _branch_values(p_tilde: float) -> List[Tuple[str, float, float]]:
    """(branch, value, deficit) for the three asymptotic capacity branches."""
    h = float(binary_entropy(p_tilde))
    g = gamma_fn(p_tilde)
    degradable_deficit = _one_minus_h2_half_plus(g / 2) + float(binary_entropy(g / 2))
    return [
        (HASHING, 1.0 - h, h),
        (DEGRADABLE_EXT, 1.0 - degradable_deficit, degradable_deficit),
        (NO_CLONING, 1.0 - 4.0 * p_tilde, 4.0 * p_tilde),
    ]


def _pick_min(branches: List[Tuple[str, float, float]]) -> Tuple[str, float, float]:
    # earliest branch wins ties
    return min(branches, key=lambda b: b[1])


def _pointwise_min_curve(grid: np.ndarray, branch_fn: Any) -> np.ndarray:
    return np.array([_pick_min(branch_fn(float(p)))[1] for p in grid])


def _envelope_at(p_tilde: float, branch_fn: Any, grid_points: int) -> float:
    grid = np.union1d(np.linspace(0.0, 0.25, grid_points), [p_tilde])
    env = convex_envelope(grid, _pointwise_min_curve(grid, branch_fn))
    return float(env[np.searchsorted(grid, p_tilde)])


def depolarizing_capacity_ub(
    p_tilde: float, mode: str = POINTWISE_MIN, grid_points: int = ENVELOPE_GRID
) -> BoundResult:
    """
    Upper bound on the quantum capacity of the depolarizing channel, built
    from the hashing, degradable-extension and no-cloning branches.

    The default mode takes their pointwise minimum; ``convex_envelope``
    returns the lower convex envelope of that minimum over ``[0, 1/4]``,
    sampled on `grid_points` points plus the query point.

    Example:
        >>> depolarizing_capacity_ub(0.0).value
        1.0
        >>> depolarizing_capacity_ub(0.25).value
        0.0
        >>> res = depolarizing_capacity_ub(3.318e-19)
        >>> res.branch, round(res.deficit * 1e17, 3)
        ('hashing', 2.085)
    """
    _check_unit(p_tilde, "p_tilde", hi=0.25)
    _check_mode(mode)
    branch, value, deficit = _pick_min(_branch_values(p_tilde))
    inputs = {"p_tilde": p_tilde, "mode": mode}
    flags: Tuple[str, ...] = ()
    if mode == CONVEX_ENVELOPE:
        env = _envelope_at(p_tilde, _branch_values, grid_points)
        if env < value - 1e-15:
            flags = ("hull_chord",)
            value, deficit = env, 1.0 - env
    if value < 0:
        value, deficit, flags = 0.0, 1.0, flags + ("clamped",)
    return BoundResult(max(value, 0.0), branch, inputs, flags, deficit)


def envelope_converged(p_tilde: float, grid_points: int = ENVELOPE_GRID, tol: float = 1e-6) -> bool:
    """
    Whether doubling the envelope grid moves the envelope bound at `p_tilde`
    by less than `tol`.
    """
    coarse = depolarizing_capacity_ub(p_tilde, CONVEX_ENVELOPE, grid_points).value
    fine = depolarizing_capacity_ub(p_tilde, CONVEX_ENVELOPE, 2 * grid_points).value
    logger.debug("envelope at %r: %r (grid %d) vs %r", p_tilde, coarse, grid_points, fine)
    return abs(coarse - fine) < tol


# -- entropy dissipation ------------------------------------------------------


def dissipation_entropy(U: int, zeta: float) -> float:
    """
    Entropy dissipated by a zeta-noisy projective measurement with `U`
    outcomes: ``log2 U - H(1 + zeta - U zeta, zeta, ..., zeta)``.

    Example:
        >>> dissipation_entropy(2, 0.0)
        1.0
        >>> dissipation_entropy(2, 0.5)
        0.0
        >>> round(dissipation_entropy(2, 0.1), 4)
        0.531
    """
    if int(U) != U or U < 2:
        raise DomainError(f"U must be an integer >= 2, got {U}")
    if not 0.0 <= zeta <= 1.0 / U:
        raise DomainError(f"zeta must lie in [0, 1/{U}], got {zeta}")
    if zeta == 1.0 / U:
        return 0.0
    head = 1.0 + zeta - U * zeta
    h = (float(entr(head)) + (U - 1) * float(entr(zeta))) / LN2
    return max(0.0, math.log2(U) - h)


def dissipation_bound(
    q_cap: float,
    U: int = 2,
    zeta: float = 0.0,
    log_dim: float = 1.0,
    q_deficit: Optional[float] = None,
) -> BoundResult:
    """
    Storage capacity bound ``Q H / (log_dim + H - Q)`` from a communication
    capacity `q_cap` and the dissipation entropy ``H`` of the refresh
    measurement. ``log_dim = 1`` is the qubit case; larger values give the
    qudit variant. `q_deficit` (``1 - q_cap``) lets a deficit computed
    upstream flow through without cancellation.

    Example:
        >>> dissipation_bound(1.0).value
        1.0
        >>> round(dissipation_bound(0.5).value, 12)
        0.333333333333
        >>> dissipation_bound(1.0, zeta=0.5).flags
        ('degenerate',)
    """
    _check_unit(q_cap, "q_cap")
    if log_dim < 1:
        raise DomainError(f"log_dim must be at least 1, got {log_dim}")
    h = dissipation_entropy(U, zeta)
    d = 1.0 - q_cap if q_deficit is None else q_deficit
    inputs = {"q_cap": q_cap, "U": U, "zeta": zeta, "log_dim": log_dim, "h_dis": h}
    denominator = (log_dim - 1.0) + h + d
    if denominator <= 0:
        logger.warning("dissipation bound degenerate at q_cap=%r, H=%r", q_cap, h)
        return BoundResult(0.0, DISSIPATION, inputs, ("degenerate",), 1.0)
    value = q_cap * h / denominator
    deficit = ((log_dim - 1.0) + d * (1.0 + h)) / denominator
    return BoundResult(value, DISSIPATION, inputs, (), deficit)


def depolarizing_dissipation_ub(
    p_tilde: float, zeta: float, mode: str = POINTWISE_MIN
) -> BoundResult:
    """
    Storage capacity bound for depolarizing storage with a binary
    zeta-noisy refresh: the capacity bound fed through `dissipation_bound`.

    Example:
        >>> res = depolarizing_dissipation_ub(3.318e-19, 0.0)
        >>> round(res.deficit * 1e17, 2)
        4.17
    """
    _check_unit(p_tilde, "p_tilde", hi=0.25)
    _check_unit(zeta, "zeta", hi=0.5)
    cap = depolarizing_capacity_ub(p_tilde, mode)
    res = dissipation_bound(cap.value, 2, zeta, q_deficit=cap.deficit)
    inputs = dict(res.inputs, p_tilde=p_tilde, capacity_branch=cap.branch, mode=mode)
    return BoundResult(res.value, DISSIPATION, inputs, cap.flags + res.flags, res.deficit)


def storage_to_communication_ratio(q_cap: float, zeta: float = 0.0, U: int = 2) -> float:
    """
    Ratio of the dissipation bound to the communication capacity itself;
    tends to 1/2 as `q_cap` goes to zero for a perfect binary refresh.

    Example:
        >>> storage_to_communication_ratio(0.0)
        0.5
        >>> storage_to_communication_ratio(1.0)
        1.0
    """
    _check_unit(q_cap, "q_cap")
    h = dissipation_entropy(U, zeta)
    denominator = 1.0 + h - q_cap
    if denominator <= 0:
        return 0.0
    return h / denominator


# -- finite blocklength -------------------------------------------------------


def inverse_normal_cdf(eps: float) -> float:
    """
    Quantile of the standard normal distribution.

    Starts from ``scipy.special.ndtri`` and takes Newton steps on the log
    CDF below the median, so tail quantiles stay accurate down to 1e-300.

    Example:
        >>> inverse_normal_cdf(0.5)
        0.0
        >>> round(inverse_normal_cdf(1e-6), 6)
        -4.753424
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    x = float(ndtri(eps))
    if eps < 0.5:
        log_eps = math.log(eps)
        for _ in range(2):
            log_cdf = float(log_ndtr(x))
            log_pdf = -0.5 * x * x - 0.5 * math.log(2 * math.pi)
            x -= (log_cdf - log_eps) / math.exp(log_pdf - log_cdf)
    elif eps > 0.5:
        for _ in range(2):
            pdf = math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
            x -= (float(ndtr(x)) - eps) / pdf
    return x


def dephasing_dispersion(p_tilde: float) -> float:
    """
    Dispersion ``p (1 - p) log2((1 - p) / p)**2`` of the qubit dephasing
    channel, in bits squared.

    Example:
        >>> dephasing_dispersion(0.5)
        0.0
        >>> round(dephasing_dispersion(1e-3), 5)
        0.09919
    """
    _check_unit(p_tilde, "p_tilde")
    if p_tilde in (0.0, 1.0):
        return 0.0
    log_ratio = (math.log1p(-p_tilde) - math.log(p_tilde)) / LN2
    return p_tilde * (1.0 - p_tilde) * log_ratio * log_ratio


def _second_order_branches(
    p_tilde: float, log_n: float, eps: float, log_term: str = LOG2_TERM
) -> List[Tuple[str, float, float]]:
    asymptotic = _branch_values(p_tilde)
    h = asymptotic[0][2]
    root = math.sqrt(dephasing_dispersion(p_tilde)) * math.exp(-0.5 * log_n)
    log_size = log_n / LN2 if log_term == LOG2_TERM else log_n
    correction = root * inverse_normal_cdf(eps) + log_size * 0.5 * math.exp(-log_n)
    first_deficit = h - correction
    return [(SECOND_ORDER, 1.0 - first_deficit, first_deficit)] + asymptotic[1:]


def second_order_from_log_n(
    p_tilde: float,
    log_n: float,
    eps: float,
    mode: str = POINTWISE_MIN,
    log_term: str = LOG2_TERM,
) -> BoundResult:
    """`second_order_bound` with the blocklength given as ``ln n``."""
    if not 0.0 < p_tilde <= 0.25:
        raise DomainError(f"p_tilde must lie in (0, 1/4], got {p_tilde}")
    if not log_n >= 0:
        raise DomainError(f"n must be at least 1, got ln n = {log_n}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    _check_mode(mode)
    _check_log_term(log_term)
    branches = _second_order_branches(p_tilde, log_n, eps, log_term)
    _, value, deficit = _pick_min(branches)
    inputs = {"p_tilde": p_tilde, "log_n": log_n, "eps": eps, "mode": mode, "log_term": log_term}
    flags: Tuple[str, ...] = ()
    if mode == CONVEX_ENVELOPE:
        env = _envelope_at(
            p_tilde,
            lambda p: _second_order_branches(max(p, 1e-300), log_n, eps, log_term),
            ENVELOPE_GRID,
        )
        if env < value - 1e-15:
            flags = ("hull_chord",)
            value, deficit = env, 1.0 - env
    if value < 0:
        return BoundResult(0.0, SECOND_ORDER, inputs, flags + ("clamped",), 1.0)
    return BoundResult(value, SECOND_ORDER, inputs, flags, deficit)


def second_order_bound(
    p_tilde: float,
    n: float,
    eps: float,
    mode: str = POINTWISE_MIN,
    log_term: str = LOG2_TERM,
) -> BoundResult:
    """
    Second-order converse at blocklength `n` and infidelity `eps`.

    The hashing branch receives the normal-approximation correction
    ``sqrt(V / n) Phi^-1(eps) + log2(n) / (2n)``; the other two asymptotic
    branches still cap it. Negative values clamp to zero with a flag.
    ``log_term="ln"`` takes the natural logarithm in the last term.

    Example:
        >>> round(second_order_bound(5.297e-4, 2.565e6, 1e-6).value, 5)
        0.99273
        >>> round(second_order_bound(5.297e-4, 2.565e6, 1e-6, log_term="ln").value, 6)
        0.992731
        >>> second_order_bound(0.2, 1, 1e-6).flags
        ('clamped',)
    """
    if not n >= 1:
        raise DomainError(f"n must be at least 1, got {n}")
    res = second_order_from_log_n(p_tilde, math.log(n), eps, mode, log_term)
    inputs = dict(res.inputs, n=n)
    return BoundResult(res.value, res.branch, inputs, res.flags, res.deficit)


def one_shot_bound(q_cap: float, n: float, eps: float) -> BoundResult:
    """
    ``(Q + h2(eps) / n) / (1 - 2 eps)``; may exceed one, which is flagged
    rather than clamped.

    Example:
        >>> res = one_shot_bound(1.0, 1, 0.25)
        >>> round(res.value, 4), res.flags
        (3.6226, ('exceeds_one',))
    """
    _check_unit(q_cap, "q_cap")
    if not n >= 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if not 0.0 <= eps < 0.5:
        raise DomainError(f"eps must lie in [0, 1/2), got {eps}")
    value = (q_cap + float(binary_entropy(eps)) / n) / (1.0 - 2.0 * eps)
    flags = ("exceeds_one",) if value > 1 else ()
    return BoundResult(value, ONE_SHOT, {"q_cap": q_cap, "n": n, "eps": eps}, flags)


# -- convex envelope ----------------------------------------------------------


def _cross(o: Tuple[float, float], a: Tuple[float, float], b: Tuple[float, float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_envelope(xs: Sequence[float], ys: Sequence[float]) -> np.ndarray:
    """
    Greatest convex minorant of the points ``(xs, ys)``, evaluated on `xs`.

    Uses the lower half of Andrew's monotone chain.

    Example:
        >>> convex_envelope([0, 1, 2], [0, 1, 0]).tolist()
        [0.0, 0.0, 0.0]
        >>> convex_envelope([0, 1, 2], [1, 0, 1]).tolist()
        [1.0, 0.0, 1.0]
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 2:
        raise DimensionError("need matching 1-D xs and ys with at least two points")
    if np.any(np.diff(x) <= 0):
        raise DomainError("xs must be strictly increasing")
    hull: List[Tuple[float, float]] = []
    for point in zip(x.tolist(), y.tolist()):
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], point) <= 0:
            hull.pop()
        hull.append(point)
    hx, hy = zip(*hull)
    return np.interp(x, hx, hy)
