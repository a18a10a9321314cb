"""
Circuit-complexity accounting, storage rates and logical-error formulas for
memories built from repeated wait-refresh cycles.

Probability bounds that can underflow are handled as base-10 logarithms:
``log10_pe = -53.1`` stands for ``P_e <= 10**-53.1``.

Example:
    >>> expander_complexity(d_A=7, d_B=8).storage_rate
    Fraction(1, 2355)
    >>> consts = ExpanderFamilyConstants(d_A=7, d_B=8)
    >>> f"{expander_threshold(consts):.2e}"
    '2.21e-19'
"""

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple

from qmem.bounds import binary_entropy
from qmem.errors import DimensionError, DomainError, InfeasibleError

logger = logging.getLogger(__name__)

LOG10_2 = math.log10(2.0)

#: relative distance to the threshold below which results are flagged
NEAR_THRESHOLD = 1e-6

# cycle counts are rounded up after shaving this relative slack off T / tau
_CYCLE_SLACK = 1e-12


def _check_probability(x: float, name: str) -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {x}")


# -- parameter records --------------------------------------------------------


@dataclass(frozen=True)
class ExpanderFamilyConstants:
    """
    Constants of a hypergraph-product expander family with bit degree `d_A`,
    check degree `d_B` and expansion parameters `gamma`, `delta`.

    Example:
        >>> c = ExpanderFamilyConstants(d_A=7, d_B=8)
        >>> c.d, round(c.alpha, 6), round(c.c0, 2)
        (160, 0.151095, 57.15)
    """

    d_A: int
    d_B: int
    gamma: float = 2.0
    delta: float = 1e-5

    def __post_init__(self) -> None:
        if self.d_A < 1 or self.d_B < 1:
            raise DomainError(f"degrees must be positive, got d_A={self.d_A}, d_B={self.d_B}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 <= self.delta < 1.0 / 16:
            raise DomainError(f"delta must lie in [0, 1/16), got {self.delta}")

    @property
    def d(self) -> int:
        return self.d_B**2 + 2 * self.d_B * (self.d_A - 1)

    @property
    def r(self) -> float:
        return self.d_A / self.d_B

    @property
    def beta0(self) -> float:
        return 1.0 - 8.0 * self.delta

    @property
    def beta1(self) -> float:
        return 1.0 - 16.0 * self.delta

    @property
    def beta(self) -> float:
        return 0.99 * self.beta1

    @property
    def gamma0(self) -> float:
        r = self.r
        return r * r * self.gamma / math.sqrt(1.0 + r * r)

    @property
    def alpha(self) -> float:
        rb = self.r * self.beta
        return rb / (4.0 + 2.0 * rb)

    @property
    def c0(self) -> float:
        return 4.0 / (self.d_A * (self.beta1 - self.beta))

    @property
    def h_alpha(self) -> float:
        return float(binary_entropy(self.alpha))

    @property
    def c_prime(self) -> float:
        return self.alpha * self.gamma0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d_A": self.d_A,
            "d_B": self.d_B,
            "gamma": self.gamma,
            "delta": self.delta,
            "d": self.d,
            "r": self.r,
            "beta": self.beta,
            "gamma0": self.gamma0,
            "alpha": self.alpha,
            "c0": self.c0,
            "h_alpha": self.h_alpha,
            "c_prime": self.c_prime,
            "p_th": expander_threshold(self),
        }


@dataclass(frozen=True)
class NoiseModel:
    """
    Local stochastic parameters of a memory: `p` on data qubits, `q` on the
    refresh, the residual `p_r` left by the decoder with its constant `K`,
    and the relaxation and dephasing times that drive `p` during a wait.
    """

    p: float = 0.0
    q: float = 0.0
    p_r: float = 0.0
    K: float = 1.0
    tau_r: float = field(default=49e-6, metadata={"unit": "s"})
    tau_d: float = field(default=95e-6, metadata={"unit": "s"})

    def __post_init__(self) -> None:
        for name in ("p", "q", "p_r"):
            _check_probability(getattr(self, name), name)
        if self.K <= 0:
            raise DomainError(f"K must be positive, got {self.K}")
        if self.tau_r <= 0 or self.tau_d <= 0:
            raise DomainError("relaxation and dephasing times must be positive")

    @property
    def p_tilde(self) -> float:
        """Depolarizing parameter matching `p`."""
        return depolarizing_from_local_stochastic(self.p)

    def after_wait(self, tau: float) -> "NoiseModel":
        return replace(self, p=wait_noise(tau, self.tau_r, self.tau_d))

    def with_residual(self, consts: ExpanderFamilyConstants) -> "NoiseModel":
        return replace(self, p_r=min(1.0, residual_noise(self.q, consts, self.K)))


def depolarizing_from_local_stochastic(p: float) -> float:
    """
    Example:
        >>> depolarizing_from_local_stochastic(0.5)
        0.75
    """
    _check_probability(p, "p")
    return 1.5 * p


def local_stochastic_from_depolarizing(p_tilde: float) -> float:
    _check_probability(p_tilde, "p_tilde")
    return 2.0 * p_tilde / 3.0


# -- complexity ---------------------------------------------------------------


@dataclass(frozen=True)
class ComplexityBreakdown:
    """
    Component counts of one wait-refresh cycle: data qubits `n`, ancillas
    `n_a`, Hadamards `n_H`, syndrome CNOTs `n_synd`, measurements `n_m` and
    correction gates `n_EC`.
    """

    n: int
    k: int
    n_a: int
    n_H: int
    n_synd: int
    n_m: int
    n_EC: int
    flags: Tuple[str, ...] = ()

    @property
    def chi_g(self) -> int:
        return self.n_H + self.n_synd + self.n_EC

    @property
    def chi(self) -> int:
        return self.n + self.n_a + self.chi_g + self.n_m

    @property
    def storage_rate(self) -> Fraction:
        return Fraction(self.k, self.chi)

    @property
    def overhead(self) -> float:
        """Components per logical qubit; infinite when nothing is stored."""
        return math.inf if self.k == 0 else self.chi / self.k

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "k": self.k,
            "n_a": self.n_a,
            "n_H": self.n_H,
            "n_synd": self.n_synd,
            "n_m": self.n_m,
            "n_EC": self.n_EC,
            "chi_g": self.chi_g,
            "chi": self.chi,
            "storage_rate": float(self.storage_rate),
            "storage_rate_exact": str(self.storage_rate),
            "overhead": self.overhead,
            "flags": list(self.flags),
        }


def design_rates(d_A: int, d_B: int) -> Tuple[Fraction, Fraction]:
    """
    Design rates ``(R_c, R)`` of the classical code and of its hypergraph
    product.

    Example:
        >>> design_rates(7, 8)
        (Fraction(1, 8), Fraction(1, 113))
    """
    if not 1 <= d_A <= d_B:
        raise DomainError(f"need 1 <= d_A <= d_B, got d_A={d_A}, d_B={d_B}")
    r_c = 1 - Fraction(d_A, d_B)
    r = Fraction((d_B - d_A) ** 2, d_B**2 + d_A**2)
    return r_c, r


def closed_form_rate(d_A: int, d_B: int) -> Fraction:
    """
    ``1 / (3/R + (3 + d_A + d_B)(2/R_c)(1/R_c - 1))``, the storage rate of
    the expander family in closed form.
    """
    r_c, r = design_rates(d_A, d_B)
    if r == 0:
        return Fraction(0)
    return 1 / (3 / r + (3 + d_A + d_B) * (2 / r_c) * (1 / r_c - 1))


def expander_complexity(
    n_A: Optional[int] = None, n_B: Optional[int] = None, *, d_A: int, d_B: int
) -> ComplexityBreakdown:
    """
    Complexity of one cycle of the hypergraph-product expander memory built
    from a ``(d_A, d_B)``-biregular graph with `n_A` bits and `n_B` checks.
    The smallest consistent sizes ``n_A = d_B``, ``n_B = d_A`` are used when
    none are given.

    Example:
        >>> c = expander_complexity(2, 1, d_A=1, d_B=2)
        >>> c.k, c.n, c.chi
        (1, 5, 39)
    """
    if n_A is None and n_B is None:
        n_A, n_B = d_B, d_A
    if n_A is None or n_B is None:
        raise DomainError("give both n_A and n_B or neither")
    if not 1 <= d_A <= d_B:
        raise DomainError(f"need 1 <= d_A <= d_B, got d_A={d_A}, d_B={d_B}")
    if n_B < 1 or n_A < n_B:
        raise DomainError(f"need n_A >= n_B >= 1, got n_A={n_A}, n_B={n_B}")
    if n_A * d_A != n_B * d_B:
        raise DimensionError(
            f"a biregular graph needs n_A*d_A == n_B*d_B, got {n_A * d_A} != {n_B * d_B}"
        )
    pairs = 2 * n_A * n_B
    breakdown = ComplexityBreakdown(
        n=n_A**2 + n_B**2,
        k=(n_A - n_B) ** 2,
        n_a=pairs,
        n_H=pairs,
        n_synd=pairs * (d_A + d_B),
        n_m=pairs,
        n_EC=2 * (n_A**2 + n_B**2),
    )
    if d_A == d_B:
        logger.warning("d_A == d_B gives a zero-rate expander family")
        return replace(breakdown, flags=("degenerate",))
    closed = closed_form_rate(d_A, d_B)
    if closed != breakdown.storage_rate:
        raise ArithmeticError(
            f"component sum rate {breakdown.storage_rate} disagrees with closed form {closed}"
        )
    return breakdown


def bb_complexity(n: int, k: int) -> ComplexityBreakdown:
    """
    Complexity of one cycle of a bivariate bicycle memory, ``12 n``.

    Example:
        >>> c = bb_complexity(144, 12)
        >>> c.chi, round(float(c.storage_rate), 6)
        (1728, 0.006944)
    """
    if n < 2 or n % 2:
        raise DomainError(f"bivariate bicycle codes have even n >= 2, got {n}")
    if not 0 <= k <= n:
        raise DomainError(f"k must lie in [0, n], got {k}")
    return ComplexityBreakdown(n=n, k=k, n_a=n, n_H=n, n_synd=6 * n, n_m=n, n_EC=2 * n)


# -- physical noise -----------------------------------------------------------


def wait_noise(tau: float, tau_r: float, tau_d: float) -> float:
    """
    Local stochastic parameter accumulated over a wait of `tau` seconds:
    ``1/2 - exp(-tau/tau_r)/6 - exp(-tau/tau_d)/3``.

    Example:
        >>> wait_noise(0.0, 49e-6, 95e-6)
        0.0
        >>> f"{wait_noise(51.12e-9, 49e-6, 95e-6):.4e}"
        '3.5311e-04'
    """
    if tau < 0:
        raise DomainError(f"wait time must be nonnegative, got {tau}")
    if tau_r <= 0 or tau_d <= 0:
        raise DomainError(f"tau_r and tau_d must be positive, got {tau_r}, {tau_d}")
    return -math.expm1(-tau / tau_r) / 6.0 - math.expm1(-tau / tau_d) / 3.0


@dataclass(frozen=True)
class Composition:
    value: float
    below_threshold: Optional[bool] = None
    flags: Tuple[str, ...] = ()


def compose_local_stochastic(
    p_r: float, p: float, threshold: Optional[float] = None
) -> Composition:
    """
    Residual noise followed by fresh noise is local stochastic with
    parameter ``p_r + p``, capped at one.

    Example:
        >>> compose_local_stochastic(0.3, 0.9)
        Composition(value=1.0, below_threshold=None, flags=('clamped',))
    """
    _check_probability(p_r, "p_r")
    _check_probability(p, "p")
    total = p_r + p
    flags: Tuple[str, ...] = ()
    if total > 1.0:
        total, flags = 1.0, ("clamped",)
    below = None if threshold is None else total < threshold
    return Composition(total, below, flags)


def residual_noise(q: float, consts: ExpanderFamilyConstants, K: float = 1.0) -> float:
    """
    Residual parameter ``K q**(1/c0)`` left by the small-set-flip decoder.
    The decoder analysis leaves `K` unspecified; it defaults to one.

    Example:
        >>> round(residual_noise(1e-3, ExpanderFamilyConstants(7, 8)), 3)
        0.886
    """
    _check_probability(q, "q")
    if K <= 0:
        raise DomainError(f"K must be positive, got {K}")
    if q == 0:
        return 0.0
    return K * math.exp(math.log(q) / consts.c0)


def log10_expander_threshold(consts: ExpanderFamilyConstants) -> float:
    d = consts.d
    if d <= 2:
        raise DomainError(f"the threshold needs d > 2, got d={d}")
    log10_base = (
        -consts.h_alpha * LOG10_2
        - math.log10(d - 1)
        - (d - 2) * math.log1p(1.0 / (d - 2)) / math.log(10.0)
    )
    return log10_base / consts.alpha


def expander_threshold(consts: ExpanderFamilyConstants) -> float:
    """
    Noise threshold of the expander family,
    ``(2**-h(alpha) / ((d - 1)(1 + 1/(d - 2))**(d - 2)))**(1/alpha)``.
    """
    return 10.0 ** log10_expander_threshold(consts)


@dataclass(frozen=True)
class LogicalErrorBound:
    """A logical error bound as ``log10`` of the probability, with flags."""

    log10_pe: float
    flags: Tuple[str, ...] = ()

    @property
    def pe(self) -> float:
        return 10.0**self.log10_pe

    def to_dict(self) -> Dict[str, Any]:
        return {"log10_pe": self.log10_pe, "pe": self.pe, "flags": list(self.flags)}


def expander_logical_error(
    n: float, p: float, p_r: float, consts: ExpanderFamilyConstants
) -> LogicalErrorBound:
    """
    Bound ``C n ((p + p_r)/p_th)**(C' sqrt(n))`` on the logical error of one
    cycle, with ``C = 1 / ((1 - 2**(h(alpha)/alpha) p)(1 - ((p + p_r)/p_th)**alpha))``.

    Evaluated in log domain. Above threshold, or wherever the bound exceeds
    one, the trivial bound ``P_e <= 1`` is returned with flags.

    Example:
        >>> c = ExpanderFamilyConstants(7, 8)
        >>> round(expander_logical_error(1e6, 1e-19, 0.0, c).log10_pe, 1)
        -53.1
        >>> expander_logical_error(1e6, 0.0, 0.0, c).log10_pe
        -inf
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    _check_probability(p, "p")
    _check_probability(p_r, "p_r")
    total = p + p_r
    if total == 0:
        return LogicalErrorBound(-math.inf)
    log10_x = math.log10(total) - log10_expander_threshold(consts)
    if log10_x >= 0:
        logger.warning("p + p_r = %r is not below the threshold", total)
        return LogicalErrorBound(0.0, ("above_threshold",))
    flags: Tuple[str, ...] = ()
    if -math.expm1(log10_x * math.log(10.0)) < NEAR_THRESHOLD:
        flags += ("near_threshold",)

    first = 1.0 - 2.0 ** (consts.h_alpha / consts.alpha) * p
    # 1 - x**alpha
    second = -math.expm1(consts.alpha * log10_x * math.log(10.0))
    if first <= 0 or second <= 0:
        return LogicalErrorBound(0.0, flags + ("clamped",))
    log10_c = -math.log10(first) - math.log10(second)
    log10_pe = log10_c + math.log10(n) + consts.c_prime * math.sqrt(n) * log10_x
    if log10_pe > 0:
        logger.warning("logical error bound exceeds one at n=%r; clamping", n)
        return LogicalErrorBound(0.0, flags + ("clamped",))
    return LogicalErrorBound(log10_pe, flags)


def expander_crossover_n(p: float, p_r: float, consts: ExpanderFamilyConstants) -> float:
    """
    Blocklength beyond which `expander_logical_error` decreases with n:
    the root of the derivative of ``log10 n + C' sqrt(n) log10 x``.

    Example:
        >>> c = ExpanderFamilyConstants(7, 8)
        >>> expander_crossover_n(0.0, 0.0, c)
        1.0
    """
    total = p + p_r
    if total == 0:
        return 1.0
    log10_x = math.log10(total) - log10_expander_threshold(consts)
    if log10_x >= 0:
        raise InfeasibleError(f"p + p_r = {total} is not below the threshold")
    root = 2.0 / (math.log(10.0) * consts.c_prime * -log10_x)
    return max(1.0, root * root)


def cycles(T: float, tau: float) -> int:
    """
    Number of cycles ``ceil(T / tau)`` needed to cover a storage time `T`,
    at least one.

    Example:
        >>> cycles(2.5, 1.0), cycles(1000e-9, 1e-9), cycles(0.1, 1.0)
        (3, 1000, 1)
    """
    if tau <= 0:
        raise DomainError(f"cycle time must be positive, got {tau}")
    if T < 0:
        raise DomainError(f"storage time must be nonnegative, got {T}")
    return max(1, math.ceil(T / tau * (1.0 - _CYCLE_SLACK)))


def multi_cycle_error(log10_pe_single: float, T: float, tau: float) -> float:
    """
    Union bound over the cycles of a storage time `T`, in log10, clamped so
    the implied probability never exceeds one.

    Example:
        >>> multi_cycle_error(-10.0, 1000.0, 1.0)
        -7.0
    """
    return min(0.0, log10_pe_single + math.log10(cycles(T, tau)))


def bb_logical_error(p: float, d_circ: int) -> float:
    """
    Fitted logical error of the bivariate bicycle memory,
    ``p**(d_circ/2) exp(18.04 + 1337 p - 96007 p**2)``.

    Example:
        >>> f"{bb_logical_error(1e-3, 10):.4e}"
        '2.3639e-07'
    """
    if not 0.0 <= p <= 0.1:
        raise DomainError(f"the fit holds for p in (0, 0.1], got {p}")
    if d_circ < 1:
        raise DomainError(f"circuit distance must be positive, got {d_circ}")
    if p == 0:
        return 0.0
    return math.exp(0.5 * d_circ * math.log(p) + 18.04 + 1337.0 * p - 96007.0 * p * p)


def bb_multi_cycle_error(p: float, d_circ: int, T: float, tau: float) -> float:
    """log10 of the union bound for the fitted BB error over a storage time."""
    pe = bb_logical_error(p, d_circ)
    if pe == 0:
        return -math.inf
    return multi_cycle_error(math.log10(pe), T, tau)


def fidelity_from_error(pe: float) -> float:
    """
    Lower bound ``1 - pe`` on the recovery fidelity.

    Example:
        >>> round(fidelity_from_error(2.3639e-7), 11)
        0.99999976361
    """
    _check_probability(pe, "pe")
    return 1.0 - pe
