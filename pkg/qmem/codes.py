"""
Construction and certification of CSS codes: hypergraph products of a
classical parity check, bivariate bicycle codes, and a few small fixed codes
used to exercise the simulator.

Example:
    >>> code = hypergraph_product(BinaryMatrix(["11"]), distance_budget=22)
    >>> code.n, code.k, code.d_min
    (5, 1, 2)
    >>> bb = bb_code(12, 6, BbPolynomial.parse("x^3+y+y^2"), BbPolynomial.parse("y^3+x+x^2"))
    >>> bb.n, bb.k
    (144, 12)
"""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from qmem.config import max_workers
from qmem.errors import DimensionError, DomainError, InfeasibleError
from qmem.gf2 import (
    BinaryMatrix,
    apply,
    hstack,
    kernel_intersection,
    kernel_matrix,
    kron,
    matmul,
    rank,
)

logger = logging.getLogger(__name__)

#: default cap on the kernel dimension walked by exhaustive distance search
DISTANCE_BUDGET = 22

# bits of a coefficient vector that are expanded into one lookup table
_LOW_BITS = 11

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


@dataclass(frozen=True)
class Unknown:
    """A value that was not determined, with the reason why."""

    reason: str

    def __str__(self) -> str:
        return f"unknown ({self.reason})"


Distance = Union[int, Unknown]


@dataclass(frozen=True)
class CssCode:
    """
    A CSS code given by its two parity-check matrices.

    `n` and `k` are derived on construction, and construction fails unless
    ``h_x @ h_z.T == 0``.

    Example:
        >>> steane = steane_code()
        >>> steane.n, steane.k
        (7, 1)
        >>> CssCode(BinaryMatrix(["11"]), BinaryMatrix(["10"]))
        Traceback (most recent call last):
        ...
        qmem.errors.DomainError: h_x @ h_z.T is nonzero, not a CSS pair
    """

    h_x: BinaryMatrix
    h_z: BinaryMatrix
    d_min: Distance = Unknown("not computed")
    family: str = "custom"
    label: str = ""
    #: distance quoted for the family in the literature, never enumerated
    labeled_distance: Optional[int] = None
    flags: Tuple[str, ...] = ()
    n: int = field(init=False)
    k: int = field(init=False)

    def __post_init__(self) -> None:
        if self.h_x.cols != self.h_z.cols:
            raise DimensionError(
                f"h_x has {self.h_x.cols} columns but h_z has {self.h_z.cols}"
            )
        if not matmul(self.h_x, self.h_z.T).is_zero():
            raise DomainError("h_x @ h_z.T is nonzero, not a CSS pair")
        n = self.h_x.cols
        k = n - rank(self.h_x) - rank(self.h_z)
        if k < 0:
            raise DomainError(f"rank-nullity gives negative k = {k}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)

    @property
    def params(self) -> str:
        d = self.d_min if isinstance(self.d_min, int) else "?"
        return f"[[{self.n},{self.k},{d}]]"

    def certificate(self) -> Dict[str, Any]:
        """
        JSON-ready summary of the certified parameters.

        Example:
            >>> steane_code(distance_budget=22).certificate()["d_min"]
            3
        """
        return {
            "family": self.family,
            "label": self.label,
            "n": self.n,
            "k": self.k,
            "d_min": self.d_min if isinstance(self.d_min, int) else None,
            "d_min_status": "exact" if isinstance(self.d_min, int) else str(self.d_min),
            "labeled_distance": self.labeled_distance,
            "css_ok": True,
            "flags": list(self.flags),
        }


def with_flags(code: CssCode, *flags: str) -> CssCode:
    return replace(code, flags=tuple(dict.fromkeys(code.flags + flags)))


# -- exhaustive distance ------------------------------------------------------


def _combination_table(words: np.ndarray) -> np.ndarray:
    """XOR of every subset of the rows of `words`, indexed by subset bitmask."""
    table = np.zeros((1, words.shape[1]), dtype=np.uint64)
    for row in words:
        table = np.concatenate([table, table ^ row])
    return table


def _popcount(words: np.ndarray) -> np.ndarray:
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return _POPCOUNT8[as_bytes].sum(axis=1, dtype=np.int64)


def _min_weight_outside(basis: BinaryMatrix, checks: Optional[BinaryMatrix]) -> Optional[int]:
    """
    Smallest weight of a nonzero combination `v` of the rows of `basis` with
    ``checks @ v != 0``; every nonzero combination counts when `checks` is
    None. Returns None when no combination qualifies.
    """
    dim = basis.rows
    if dim == 0:
        return None
    n_vec = basis.words.shape[1]
    if checks is not None and checks.rows:
        syndromes = BinaryMatrix([apply(checks, basis.row(i)) for i in range(dim)])
        words = np.concatenate([basis.words, syndromes.words], axis=1)
    else:
        words = np.array(basis.words)

    low = min(dim, _LOW_BITS)
    low_table = _combination_table(words[:low])
    high_table = _combination_table(words[low:])
    filtered = checks is not None

    def best_in(chunk: range) -> Optional[int]:
        best: Optional[int] = None
        for h in chunk:
            block = low_table ^ high_table[h]
            weights = _popcount(block[:, :n_vec])
            if filtered:
                keep = block[:, n_vec:].any(axis=1) if block.shape[1] > n_vec else np.zeros(len(block), bool)
            else:
                keep = weights > 0
            if keep.any():
                w = int(weights[keep].min())
                best = w if best is None else min(best, w)
        return best

    n_high = high_table.shape[0]
    workers = max(1, min(max_workers(), n_high))
    step = -(-n_high // workers)
    chunks = [range(i, min(i + step, n_high)) for i in range(0, n_high, step)]
    logger.debug("enumerating 2^%d combinations in %d chunks", dim, len(chunks))
    if len(chunks) == 1:
        results = [best_in(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(best_in, chunks))
    found = [r for r in results if r is not None]
    return min(found) if found else None


def _sector_distance(h_a: BinaryMatrix, h_b: BinaryMatrix, budget: int) -> Distance:
    kernel = kernel_matrix(h_a)
    if kernel.rows > budget:
        return Unknown(f"kernel dimension {kernel.rows} exceeds budget {budget}")
    # v lies in rs(h_b) exactly when it is orthogonal to ker(h_b)
    best = _min_weight_outside(kernel, kernel_matrix(h_b))
    if best is None:
        return Unknown("no logical operators")
    return best


def min_distance_exhaustive(
    code: CssCode, budget: int = DISTANCE_BUDGET, both_sectors: bool = False
) -> Distance:
    """
    Minimum weight of a vector in ``ker(h_x)`` outside ``rs(h_z)``, found by
    walking all ``2**dim ker(h_x)`` combinations.

    Returns `Unknown` when the kernel dimension exceeds `budget` or the code
    has no logical operators. With `both_sectors` the other sector is searched
    as well and the smaller distance is reported.

    Example:
        >>> min_distance_exhaustive(hypergraph_product(BinaryMatrix(["11"])))
        2
        >>> min_distance_exhaustive(hypergraph_product(BinaryMatrix.identity(2)))
        Unknown(reason='no logical operators')
    """
    if code.k == 0:
        return Unknown("no logical operators")
    d_x = _sector_distance(code.h_x, code.h_z, budget)
    if not both_sectors or not isinstance(d_x, int):
        return d_x
    d_z = _sector_distance(code.h_z, code.h_x, budget)
    if not isinstance(d_z, int):
        return d_z
    return min(d_x, d_z)


def classical_distance(h: BinaryMatrix, budget: int = DISTANCE_BUDGET) -> Distance:
    """
    Minimum weight of a nonzero codeword of the classical code ``ker(h)``.

    Example:
        >>> classical_distance(BinaryMatrix(["110", "011"]))
        3
    """
    kernel = kernel_matrix(h)
    if kernel.rows > budget:
        return Unknown(f"kernel dimension {kernel.rows} exceeds budget {budget}")
    best = _min_weight_outside(kernel, None)
    if best is None:
        return Unknown("no nonzero codewords")
    return best


# -- hypergraph products ------------------------------------------------------


def hypergraph_product(h: BinaryMatrix, distance_budget: Optional[int] = None) -> CssCode:
    """
    Hypergraph product of the classical check `h` (n_B checks on n_A bits)
    with itself.

    ``h_x = [I_{n_A} ⊗ h | h^T ⊗ I_{n_B}]`` and
    ``h_z = [h ⊗ I_{n_A} | I_{n_B} ⊗ h^T]`` on ``n_A² + n_B²`` qubits.
    When `distance_budget` is given the distance is enumerated and compared
    with the classical distance of `h`.
    """
    n_b, n_a = h.shape
    if n_a == 0 or n_b == 0:
        raise DimensionError(f"hypergraph product needs a nonempty check, got {h.shape}")
    eye_a = BinaryMatrix.identity(n_a)
    eye_b = BinaryMatrix.identity(n_b)
    h_x = hstack(kron(eye_a, h), kron(h.T, eye_b))
    h_z = hstack(kron(h, eye_a), kron(eye_b, h.T))
    code = CssCode(h_x, h_z, family="hgp", label=f"hgp({n_b}x{n_a})")

    design_k = (n_a - n_b) ** 2
    if code.k < design_k:
        logger.warning("hypergraph product has k=%d below (n_A-n_B)^2=%d", code.k, design_k)
        code = with_flags(code, "k_below_design")
    if distance_budget is None:
        return code

    d_min = min_distance_exhaustive(code, budget=distance_budget)
    code = replace(code, d_min=d_min)
    d_classical = classical_distance(h, budget=distance_budget)
    if isinstance(d_min, int) and isinstance(d_classical, int) and d_min != d_classical:
        logger.warning(
            "enumerated distance %d differs from the classical distance %d", d_min, d_classical
        )
        code = with_flags(code, "distance_formula_mismatch")
    return code


def random_biregular_check(
    n_bits: int,
    bit_degree: int,
    check_degree: int,
    rng: Optional[np.random.Generator] = None,
    max_tries: int = 1000,
) -> BinaryMatrix:
    """
    A random parity check whose Tanner graph is biregular: every bit sits in
    `bit_degree` checks and every check touches `check_degree` bits.

    Only the degrees are guaranteed; expansion is never verified.
    """
    if n_bits < 1 or bit_degree < 1 or check_degree < 1:
        raise DomainError("sizes and degrees must be positive")
    edges = n_bits * bit_degree
    if edges % check_degree:
        raise DomainError(
            f"{n_bits} bits of degree {bit_degree} cannot be split into checks of degree {check_degree}"
        )
    n_checks = edges // check_degree
    if check_degree > n_bits or bit_degree > n_checks:
        raise DomainError("degree exceeds the number of available neighbours")
    rng = np.random.default_rng() if rng is None else rng
    bit_stubs = np.repeat(np.arange(n_bits), bit_degree)
    check_stubs = np.repeat(np.arange(n_checks), check_degree)
    for attempt in range(max_tries):
        perm = rng.permutation(check_stubs)
        dense = np.zeros((n_checks, n_bits), dtype=np.int64)
        np.add.at(dense, (perm, bit_stubs), 1)
        if dense.max() == 1:
            logger.debug("biregular graph found after %d tries", attempt + 1)
            return BinaryMatrix(dense.astype(np.uint8))
    raise InfeasibleError(f"no simple biregular graph found in {max_tries} tries")


# -- bivariate bicycle codes --------------------------------------------------

_TERM = re.compile(r"^(?:([xy])(?:\^(\d+))?|1)$")


@dataclass(frozen=True)
class BbPolynomial:
    """
    A three-term sum of powers of the commuting shifts x and y, times an
    overall monomial ``x**factor[0] * y**factor[1]``.

    Example:
        >>> BbPolynomial.parse("x^3 + y + y^2")
        BbPolynomial(terms=(('x', 3), ('y', 1), ('y', 2)), factor=(0, 0))
        >>> str(BbPolynomial.parse("x^3 + y + y^2").shifted("x", 2))
        'x^2*(x^3+y+y^2)'
        >>> BbPolynomial.parse("x^3+z")
        Traceback (most recent call last):
        ...
        qmem.errors.DomainError: cannot parse term 'z'
    """

    terms: Tuple[Tuple[str, int], ...]
    factor: Tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        terms = tuple((str(axis), int(exp)) for axis, exp in self.terms)
        if len(terms) != 3:
            raise DomainError(f"expected exactly three terms, got {len(terms)}")
        for axis, exp in terms:
            if axis not in ("x", "y"):
                raise DomainError(f"axis must be 'x' or 'y', got {axis!r}")
            if exp < 0:
                raise DomainError(f"exponent must be nonnegative, got {exp}")
        factor = tuple(int(e) for e in self.factor)
        if len(factor) != 2 or min(factor) < 0:
            raise DomainError(f"factor must be two nonnegative exponents, got {self.factor}")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "factor", factor)

    @classmethod
    def parse(cls, text: str) -> "BbPolynomial":
        terms = []
        for raw in text.replace(" ", "").split("+"):
            match = _TERM.match(raw)
            if match is None:
                raise DomainError(f"cannot parse term {raw!r}")
            axis, exp = match.groups()
            if axis is None:
                terms.append(("x", 0))
            else:
                terms.append((axis, 1 if exp is None else int(exp)))
        return cls(tuple(terms))

    def reduced(self, l: int, m: int) -> "BbPolynomial":
        return BbPolynomial(
            tuple((axis, exp % (l if axis == "x" else m)) for axis, exp in self.terms),
            (self.factor[0] % l, self.factor[1] % m),
        )

    def shifted(self, axis: str, amount: int) -> "BbPolynomial":
        """The product with the monomial ``axis**amount``."""
        if axis not in ("x", "y"):
            raise DomainError(f"axis must be 'x' or 'y', got {axis!r}")
        if amount < 0:
            raise DomainError(f"shift must be nonnegative, got {amount}")
        fx, fy = self.factor
        factor = (fx + amount, fy) if axis == "x" else (fx, fy + amount)
        return BbPolynomial(self.terms, factor)

    def matrix(self, l: int, m: int) -> np.ndarray:
        """The ``lm x lm`` matrix of the polynomial, summed mod 2."""
        poly = self.reduced(l, m)
        total = np.zeros((l * m, l * m), dtype=np.uint8)
        for axis, exp in poly.terms:
            if axis == "x":
                term = np.kron(cyclic_shift(l, exp), np.eye(m, dtype=np.uint8))
            else:
                term = np.kron(np.eye(l, dtype=np.uint8), cyclic_shift(m, exp))
            total ^= term
        if poly.factor != (0, 0):
            # a permutation, so the product stays 0/1
            fx, fy = poly.factor
            total = np.kron(cyclic_shift(l, fx), cyclic_shift(m, fy)) @ total
        return total

    def __str__(self) -> str:
        body = "+".join("1" if e == 0 else a if e == 1 else f"{a}^{e}" for a, e in self.terms)
        monomial = "*".join(
            a if e == 1 else f"{a}^{e}" for a, e in zip("xy", self.factor) if e
        )
        return f"{monomial}*({body})" if monomial else body


def cyclic_shift(size: int, power: int = 1) -> np.ndarray:
    """
    ``S**power`` where row i of S has its one in column ``i+1 mod size``.

    Example:
        >>> cyclic_shift(3).tolist()
        [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    """
    return np.roll(np.eye(size, dtype=np.uint8), shift=power, axis=1)


def bicycle_code(a: BinaryMatrix, b: BinaryMatrix, **kwargs: Any) -> CssCode:
    """``h_x = [A | B]``, ``h_z = [B^T | A^T]`` for commuting square A, B."""
    if a.shape != b.shape or a.rows != a.cols:
        raise DimensionError(f"need square blocks of equal size, got {a.shape} and {b.shape}")
    return CssCode(hstack(a, b), hstack(b.T, a.T), **kwargs)


def bb_code(
    l: int,
    m: int,
    a: BbPolynomial,
    b: BbPolynomial,
    labeled_distance: Optional[int] = None,
) -> CssCode:
    """
    Bivariate bicycle code on ``2lm`` qubits.

    k is certified twice, as ``2 dim(ker A ∩ ker B)`` and by rank-nullity on
    the check matrices; a disagreement is flagged. The distance is never
    enumerated, so any `labeled_distance` is carried with an "unverified"
    flag.

    Example:
        >>> tiny = bb_code(1, 1, BbPolynomial.parse("x+x+x"), BbPolynomial.parse("y+y+y"))
        >>> tiny.n, tiny.k
        (2, 0)
    """
    if l < 1 or m < 1:
        raise DomainError(f"cycle lengths must be positive, got l={l}, m={m}")
    a_mat = BinaryMatrix(a.matrix(l, m))
    b_mat = BinaryMatrix(b.matrix(l, m))
    code = bicycle_code(
        a_mat,
        b_mat,
        family="bb",
        label=f"bb(l={l}, m={m}, A={a}, B={b})",
        labeled_distance=labeled_distance,
    )
    k_kernel = 2 * len(kernel_intersection(a_mat, b_mat))
    if k_kernel != code.k:
        logger.warning("bb k from kernels (%d) disagrees with rank-nullity (%d)", k_kernel, code.k)
        code = with_flags(code, "k_mismatch")
    if labeled_distance is not None:
        logger.info("bb distance %d is quoted, not enumerated", labeled_distance)
        code = with_flags(code, "unverified")
    return code


def gross_code() -> CssCode:
    """The [[144,12,12]] instance with ``A = x³+y+y²``, ``B = y³+x+x²``."""
    return bb_code(
        12,
        6,
        BbPolynomial.parse("x^3+y+y^2"),
        BbPolynomial.parse("y^3+x+x^2"),
        labeled_distance=12,
    )


# -- small fixed codes --------------------------------------------------------


def hamming_check(r: int) -> BinaryMatrix:
    """
    Parity check of the ``[2^r - 1, 2^r - 1 - r, 3]`` Hamming code; column j
    is the binary expansion of ``j + 1``.

    Example:
        >>> hamming_check(2)
        BinaryMatrix(['011', '101'])
    """
    if r < 2:
        raise DomainError(f"Hamming codes need r >= 2, got {r}")
    n = 2**r - 1
    return BinaryMatrix(
        [[((j + 1) >> (r - 1 - i)) & 1 for j in range(n)] for i in range(r)]
    )


def steane_code(distance_budget: Optional[int] = None) -> CssCode:
    h = hamming_check(3)
    code = CssCode(h, h, family="steane", label="steane")
    if distance_budget is not None:
        code = replace(code, d_min=min_distance_exhaustive(code, budget=distance_budget))
    return code


BUILTIN_CODES = {
    "steane": lambda: steane_code(DISTANCE_BUDGET),
    "hgp-rep2": lambda: hypergraph_product(BinaryMatrix(["11"]), DISTANCE_BUDGET),
    "gross": gross_code,
}


def builtin_code(name: str) -> CssCode:
    try:
        factory = BUILTIN_CODES[name]
    except KeyError:
        raise DomainError(f"unknown code {name!r}; choose from {sorted(BUILTIN_CODES)}")
    return factory()
