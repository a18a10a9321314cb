"""Storage capacity of quantum memories.

A quantum memory keeps logical qubits alive by alternating a wait, during
which the data decoheres, with a refresh that extracts a syndrome, decodes
it and corrects. This package builds the CSS codes such a memory uses,
counts the components of one cycle, bounds its logical error, and compares
the achievable storage rate with upper bounds on the storage capacity, both
asymptotic and at finite blocklength. A Pauli-frame simulator checks the
cycle model on small codes."""

__description__ = (
    "Storage capacity bounds, code constructions and cycle simulation "
    "for wait-refresh quantum memories."
)
__long_description__ = __doc__
__author__ = "qmem developers"
__python_requires__ = ">=3.8"
__version__ = "0.1.0"

from qmem.bounds import (
    BoundResult,
    binary_entropy,
    convex_envelope,
    depolarizing_capacity_ub,
    depolarizing_dissipation_ub,
    dissipation_bound,
    dissipation_entropy,
    gamma_fn,
    inverse_normal_cdf,
    one_shot_bound,
    second_order_bound,
)
from qmem.classical import classical_ub, compare_bounds, delta_h, delta_h_star
from qmem.codes import (
    BbPolynomial,
    CssCode,
    Unknown,
    bb_code,
    gross_code,
    hypergraph_product,
    min_distance_exhaustive,
    steane_code,
)
from qmem.decoder_time import OptimizerConfig, OptimizerResult, n_max, optimize
from qmem.errors import (
    CapacityError,
    ConfigError,
    DimensionError,
    DomainError,
    InfeasibleError,
    QmemError,
)
from qmem.gf2 import BinaryMatrix, kernel_basis, kernel_intersection, rank, row_reduce
from qmem.memory import (
    ComplexityBreakdown,
    ExpanderFamilyConstants,
    NoiseModel,
    bb_complexity,
    bb_logical_error,
    compose_local_stochastic,
    cycles,
    expander_complexity,
    expander_logical_error,
    expander_threshold,
    multi_cycle_error,
    wait_noise,
)
from qmem.sim import SimConfig, SimResult, build_decoder_table, exact_logical_error, simulate

__all__ = [
    "BbPolynomial",
    "BinaryMatrix",
    "BoundResult",
    "CapacityError",
    "ComplexityBreakdown",
    "ConfigError",
    "CssCode",
    "DimensionError",
    "DomainError",
    "ExpanderFamilyConstants",
    "InfeasibleError",
    "NoiseModel",
    "OptimizerConfig",
    "OptimizerResult",
    "QmemError",
    "SimConfig",
    "SimResult",
    "Unknown",
    "bb_code",
    "bb_complexity",
    "bb_logical_error",
    "binary_entropy",
    "build_decoder_table",
    "classical_ub",
    "compose_local_stochastic",
    "convex_envelope",
    "cycles",
    "delta_h",
    "delta_h_star",
    "depolarizing_capacity_ub",
    "depolarizing_dissipation_ub",
    "dissipation_bound",
    "dissipation_entropy",
    "exact_logical_error",
    "expander_complexity",
    "expander_logical_error",
    "expander_threshold",
    "compare_bounds",
    "gamma_fn",
    "gross_code",
    "hypergraph_product",
    "inverse_normal_cdf",
    "kernel_basis",
    "kernel_intersection",
    "min_distance_exhaustive",
    "multi_cycle_error",
    "n_max",
    "one_shot_bound",
    "optimize",
    "rank",
    "row_reduce",
    "second_order_bound",
    "simulate",
    "steane_code",
    "wait_noise",
]
