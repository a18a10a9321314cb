import timeit
from functools import partial

import numpy as np

from qmem import OptimizerConfig, SimConfig, gross_code, optimize, simulate, steane_code
from qmem.codes import hypergraph_product, random_biregular_check
from qmem.gf2 import rank

rng = np.random.default_rng(0)
check = random_biregular_check(16, 3, 4, rng=rng)
steane = steane_code()
sim_config = SimConfig(steane, 0.01, q=0.001, cycles=5, trials=100_000, seed=1)
optimizer_config = OptimizerConfig()

assert gross_code().k == 12
assert 0.0 < simulate(sim_config).logical_error_estimate < 1.0


def build_gross():
    return gross_code()


def build_hgp():
    return hypergraph_product(check)


def rank_of(code):
    return rank(code.h_x)


number = 5
repeats = 3
gross = build_gross()
for i in range(repeats):
    print(f"----- {i} ------")

    print("-- codes --")
    print(f"{timeit.timeit(build_gross, number=number)=}")
    print(f"{timeit.timeit(build_hgp, number=number)=}")
    print(f"{timeit.timeit(partial(rank_of, gross), number=number)=}")

    print("-- optimiser --")
    print(f"{timeit.timeit(partial(optimize, optimizer_config), number=1)=}")

    print("-- simulator --")
    print(f"{timeit.timeit(partial(simulate, sim_config), number=1)=}")
