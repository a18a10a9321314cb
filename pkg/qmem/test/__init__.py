from qmem.codes import builtin_code

small_code_names = ["steane", "hgp-rep2"]
small_codes = [builtin_code(name) for name in small_code_names]

depolarizing_levels = [1e-3, 1e-2, 5e-2]
syndrome_flip_levels = [0.0, 1e-2]

# noise parameters on both sides of the no-cloning point
p_tilde_grid = [0.0, 1e-19, 1e-6, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.25]

# classical parity checks with a known distance
classical_checks = [
    (["11"], 2),
    (["110", "011"], 3),
    (["1100", "0110", "0011"], 4),
    (["0001111", "0110011", "1010101"], 3),
]
