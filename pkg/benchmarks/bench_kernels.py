#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--qubits 12] [--repeats 5]
"""

import argparse
import time

import numpy as np

from bpscope import kernels
from bpscope.ansatz import AnsatzSpec, build
from bpscope.models import Hamiltonian, ToricLattice, toric_code
from bpscope.pauli import PauliString
from bpscope.simulator import (adjoint_energy_gradient, compile_circuit,
                               mc_variance, run)
from bpscope.twirl import exact_term_variance


def timeit(fn, repeats):
    fn()  # warm-up (JIT compilation for the numba path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qubits", type=int, default=12)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    n = args.qubits
    ladder = build(AnsatzSpec(family="ladder", qubits=n)).circuit
    cc = compile_circuit(ladder)
    theta = np.random.default_rng(0).uniform(0, 2 * np.pi, cc.n_params)
    lat = ToricLattice(3, 3)
    toric = toric_code(lat, (0.1, 0.0, 0.1))
    claw = build(AnsatzSpec(family="fldc_claw", rows=3, cols=3)).circuit
    claw_cc = compile_circuit(claw)
    claw_theta = np.random.default_rng(1).uniform(0, 2 * np.pi, claw_cc.n_params)
    z_last = PauliString.from_ops(n, {n - 1: "Z"})

    ladder6 = build(AnsatzSpec(family="ladder", qubits=6)).circuit
    z6 = Hamiltonian(6, ((1.0, PauliString.from_ops(6, {5: "Z"})),))
    cases = {
        f"forward run (ladder, N={n}, {len(cc.xs)} gates)":
            lambda: run(ladder, theta, cc),
        "adjoint gradient (claw, N=12, 180 params)":
            lambda: adjoint_energy_gradient(claw_cc, claw_theta, toric),
        "mc variance 200 samples (ladder N=6)":
            lambda: mc_variance(ladder6, z6, 7, 200, "cartan-uniform", seed=1),
    }

    initial = kernels.get_backend_name()
    results = {}
    for backend in kernels.available_backends():
        kernels.set_backend(backend)
        for label, fn in cases.items():
            results[(label, backend)] = timeit(fn, args.repeats)
    kernels.set_backend(initial)

    print(f"{'case':55s} " + " ".join(f"{b:>12s}" for b in kernels.available_backends())
          + f" {'speedup':>9s}")
    for label in cases:
        row = [results[(label, b)] for b in kernels.available_backends()]
        speed = (results[(label, "numpy")] / results[(label, "numba")]
                 if ("numba" in kernels.available_backends()) else float("nan"))
        print(f"{label:55s} " + " ".join(f"{t * 1e3:10.2f}ms" for t in row)
              + f" {speed:8.1f}x")

    # the twirl engine is pure python; report it once for context
    t = timeit(lambda: exact_term_variance(ladder, z_last, 7), args.repeats)
    print(f"{'twirl engine (ladder N=' + str(n) + ', pure python)':55s} {t * 1e3:10.2f}ms")


if __name__ == "__main__":
    main()
