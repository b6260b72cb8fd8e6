import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import numpy as np
import pytest

from bpscope.circuit import Block, Circuit, Gate
from bpscope.pauli import PauliString


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_block_circuit(rng, n_min=2, n_max=4, max_blocks=3, max_block_size=2):
    """Small random design2 circuit with one trainable gate per block."""
    n = int(rng.integers(n_min, n_max + 1))
    nb = int(rng.integers(1, max_blocks + 1))
    blocks = []
    for k in range(nb):
        size = int(rng.integers(1, min(n, max_block_size) + 1))
        qubits = sorted(rng.choice(n, size=size, replace=False).tolist())
        letters = "".join(rng.choice(list("XYZ")) for _ in qubits)
        gen = PauliString.from_ops(n, dict(zip(qubits, letters)))
        blocks.append(Block((Gate(gen, param_index=k),)))
    return Circuit(n, tuple(blocks))


def random_observable(rng, circuit, max_weight=None):
    sup = sorted(circuit.support())
    k = int(rng.integers(1, len(sup) + 1 if max_weight is None
                         else min(max_weight, len(sup)) + 1))
    qubits = rng.choice(sup, size=k, replace=False)
    return PauliString.from_ops(
        circuit.qubit_count, {int(q): str(rng.choice(list("XYZ"))) for q in qubits})
