import numpy as np
import pytest

from bpscope.ansatz import AnsatzSpec, build, diff_param_index
from bpscope.bounds import (is_ladder_layout, ladder_bound, theorem1_bound,
                            theorem2_bound)
from bpscope.circuit import Block, Circuit, Gate
from bpscope.errors import AssumptionViolation, LayoutError
from bpscope.models import Hamiltonian
from bpscope.pauli import PauliString
from bpscope.twirl import exact_variance

from conftest import random_block_circuit, random_observable


def ladder(n):
    return build(AnsatzSpec(family="ladder", qubits=n)).circuit


def zh(n, q, coeff=1.0):
    return Hamiltonian(n, ((coeff, PauliString.from_ops(n, {q: "Z"})),))


def test_theorem1_single_block():
    c = ladder(2)
    rep = theorem1_bound(c, zh(2, 0), diff_param_index(0, "ryy"))
    assert rep.total == pytest.approx(0.4, abs=1e-12)
    assert rep.sandwich_assumed


def test_theorem1_term_outside_cone_contributes_zero():
    n = 3
    blocks = (Block((Gate(PauliString.from_ops(n, {0: "Z", 1: "Z"}), param_index=0),)),
              Block((Gate(PauliString.from_ops(n, {2: "Y"}), param_index=1),)))
    c = Circuit(n, blocks)
    rep = theorem1_bound(c, zh(n, 2), 0)
    assert rep.total == 0.0
    assert rep.per_term[0][1] is None


def test_theorem1_ladder_value():
    c = ladder(4)
    rep = theorem1_bound(c, zh(4, 3), diff_param_index(0, "ryy"))
    assert rep.total == pytest.approx(2 / 125, abs=1e-12)


def test_theorem2_values():
    c = ladder(2)
    assert theorem2_bound(c, zh(2, 0), diff_param_index(0, "ryy")).total == pytest.approx(0.125)
    c4 = ladder(4)
    # term on the differential block's support: chi=2, beta=2, r=1
    assert theorem2_bound(c4, zh(4, 0), diff_param_index(0, "ryy")).total == pytest.approx(2 / 256)
    # no term touching the block
    assert theorem2_bound(c4, zh(4, 3), diff_param_index(0, "ryy")).total == 0.0


def test_ladder_bound_values():
    c = ladder(4)
    # dk = 0: the differential block is the last block acting on the term
    assert ladder_bound(c, zh(4, 0), diff_param_index(0, "ryy")).total == pytest.approx(0.125)
    # dk = 1
    assert ladder_bound(c, zh(4, 3), diff_param_index(1, "ryy")).total == pytest.approx(2.0**-7)
    # term behind the differential block drops out
    assert ladder_bound(c, zh(4, 0), diff_param_index(2, "ryy")).total == 0.0


def test_ladder_bound_rejects_non_ladder():
    c = build(AnsatzSpec(family="brickwall", qubits=4, reps=2)).circuit
    assert not is_ladder_layout(c)
    with pytest.raises(LayoutError):
        ladder_bound(c, zh(4, 0), 0)


def test_structured_blocks_rejected():
    n = 2
    blk = Block((Gate(PauliString.from_ops(n, {0: "Z", 1: "Z"}), param_index=0),),
                kind="structured")
    c = Circuit(n, (blk,))
    with pytest.raises(AssumptionViolation):
        theorem1_bound(c, zh(2, 0), 0)


def test_scale_covariance(rng):
    c = ladder(5)
    terms = tuple((float(rng.uniform(-2, 2)),
                   PauliString.from_ops(5, {int(q): "Z"})) for q in range(5))
    hmt = Hamiltonian(5, terms)
    mu = diff_param_index(2, "ryy")
    for bound in (theorem1_bound, theorem2_bound, ladder_bound):
        base = bound(c, hmt, mu).total
        scaled = bound(c, hmt.scaled(3.0), mu).total
        assert scaled == pytest.approx(9.0 * base, rel=1e-12)


def _random_ladder_instance(rng):
    n = int(rng.integers(3, 9))
    c = ladder(n)
    k = int(rng.integers(1, 4))
    terms = []
    for _ in range(k):
        qs = rng.choice(n, size=int(rng.integers(1, 3)), replace=False)
        terms.append((float(rng.uniform(-1.5, 1.5)),
                      PauliString.from_ops(n, {int(q): str(rng.choice(list("XYZ")))
                                               for q in qs})))
    hmt = Hamiltonian(n, tuple(terms))
    mu = int(rng.integers(0, c.param_count))
    return c, hmt, mu


def test_bound_ordering_on_random_ladders(rng):
    # exact variance >= theorem1 >= theorem2 and theorem1 >= ladder bound
    for _ in range(25):
        c, hmt, mu = _random_ladder_instance(rng)
        if not hmt.terms:
            continue
        b1 = theorem1_bound(c, hmt, mu).total
        b2 = theorem2_bound(c, hmt, mu).total
        bl = ladder_bound(c, hmt, mu).total
        ex = exact_variance(c, hmt, mu)
        assert ex >= b1 - 1e-12 * max(1.0, abs(ex))
        assert b1 >= b2 - 1e-12
        assert b1 >= bl - 1e-12
        assert b2 >= 0.0
