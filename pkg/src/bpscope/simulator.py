"""Dense statevector simulation: expectations, gradients, Haar-block sampling
and Monte-Carlo derivative-variance estimation.

The hot loops live in :mod:`bpscope.kernels`; this module compiles circuits
to flat gate arrays once and drives whichever kernel backend is active.
Randomness is drawn from numpy's Philox-backed generators seeded through
``SeedSequence`` so every artifact is reproducible from one 64-bit seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .circuit import Circuit
from .errors import BpscopeError, DimensionError
from .models import Hamiltonian

SHIFT = np.pi / 4.0  # parameter-shift offset for exp(-i theta P), P**2 = I


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-style generator: one root seed plus a spawn path."""
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(stream))))


@dataclass
class StateVector:
    amps: np.ndarray
    n: int

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps, n)

    def norm(self) -> float:
        return float(np.sqrt(kernels.backend().norm2(self.amps)))

    def check_normalized(self, tol: float = 1e-10) -> None:
        if abs(self.norm() - 1.0) > tol:
            raise BpscopeError(f"state norm drifted to {self.norm()}")


@dataclass(frozen=True)
class CompiledCircuit:
    """Flat gate arrays consumed by the kernels."""

    n: int
    xs: np.ndarray          # int64 X/Y masks per gate
    zs: np.ndarray          # int64 Z/Y masks per gate
    yphs: np.ndarray        # complex128 i**(#Y) per gate
    params: np.ndarray      # int64 parameter index, -1 for frozen gates
    fixed: np.ndarray       # float64 frozen angles (0 where trainable)
    n_params: int
    block_of_gate: np.ndarray

    def thetas(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.n_params,):
            raise DimensionError(
                f"parameter vector length {values.shape} != {self.n_params}")
        out = self.fixed.copy()
        trainable = self.params >= 0
        out[trainable] = values[self.params[trainable]]
        return out


def compile_circuit(c: Circuit) -> CompiledCircuit:
    xs, zs, yphs, params, fixed, blocks = [], [], [], [], [], []
    for k, g in c.gates_in_order():
        gen = g.generator
        xs.append(gen.x)
        zs.append(gen.z)
        yphs.append(1j ** ((gen.x & gen.z).bit_count() % 4))
        params.append(-1 if g.param_index is None else g.param_index)
        fixed.append(0.0 if g.fixed_angle is None else g.fixed_angle)
        blocks.append(k)
    return CompiledCircuit(
        n=c.qubit_count,
        xs=np.array(xs, dtype=np.int64),
        zs=np.array(zs, dtype=np.int64),
        yphs=np.array(yphs, dtype=np.complex128),
        params=np.array(params, dtype=np.int64),
        fixed=np.array(fixed, dtype=np.float64),
        n_params=c.param_count,
        block_of_gate=np.array(blocks, dtype=np.int64),
    )


def compile_hamiltonian(hmt: Hamiltonian):
    xs = np.array([p.x for _, p in hmt.terms], dtype=np.int64)
    zs = np.array([p.z for _, p in hmt.terms], dtype=np.int64)
    yphs = np.array([1j ** ((p.x & p.z).bit_count() % 4) for _, p in hmt.terms],
                    dtype=np.complex128)
    coeffs = np.array([c for c, _ in hmt.terms], dtype=np.float64)
    return xs, zs, yphs, coeffs


# -- running -----------------------------------------------------------

def run(c: Circuit, theta: np.ndarray,
        compiled: Optional[CompiledCircuit] = None) -> StateVector:
    """Evolve |0...0> through the parametrized circuit."""
    cc = compiled or compile_circuit(c)
    psi = StateVector.zero(cc.n)
    kernels.backend().run_rotations(psi.amps, cc.xs, cc.zs, cc.yphs, cc.thetas(theta))
    psi.check_normalized()
    return psi


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def run_haar(c: Circuit, rng: np.random.Generator,
             differential_param: Optional[int] = None,
             differential_angle: float = 0.0) -> StateVector:
    """Evolve |0...0> replacing every design2 block with a fresh Haar unitary.

    With `differential_param` given, that gate's block becomes
    Haar * rotation(differential_angle) * Haar on the block support, keeping
    the differential rotation explicit inside its 2-design sandwich.
    """
    kb = kernels.backend()
    diff_block = None if differential_param is None else c.block_of_param(differential_param)
    psi = StateVector.zero(c.qubit_count)
    for k, block in enumerate(c.blocks):
        qubits = np.array(sorted(block.support), dtype=np.int64)
        dim = 1 << len(qubits)
        if k == diff_block:
            gate = c.gate_of_param(differential_param)
            gen = gate.generator
            psi.amps = kb.apply_dense(psi.amps, haar_unitary(dim, rng), qubits)
            kb.apply_rotation(psi.amps, gen.x, gen.z,
                              1j ** ((gen.x & gen.z).bit_count() % 4),
                              float(differential_angle))
            psi.amps = kb.apply_dense(psi.amps, haar_unitary(dim, rng), qubits)
        else:
            psi.amps = kb.apply_dense(psi.amps, haar_unitary(dim, rng), qubits)
    psi.check_normalized()
    return psi


def expectation(psi: StateVector, hmt: Hamiltonian) -> float:
    if hmt.n != psi.n:
        raise DimensionError("Hamiltonian qubit count mismatch")
    kb = kernels.backend()
    total = 0.0 + 0.0j
    for coeff, p in hmt.terms:
        total += coeff * kb.expval_pauli(
            psi.amps, p.x, p.z, 1j ** ((p.x & p.z).bit_count() % 4))
    if abs(total.imag) > 1e-10:
        raise BpscopeError(f"expectation has imaginary residue {total.imag}")
    return float(total.real)


# -- gradients ----------------------------------------------------------

def gradient(c: Circuit, theta: np.ndarray, hmt: Hamiltonian,
             method: str = "shift",
             compiled: Optional[CompiledCircuit] = None) -> np.ndarray:
    """d<H>/d(theta) for every trainable parameter.

    ``shift``: exact two-point rule C(t + pi/4) - C(t - pi/4), valid because
    every generator is an involution under the exp(-i theta P) convention.
    ``adjoint``: single reverse sweep; same values to numerical precision.
    """
    cc = compiled or compile_circuit(c)
    theta = np.asarray(theta, dtype=np.float64)
    if method == "shift":
        grad = np.zeros(cc.n_params)
        for mu in range(cc.n_params):
            plus = theta.copy()
            plus[mu] += SHIFT
            minus = theta.copy()
            minus[mu] -= SHIFT
            grad[mu] = expectation(run(c, plus, cc), hmt) - expectation(run(c, minus, cc), hmt)
        return grad
    if method == "adjoint":
        return adjoint_energy_gradient(cc, theta, hmt)[1]
    raise BpscopeError(f"unknown gradient method {method!r}")


def adjoint_energy_gradient(cc: CompiledCircuit, theta: np.ndarray,
                            hmt: Hamiltonian) -> tuple[float, np.ndarray]:
    """(energy, gradient) in one forward pass plus one reverse sweep."""
    kb = kernels.backend()
    thetas = cc.thetas(np.asarray(theta, dtype=np.float64))
    psi = StateVector.zero(cc.n)
    kb.run_rotations(psi.amps, cc.xs, cc.zs, cc.yphs, thetas)
    hx, hz, hyph, hcoef = compile_hamiltonian(hmt)
    bra = kb.apply_hamiltonian(psi.amps, hx, hz, hyph, hcoef)
    energy = float(np.real(np.vdot(psi.amps, bra)))
    grad = kb.adjoint_gradient(psi.amps, bra, cc.xs, cc.zs, cc.yphs, thetas,
                               cc.params, cc.n_params)
    return energy, grad


# -- Monte-Carlo variance -------------------------------------------------

@dataclass(frozen=True)
class McResult:
    mean: float
    variance: float
    std_error: float  # jackknife standard error of the variance
    samples: int
    seed: int
    mode: str

    @property
    def mean_std_error(self) -> float:
        if self.samples < 1:
            return 0.0
        return float(np.sqrt(max(self.variance, 0.0) / self.samples))


def jackknife_variance_error(x: np.ndarray) -> float:
    """Delete-one jackknife standard error of the sample variance."""
    n = x.shape[0]
    if n < 3:
        return 0.0
    s1 = x.sum()
    s2 = (x * x).sum()
    loo_mean = (s1 - x) / (n - 1)
    loo_var = (s2 - x * x - (n - 1) * loo_mean**2) / (n - 2)
    return float(np.sqrt((n - 1) / n * ((loo_var - loo_var.mean()) ** 2).sum()))


def mc_variance(c: Circuit, hmt: Hamiltonian, param_index: int, samples: int,
                mode: str = "cartan-uniform", seed: int = 0) -> McResult:
    """Sampled mean/variance of the derivative for one parameter.

    ``cartan-uniform`` draws every parameter uniformly from [0, 2pi);
    ``haar-sandwich`` draws Haar unitaries for each block plus a uniform
    angle for the differential rotation, matching the exact 2-design
    ensemble of the twirl engine.
    """
    if samples < 2:
        raise BpscopeError("need at least 2 samples")
    if not 0 <= param_index < c.param_count:
        raise DimensionError(f"parameter {param_index} out of range")
    if not hmt.terms:
        return McResult(0.0, 0.0, 0.0, samples, seed, mode)
    rng = make_rng(seed, 0)
    derivs = np.empty(samples)
    if mode == "cartan-uniform":
        cc = compile_circuit(c)
        for i in range(samples):
            theta = rng.uniform(0.0, 2.0 * np.pi, size=cc.n_params)
            plus = theta.copy()
            plus[param_index] += SHIFT
            minus = theta.copy()
            minus[param_index] -= SHIFT
            derivs[i] = (expectation(run(c, plus, cc), hmt)
                         - expectation(run(c, minus, cc), hmt))
    elif mode == "haar-sandwich":
        for i in range(samples):
            sample_rng = make_rng(seed, 1, i)
            angle = sample_rng.uniform(0.0, 2.0 * np.pi)
            env_state = sample_rng.bit_generator.state
            psi_p = run_haar(c, sample_rng, param_index, angle + SHIFT)
            sample_rng.bit_generator.state = env_state
            psi_m = run_haar(c, sample_rng, param_index, angle - SHIFT)
            derivs[i] = expectation(psi_p, hmt) - expectation(psi_m, hmt)
    else:
        raise BpscopeError(f"unknown mc mode {mode!r}")
    mean = float(derivs.mean())
    variance = float(derivs.var(ddof=1))
    return McResult(mean, variance, jackknife_variance_error(derivs),
                    samples, seed, mode)
