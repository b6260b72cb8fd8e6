"""Vectorised numpy implementation of the statevector kernels.

Amplitude index convention: basis state |b_{N-1} ... b_1 b_0> sits at integer
index b, with qubit q mapped to bit q.  A Pauli string enters as the pair
(x, z) of bitmasks (Y sets both) plus the complex unit i**(#Y), and acts as

    P|b> = yph * (-1)^popcount(b & z) |b ^ x>.
"""

from __future__ import annotations

import numpy as np


def _sign(dim: int, z: int) -> np.ndarray:
    b = np.arange(dim, dtype=np.uint64)
    pc = np.bitwise_count(b & np.uint64(z))
    return np.where(pc % 2 == 0, 1.0, -1.0)


def apply_rotation(psi: np.ndarray, x: int, z: int, yph: complex, theta: float) -> None:
    """In-place psi <- exp(-i * theta * P) psi for involutory Pauli P."""
    dim = psi.shape[0]
    c = np.cos(theta)
    s = np.sin(theta)
    sign = _sign(dim, z)
    if x == 0:
        psi *= c - 1j * s * yph * sign
        return
    flipped = np.arange(dim) ^ x
    p_psi = (yph * sign * psi)[flipped]  # (P psi)[b] = yph * sign(b^x) * psi[b^x]
    psi *= c
    psi -= 1j * s * p_psi


def apply_pauli(psi: np.ndarray, x: int, z: int, yph: complex) -> np.ndarray:
    """Return P psi as a new array."""
    dim = psi.shape[0]
    out = yph * _sign(dim, z) * psi
    if x:
        out = out[np.arange(dim) ^ x]
    return out


def expval_pauli(psi: np.ndarray, x: int, z: int, yph: complex) -> complex:
    """<psi| P |psi>."""
    return complex(np.vdot(psi, apply_pauli(psi, x, z, yph)))


def cross_pauli(bra: np.ndarray, psi: np.ndarray, x: int, z: int, yph: complex) -> complex:
    """<bra| P |psi> for distinct vectors."""
    return complex(np.vdot(bra, apply_pauli(psi, x, z, yph)))


def apply_hamiltonian(psi: np.ndarray, xs: np.ndarray, zs: np.ndarray,
                      yphs: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Return H psi for H given as stacked Pauli terms."""
    out = np.zeros_like(psi)
    for j in range(len(coeffs)):
        out += coeffs[j] * apply_pauli(psi, int(xs[j]), int(zs[j]), complex(yphs[j]))
    return out


def run_rotations(psi: np.ndarray, xs: np.ndarray, zs: np.ndarray,
                  yphs: np.ndarray, thetas: np.ndarray) -> None:
    """Apply a sequence of Pauli rotations in place."""
    for g in range(len(thetas)):
        apply_rotation(psi, int(xs[g]), int(zs[g]), complex(yphs[g]), float(thetas[g]))


def adjoint_gradient(psi: np.ndarray, bra: np.ndarray, gate_x: np.ndarray,
                     gate_z: np.ndarray, gate_yph: np.ndarray, thetas: np.ndarray,
                     param_of_gate: np.ndarray, n_params: int) -> np.ndarray:
    """Reverse sweep computing d<H>/d(theta) for every trainable rotation.

    `psi` must hold the fully evolved state and `bra` H|psi>; both are
    consumed (unwound to the initial state).  Gradient component of gate g:
    2 * Im(<bra_g| P_g |psi_g>).
    """
    grad = np.zeros(n_params)
    for g in range(len(thetas) - 1, -1, -1):
        x, z, yph, th = int(gate_x[g]), int(gate_z[g]), complex(gate_yph[g]), float(thetas[g])
        p = int(param_of_gate[g])
        if p >= 0:
            grad[p] = 2.0 * cross_pauli(bra, psi, x, z, yph).imag
        apply_rotation(psi, x, z, yph, -th)
        apply_rotation(bra, x, z, yph, -th)
    return grad


def apply_dense(psi: np.ndarray, u: np.ndarray, qubits: np.ndarray) -> np.ndarray:
    """Apply a dense unitary on the given qubits; returns a new array."""
    n = psi.shape[0].bit_length() - 1
    k = len(qubits)
    tensor = psi.reshape([2] * n)
    # axis i of the tensor corresponds to qubit n-1-i
    axes = [n - 1 - int(q) for q in qubits]
    moved = np.moveaxis(tensor, axes, range(k))
    shape = moved.shape
    out = (u @ moved.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(out, range(k), axes).reshape(-1).copy()


def norm2(psi: np.ndarray) -> float:
    return float(np.real(np.vdot(psi, psi)))
