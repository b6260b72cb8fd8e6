"""Numba-compiled statevector kernels; semantics match numpy_impl exactly."""

from __future__ import annotations

import numpy as np
from numba import njit

_JIT = dict(cache=True, fastmath=False)


@njit(**_JIT)
def _popcount(v: np.uint64) -> np.int64:
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + ((v >> np.uint64(2)) & np.uint64(0x3333333333333333))
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return np.int64((v * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(**_JIT)
def _phase(b: np.int64, z: np.int64, yph: np.complex128) -> np.complex128:
    if _popcount(np.uint64(b & z)) & 1:
        return -yph
    return yph


@njit(**_JIT)
def apply_rotation(psi, x, z, yph, theta):
    dim = psi.shape[0]
    c = np.cos(theta)
    s = np.sin(theta)
    if x == 0:
        for b in range(dim):
            psi[b] *= c - 1j * s * _phase(b, z, yph)
        return
    for b in range(dim):
        p = b ^ x
        if b < p:
            fb = _phase(b, z, yph)
            fp = _phase(p, z, yph)
            ab = psi[b]
            ap = psi[p]
            psi[b] = c * ab - 1j * s * fp * ap
            psi[p] = c * ap - 1j * s * fb * ab


@njit(**_JIT)
def apply_pauli(psi, x, z, yph):
    dim = psi.shape[0]
    out = np.empty_like(psi)
    for b in range(dim):
        m = b ^ x
        out[b] = _phase(m, z, yph) * psi[m]
    return out


@njit(**_JIT)
def expval_pauli(psi, x, z, yph):
    dim = psi.shape[0]
    acc = 0.0 + 0.0j
    for b in range(dim):
        m = b ^ x
        acc += np.conj(psi[b]) * _phase(m, z, yph) * psi[m]
    return acc


@njit(**_JIT)
def cross_pauli(bra, psi, x, z, yph):
    dim = psi.shape[0]
    acc = 0.0 + 0.0j
    for b in range(dim):
        m = b ^ x
        acc += np.conj(bra[b]) * _phase(m, z, yph) * psi[m]
    return acc


@njit(**_JIT)
def apply_hamiltonian(psi, xs, zs, yphs, coeffs):
    dim = psi.shape[0]
    out = np.zeros_like(psi)
    for j in range(coeffs.shape[0]):
        x = xs[j]
        z = zs[j]
        yph = yphs[j]
        cj = coeffs[j]
        for b in range(dim):
            m = b ^ x
            out[b] += cj * _phase(m, z, yph) * psi[m]
    return out


@njit(**_JIT)
def run_rotations(psi, xs, zs, yphs, thetas):
    for g in range(thetas.shape[0]):
        apply_rotation(psi, xs[g], zs[g], yphs[g], thetas[g])


@njit(**_JIT)
def adjoint_gradient(psi, bra, gate_x, gate_z, gate_yph, thetas, param_of_gate, n_params):
    grad = np.zeros(n_params)
    for g in range(thetas.shape[0] - 1, -1, -1):
        x = gate_x[g]
        z = gate_z[g]
        yph = gate_yph[g]
        p = param_of_gate[g]
        if p >= 0:
            acc = 0.0 + 0.0j
            for b in range(psi.shape[0]):
                m = b ^ x
                acc += np.conj(bra[b]) * _phase(m, z, yph) * psi[m]
            grad[p] = 2.0 * acc.imag
        apply_rotation(psi, x, z, yph, -thetas[g])
        apply_rotation(bra, x, z, yph, -thetas[g])
    return grad


@njit(**_JIT)
def apply_dense(psi, u, qubits):
    dim = psi.shape[0]
    k = qubits.shape[0]
    du = 1 << k
    qmask = 0
    for i in range(k):
        qmask |= 1 << qubits[i]
    offs = np.empty(du, dtype=np.int64)
    for m in range(du):
        off = 0
        for i in range(k):
            if (m >> i) & 1:
                off |= 1 << qubits[i]
        offs[m] = off
    out = np.empty_like(psi)
    scratch = np.empty(du, dtype=np.complex128)
    for base in range(dim):
        if base & qmask:
            continue
        for m in range(du):
            scratch[m] = psi[base | offs[m]]
        for m in range(du):
            acc = 0.0 + 0.0j
            for mm in range(du):
                acc += u[m, mm] * scratch[mm]
            out[base | offs[m]] = acc
    return out


@njit(**_JIT)
def norm2(psi):
    acc = 0.0
    for b in range(psi.shape[0]):
        acc += psi[b].real * psi[b].real + psi[b].imag * psi[b].imag
    return acc
