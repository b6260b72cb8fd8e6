"""Hamiltonians, the field-generalized toric code, exact diagonalization and
entanglement diagnostics.

Entropies are natural-log von Neumann entropies except where a function
documents base 2 (the Schmidt-rank area-law check); CSV emitters label the
unit in their headers.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BpscopeError, DimensionError
from .pauli import PauliString

_DENSE_ED_LIMIT = 10
_ED_LIMIT = 16


@dataclass(frozen=True)
class Hamiltonian:
    """Real-weighted Pauli sum with merged terms and a cached interaction range."""

    n: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        merged: dict[tuple[int, int], float] = {}
        for coeff, p in self.terms:
            if p.n != self.n:
                raise DimensionError("term qubit count mismatch")
            if p.phase % 2 == 1:
                raise BpscopeError("imaginary-phase Pauli term would be non-Hermitian")
            c = float(coeff) * (1.0 if p.phase == 0 else -1.0)
            key = (p.x, p.z)
            merged[key] = merged.get(key, 0.0) + c
        out = tuple(
            (c, PauliString(self.n, x, z)) for (x, z), c in merged.items() if c != 0.0
        )
        object.__setattr__(self, "terms", out)
        rng = max((p.weight() for _, p in out), default=0)
        object.__setattr__(self, "_range", rng)

    @classmethod
    def from_strings(cls, n: int, terms: Iterable[tuple[float, str]]) -> "Hamiltonian":
        """Build from (coefficient, text) pairs; text is either a full letter
        string like ``ZIZ`` or the compact form ``ZZ@[0,2]``."""
        parsed = []
        for c, t in terms:
            p = _term_from_compact(n, t) if "@" in t else PauliString.from_text(t)
            parsed.append((c, p))
        return cls(n, tuple(parsed))

    @property
    def interaction_range(self) -> int:
        """Largest term support size."""
        return self._range

    def support(self) -> frozenset[int]:
        if not self.terms:
            return frozenset()
        return frozenset().union(*(p.support() for _, p in self.terms))

    def scaled(self, factor: float) -> "Hamiltonian":
        return Hamiltonian(self.n, tuple((factor * c, p) for c, p in self.terms))

    def content_hash(self) -> str:
        payload = json.dumps(
            [[c, p.x, p.z] for c, p in sorted(self.terms, key=lambda t: (t[1].x, t[1].z))]
            + [self.n], separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:24]

    def to_sparse(self) -> sp.csr_matrix:
        dim = 1 << self.n
        cols = np.arange(dim, dtype=np.uint64)
        mat = sp.csr_matrix((dim, dim), dtype=complex)
        for coeff, p in self.terms:
            signs = np.where(np.bitwise_count(cols & np.uint64(p.z)) % 2 == 0, 1.0, -1.0)
            vals = coeff * (1j ** ((p.x & p.z).bit_count() % 4)) * signs
            rows = (cols ^ np.uint64(p.x)).astype(np.int64)
            # column m maps to row m ^ x with amplitude i**#Y * (-1)**pc(m & z)
            mat += sp.csr_matrix((vals, (rows, cols.astype(np.int64))), shape=(dim, dim))
        return mat


def _term_from_compact(n: int, text: str) -> PauliString:
    """Parse 'XY@[0,3]' into an n-qubit string."""
    letters, _, qs = text.partition("@")
    qubits = json.loads(qs)
    return PauliString.from_ops(n, dict(zip(qubits, letters)))


# -- toric lattice --------------------------------------------------------

@dataclass(frozen=True)
class ToricLattice:
    """Open square lattice of `rows` x `cols` vertices with qubits on edges.

    Edges are indexed row-major: for each vertex row, first the horizontal
    edges of that row, then the vertical edges below it.
    """

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise DimensionError("lattice needs at least 2x2 vertices")

    @property
    def n_qubits(self) -> int:
        return self.rows * (self.cols - 1) + (self.rows - 1) * self.cols

    def horizontal(self, r: int, c: int) -> int:
        """Edge between vertices (r, c) and (r, c+1)."""
        if not (0 <= r < self.rows and 0 <= c < self.cols - 1):
            raise DimensionError(f"no horizontal edge at ({r}, {c})")
        return r * (2 * self.cols - 1) + c

    def vertical(self, r: int, c: int) -> int:
        """Edge between vertices (r, c) and (r+1, c)."""
        if not (0 <= r < self.rows - 1 and 0 <= c < self.cols):
            raise DimensionError(f"no vertical edge at ({r}, {c})")
        return r * (2 * self.cols - 1) + (self.cols - 1) + c

    def vertex_star(self, r: int, c: int) -> tuple[int, ...]:
        """Edges incident to vertex (r, c); boundary stars have 2 or 3."""
        edges = []
        if c > 0:
            edges.append(self.horizontal(r, c - 1))
        if c < self.cols - 1:
            edges.append(self.horizontal(r, c))
        if r > 0:
            edges.append(self.vertical(r - 1, c))
        if r < self.rows - 1:
            edges.append(self.vertical(r, c))
        return tuple(edges)

    def plaquette(self, r: int, c: int) -> tuple[int, int, int, int]:
        """(top, left, right, bottom) edges of the face below-right of (r, c)."""
        if not (0 <= r < self.rows - 1 and 0 <= c < self.cols - 1):
            raise DimensionError(f"no plaquette at ({r}, {c})")
        return (self.horizontal(r, c), self.vertical(r, c),
                self.vertical(r, c + 1), self.horizontal(r + 1, c))

    def vertices(self):
        return [(r, c) for r in range(self.rows) for c in range(self.cols)]

    def plaquettes(self):
        return [(r, c) for r in range(self.rows - 1) for c in range(self.cols - 1)]


def toric_code(lattice: ToricLattice, h: Sequence[float] = (0.0, 0.0, 0.0),
               prefactor: Optional[float] = None) -> Hamiltonian:
    """Field-generalized toric code with boundary-truncated vertex stars.

    H = (1 - h0) * (-sum_v A_v - sum_p B_p) - sum_j (hx X_j + hy Y_j + hz Z_j)
    with A_v the Z-product on the star of v and B_p the X-product on the
    plaquette p.  The scalar h0 defaults to max(|hx|, |hy|, |hz|) and can be
    overridden via `prefactor`.
    """
    hx, hy, hz = (float(v) for v in h)
    h0 = max(abs(hx), abs(hy), abs(hz)) if prefactor is None else float(prefactor)
    n = lattice.n_qubits
    terms: list[tuple[float, PauliString]] = []
    stab = -(1.0 - h0)
    for r, c in lattice.vertices():
        terms.append((stab, PauliString.from_ops(n, {e: "Z" for e in lattice.vertex_star(r, c)})))
    for r, c in lattice.plaquettes():
        terms.append((stab, PauliString.from_ops(n, {e: "X" for e in lattice.plaquette(r, c)})))
    for q in range(n):
        if hx:
            terms.append((-hx, PauliString.from_ops(n, {q: "X"})))
        if hy:
            terms.append((-hy, PauliString.from_ops(n, {q: "Y"})))
        if hz:
            terms.append((-hz, PauliString.from_ops(n, {q: "Z"})))
    return Hamiltonian(n, tuple(terms))


# -- exact diagonalization -------------------------------------------------

def _cache_dir() -> Optional[Path]:
    root = os.environ.get("BPSCOPE_CACHE_DIR")
    if root is None:
        root = os.path.join(os.path.expanduser("~"), ".cache", "bpscope")
    if root == "":
        return None
    path = Path(root)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError:
        return None
    return path


def ground_pair(hmt: Hamiltonian, use_cache: bool = True) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit ground vector."""
    if hmt.n > _ED_LIMIT:
        raise DimensionError(f"exact diagonalization limited to {_ED_LIMIT} qubits")
    cache = _cache_dir() if use_cache else None
    if cache is not None:
        f = cache / f"ed_{hmt.content_hash()}.npz"
        if f.exists():
            data = np.load(f)
            return float(data["energy"]), data["state"]
    if hmt.n <= _DENSE_ED_LIMIT:
        mat = hmt.to_sparse().toarray()
        vals, vecs = np.linalg.eigh(mat)
        energy, state = float(vals[0]), np.ascontiguousarray(vecs[:, 0])
    else:
        mat = hmt.to_sparse()
        vals, vecs = spla.eigsh(mat, k=1, which="SA", maxiter=20000)
        energy, state = float(vals[0]), np.ascontiguousarray(vecs[:, 0])
    state = state / np.linalg.norm(state)
    if cache is not None:
        try:
            np.savez_compressed(cache / f"ed_{hmt.content_hash()}.npz",
                                energy=energy, state=state)
        except OSError:
            pass
    return energy, state


def ground_energy(hmt: Hamiltonian, use_cache: bool = True) -> float:
    return ground_pair(hmt, use_cache)[0]


def ground_state(hmt: Hamiltonian, use_cache: bool = True) -> np.ndarray:
    return ground_pair(hmt, use_cache)[1]


# -- entanglement ----------------------------------------------------------

def reduced_density_matrix(amps: np.ndarray, region: Sequence[int], n: int) -> np.ndarray:
    region = sorted(set(region))
    if any(q < 0 or q >= n for q in region):
        raise DimensionError("region outside the qubit range")
    k = len(region)
    rest = [q for q in range(n) if q not in region]
    tensor = amps.reshape([2] * n)
    # tensor axis i corresponds to qubit n-1-i
    order = [n - 1 - q for q in region] + [n - 1 - q for q in rest]
    psi = np.transpose(tensor, order).reshape(2**k, -1)
    return psi @ psi.conj().T


def entanglement_entropy(amps: np.ndarray, region: Sequence[int], n: int,
                         base: float = np.e) -> float:
    """Von Neumann entropy of the reduced state on `region` (natural log by
    default; pass base=2 for bits)."""
    region = sorted(set(region))
    if not region or len(region) >= n:
        raise DimensionError("region must be a proper nonempty subset")
    rho = reduced_density_matrix(amps, region, n)
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > 1e-12]
    s = float(-(evals * np.log(evals)).sum())
    return s / np.log(base)


def topological_entropy(amps: np.ndarray, a: Sequence[int], b: Sequence[int],
                        c: Sequence[int], n: int) -> float:
    """Tripartite information S_A + S_B + S_C - S_AB - S_BC - S_CA + S_ABC (nats)."""
    a, b, c = set(a), set(b), set(c)
    if a & b or b & c or a & c:
        raise DimensionError("regions must be pairwise disjoint")
    ent = lambda region: entanglement_entropy(amps, region, n)
    return (ent(a) + ent(b) + ent(c)
            - ent(a | b) - ent(b | c) - ent(c | a) + ent(a | b | c))


def area_law_check_state(amps: np.ndarray, region: Sequence[int], n: int,
                         max_local_depth: int,
                         boundary_size: int) -> tuple[float, float, bool]:
    """Schmidt-rank bound check: entropy in bits vs max_local_depth * |boundary|."""
    entropy_bits = entanglement_entropy(amps, region, n, base=2)
    bound = float(max_local_depth * boundary_size)
    return entropy_bits, bound, entropy_bits <= bound + 1e-9


def area_law_check(circuit, theta, cut: Sequence[int],
                   boundary_size: int) -> tuple[float, float, bool]:
    """Run the circuit and check its output state against the entropy bound.

    `boundary_size` is the number of lattice edges the cut crosses, which
    only the caller's lattice knows.  Entropy is measured in bits because
    the bound counts Schmidt-rank doublings.
    """
    from .simulator import run

    psi = run(circuit, theta)
    return area_law_check_state(psi.amps, cut, circuit.qubit_count,
                                circuit.max_local_depth(), boundary_size)
