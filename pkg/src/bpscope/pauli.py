"""Exact Pauli-string algebra.

A Pauli string on N qubits is stored as two bitmasks plus a phase exponent:
bit q of `x` is set when qubit q carries X or Y, bit q of `z` when it carries
Z or Y.  The overall phase is i**phase with `phase` kept mod 4, so products
are exact and free of floating-point drift.  Qubit 0 is the leftmost letter
in the text form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import BpscopeError, DimensionError

_LETTERS = "IXYZ"

# letter code: 2*z_bit + x_bit  ->  I=0, X=1, Z=2, Y=3
_CODE_TO_LETTER = {0: "I", 1: "X", 2: "Z", 3: "Y"}
_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

# i-exponent of the single-qubit product l1 * l2, indexed [code1][code2].
# Cyclic products (XY, YZ, ZX) pick up +i, anticyclic ones -i.
_MUL_PHASE = [[0] * 4 for _ in range(4)]
for _a, _b, _g in (("X", "Y", 1), ("Y", "Z", 1), ("Z", "X", 1),
                   ("Y", "X", 3), ("Z", "Y", 3), ("X", "Z", 3)):
    _ax, _az = _LETTER_TO_BITS[_a]
    _bx, _bz = _LETTER_TO_BITS[_b]
    _MUL_PHASE[2 * _az + _ax][2 * _bz + _bx] = _g

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_PHASE_VALUE = (1, 1j, -1, -1j)
_PHASE_PREFIX = {0: "", 1: "i", 2: "-", 3: "-i"}


@dataclass(frozen=True)
class PauliString:
    """An N-qubit Pauli operator with a unit phase i**phase."""

    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise DimensionError("qubit count must be non-negative")
        mask = (1 << self.n) - 1
        if (self.x & ~mask) or (self.z & ~mask):
            raise DimensionError("mask addresses a qubit beyond the declared count")
        object.__setattr__(self, "phase", self.phase % 4)

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def from_letters(cls, letters: str, phase: int = 0) -> "PauliString":
        x = z = 0
        for q, letter in enumerate(letters.upper()):
            if letter not in _LETTER_TO_BITS:
                raise BpscopeError(f"unknown Pauli letter {letter!r}")
            xb, zb = _LETTER_TO_BITS[letter]
            x |= xb << q
            z |= zb << q
        return cls(len(letters), x, z, phase)

    @classmethod
    def from_text(cls, text: str) -> "PauliString":
        """Parse the text form, e.g. ``ZIXY``, ``-iXX`` or ``+1ZZ``."""
        body = text.strip()
        phase = 0
        for prefix, k in (("+i", 1), ("-i", 3), ("+1", 0), ("-1", 2),
                          ("i", 1), ("+", 0), ("-", 2)):
            if body.startswith(prefix) and body[len(prefix):len(prefix) + 1] in _LETTERS:
                phase = k
                body = body[len(prefix):]
                break
        if not body or any(ch not in _LETTERS for ch in body):
            raise BpscopeError(f"cannot parse Pauli text {text!r}")
        return cls.from_letters(body, phase)

    @classmethod
    def from_ops(cls, n: int, ops: dict[int, str], phase: int = 0) -> "PauliString":
        x = z = 0
        for q, letter in ops.items():
            if not 0 <= q < n:
                raise DimensionError(f"qubit {q} out of range for n={n}")
            xb, zb = _LETTER_TO_BITS[letter.upper()]
            x |= xb << q
            z |= zb << q
        return cls(n, x, z, phase)

    # -- queries ------------------------------------------------------

    def letter(self, q: int) -> str:
        if not 0 <= q < self.n:
            raise DimensionError(f"qubit {q} out of range")
        return _CODE_TO_LETTER[2 * ((self.z >> q) & 1) + ((self.x >> q) & 1)]

    def letters(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    def support(self) -> frozenset[int]:
        mask = self.x | self.z
        return frozenset(q for q in range(self.n) if (mask >> q) & 1)

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def phase_value(self) -> complex:
        return _PHASE_VALUE[self.phase]

    # -- algebra ------------------------------------------------------

    def multiply(self, other: "PauliString") -> "PauliString":
        """Operator product self * other with the exact accumulated phase."""
        if self.n != other.n:
            raise DimensionError("Pauli strings act on different qubit counts")
        g = self.phase + other.phase
        both = (self.x | self.z) & (other.x | other.z)
        m = both
        while m:
            q = (m & -m).bit_length() - 1
            c1 = 2 * ((self.z >> q) & 1) + ((self.x >> q) & 1)
            c2 = 2 * ((other.z >> q) & 1) + ((other.x >> q) & 1)
            g += _MUL_PHASE[c1][c2]
            m &= m - 1
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z, g % 4)

    __mul__ = multiply

    def commutes(self, other: "PauliString") -> bool:
        """True iff the two strings commute (symplectic parity test)."""
        if self.n != other.n:
            raise DimensionError("Pauli strings act on different qubit counts")
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def restrict(self, s: Iterable[int]) -> "PauliString":
        """Sub-string on the qubit subset `s` (ascending order), phase reset to +1."""
        qubits = sorted(set(s))
        if qubits and (qubits[0] < 0 or qubits[-1] >= self.n):
            raise DimensionError("restriction subset out of range")
        x = z = 0
        for i, q in enumerate(qubits):
            x |= ((self.x >> q) & 1) << i
            z |= ((self.z >> q) & 1) << i
        return PauliString(len(qubits), x, z, 0)

    def to_matrix(self) -> np.ndarray:
        """Dense 2**n matrix; intended for small-n cross checks only."""
        if self.n > 12:
            raise DimensionError("dense form limited to 12 qubits")
        m = np.array([[1.0 + 0j]])
        # qubit 0 is the least significant index bit, so it goes rightmost
        for q in reversed(range(self.n)):
            m = np.kron(m, _SINGLE[self.letter(q)])
        return self.phase_value() * m

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.phase] + self.letters()
