"""Circuit intermediate representation: parametrized gates grouped into blocks.

Blocks are the unit of analysis everywhere: support geometry, twirling and
the variance bounds all operate on the ordered block list.  Block and qubit
indices are 0-based.  A block is either ``design2`` (treated as an
independent local 2-design by the analysis modules) or ``structured`` (any
fixed sub-circuit; the 2-design-only computations refuse those).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import BpscopeError, DimensionError
from .pauli import PauliString

DESIGN2 = "design2"
STRUCTURED = "structured"


@dataclass(frozen=True)
class Gate:
    """A rotation exp(-i * theta * generator).

    Exactly one of `param_index` (trainable) and `fixed_angle` (frozen) is
    set.  The generator must carry phase +1 so the rotation is well defined.
    """

    generator: PauliString
    param_index: Optional[int] = None
    fixed_angle: Optional[float] = None

    def __post_init__(self):
        if (self.param_index is None) == (self.fixed_angle is None):
            raise BpscopeError("gate needs exactly one of param_index / fixed_angle")
        if self.generator.phase != 0:
            raise BpscopeError("gate generator must have phase +1")

    @property
    def is_trainable(self) -> bool:
        return self.param_index is not None


@dataclass(frozen=True)
class Block:
    """A contiguous group of gates with a cached support."""

    gates: tuple[Gate, ...]
    kind: str = DESIGN2
    support: frozenset[int] = field(init=False)

    def __post_init__(self):
        if self.kind not in (DESIGN2, STRUCTURED):
            raise BpscopeError(f"unknown block kind {self.kind!r}")
        sup = frozenset().union(*(g.generator.support() for g in self.gates)) \
            if self.gates else frozenset()
        if not sup:
            raise BpscopeError("block support must be nonempty")
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "support", sup)

    @property
    def support_mask(self) -> int:
        m = 0
        for q in self.support:
            m |= 1 << q
        return m


@dataclass(frozen=True)
class Circuit:
    """Ordered blocks on `qubit_count` qubits; block 0 is applied first."""

    qubit_count: int
    blocks: tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.qubit_count < 1:
            raise DimensionError("qubit_count must be positive")
        params = []
        for b in self.blocks:
            if any(q >= self.qubit_count or q < 0 for q in b.support):
                raise DimensionError("block support outside the qubit range")
            for g in b.gates:
                if g.generator.n != self.qubit_count:
                    raise DimensionError("gate generator qubit count mismatch")
                if g.param_index is not None:
                    params.append(g.param_index)
        if sorted(params) != list(range(len(params))):
            raise BpscopeError("parameter indices must be 0..M-1 without gaps or repeats")
        object.__setattr__(self, "_param_count", len(params))

    # -- basic queries -------------------------------------------------

    @property
    def param_count(self) -> int:
        return self._param_count

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def support(self) -> frozenset[int]:
        if not self.blocks:
            return frozenset()
        return frozenset().union(*(b.support for b in self.blocks))

    def gates_in_order(self):
        for k, b in enumerate(self.blocks):
            for g in b.gates:
                yield k, g

    def block_of_param(self, param_index: int) -> int:
        for k, b in enumerate(self.blocks):
            for g in b.gates:
                if g.param_index == param_index:
                    return k
        raise DimensionError(f"no gate carries parameter {param_index}")

    def gate_of_param(self, param_index: int) -> Gate:
        for _, g in self.gates_in_order():
            if g.param_index == param_index:
                return g
        raise DimensionError(f"no gate carries parameter {param_index}")

    def _check_block(self, k: int) -> None:
        if not 0 <= k < len(self.blocks):
            raise DimensionError(f"block index {k} out of range")

    # -- support geometry ----------------------------------------------

    def local_depth(self, q: int) -> int:
        """Number of blocks acting on qubit q."""
        if not 0 <= q < self.qubit_count:
            raise DimensionError(f"qubit {q} out of range")
        return sum(1 for b in self.blocks if q in b.support)

    def max_local_depth(self) -> int:
        if not self.blocks:
            return 0
        return max(self.local_depth(q) for q in range(self.qubit_count))

    def global_depth(self) -> int:
        """Minimum layer count where blocks within a layer have disjoint supports.

        Computed by as-soon-as-possible scheduling: a block lands one layer
        after the deepest earlier block it overlaps, which is optimal for
        this commutation criterion.
        """
        layer_of = []
        depth = 0
        for k, b in enumerate(self.blocks):
            layer = 1
            for j in range(k):
                if self.blocks[j].support & b.support:
                    layer = max(layer, layer_of[j] + 1)
            layer_of.append(layer)
            depth = max(depth, layer)
        return depth

    def connecting_support(self, k: int, k2: int) -> frozenset[int]:
        """Shared qubits of two blocks not acted on by any block between them."""
        self._check_block(k)
        self._check_block(k2)
        if k == k2:
            raise DimensionError("connecting support needs two distinct blocks")
        lo, hi = min(k, k2), max(k, k2)
        shared = self.blocks[lo].support & self.blocks[hi].support
        for j in range(lo + 1, hi):
            shared -= self.blocks[j].support
        return frozenset(shared)

    def forward_residual_support(self, k: int) -> frozenset[int]:
        """Qubits of block k untouched by earlier blocks (head qubits)."""
        self._check_block(k)
        res = set(self.blocks[k].support)
        for j in range(k):
            res -= self.blocks[j].support
        return frozenset(res)

    def backward_residual_support(self, k: int) -> frozenset[int]:
        """Qubits of block k untouched by later blocks (tail qubits)."""
        self._check_block(k)
        res = set(self.blocks[k].support)
        for j in range(k + 1, len(self.blocks)):
            res -= self.blocks[j].support
        return frozenset(res)

    def causal_cone_blocks(self, observable_support: Iterable[int]) -> frozenset[int]:
        """Blocks surviving unitary cancellation for an observable on the given qubits."""
        active = set(observable_support)
        if any(q >= self.qubit_count or q < 0 for q in active):
            raise DimensionError("observable support outside the qubit range")
        cone = set()
        for k in range(len(self.blocks) - 1, -1, -1):
            if self.blocks[k].support & active:
                cone.add(k)
                active |= self.blocks[k].support
        return frozenset(cone)

    def last_block_on(self, q: int) -> Optional[int]:
        """Index of the last block acting on qubit q, or None."""
        for k in range(len(self.blocks) - 1, -1, -1):
            if q in self.blocks[k].support:
                return k
        return None

    def all_design2(self) -> bool:
        return all(b.kind == DESIGN2 for b in self.blocks)


# -- JSON form ----------------------------------------------------------

def _gate_to_json(g: Gate) -> dict:
    sup = sorted(g.generator.support())
    letters = "".join(g.generator.letter(q) for q in sup)
    d = {"generator": f"{letters}@{json.dumps(sup)}"}
    if g.param_index is not None:
        d["param"] = g.param_index
    else:
        d["angle"] = g.fixed_angle
    return d


def _gate_from_json(d: dict, n: int) -> Gate:
    spec = d["generator"]
    if "@" not in spec:
        raise BpscopeError(f"generator {spec!r} must look like 'ZZ@[3,4]'")
    letters, _, qs = spec.partition("@")
    qubits = json.loads(qs)
    if len(letters) != len(qubits):
        raise BpscopeError(f"generator {spec!r}: letter and qubit counts differ")
    gen = PauliString.from_ops(n, dict(zip(qubits, letters)))
    if "param" in d:
        return Gate(gen, param_index=int(d["param"]))
    return Gate(gen, fixed_angle=float(d["angle"]))


def circuit_to_json(c: Circuit) -> dict:
    return {
        "qubits": c.qubit_count,
        "blocks": [
            {"kind": b.kind, "gates": [_gate_to_json(g) for g in b.gates]}
            for b in c.blocks
        ],
    }


def circuit_from_json(d: dict) -> Circuit:
    n = int(d["qubits"])
    blocks = []
    for bd in d["blocks"]:
        gates = tuple(_gate_from_json(g, n) for g in bd["gates"])
        blocks.append(Block(gates, kind=bd.get("kind", DESIGN2)))
    return Circuit(n, tuple(blocks))
