"""Circuit families: Cartan two-qubit blocks arranged as 1D ladders and
brickwalls or as sequential plaquette circuits on the toric lattice.

Every block is a 15-parameter Cartan template treated as a local 2-design.
2D families follow the plaquette slot tables shipped in
``data/plaquette_slots.json``; plaquettes are traversed left to right, then
top to bottom.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .circuit import Block, Circuit, Gate
from .errors import BpscopeError, ConfigError
from .models import ToricLattice
from .pauli import PauliString

FAMILIES = ("ladder", "two_way_ladder", "brickwall", "fdc", "gldc",
            "fldc_claw", "fldc_ushape")
LATTICE_FAMILIES = ("fdc", "gldc", "fldc_claw", "fldc_ushape")

PARAMS_PER_BLOCK = 15

# offsets of the three marked differential gates inside a Cartan block:
# the Y rotation of the opening single-qubit layer (second qubit), the
# middle YY rotation, and the Y rotation of the closing layer
DIFF_OFFSETS = {"ry1": 3, "ryy": 7, "ry2": 12}


def _slot_tables() -> dict:
    with resources.files("bpscope.data").joinpath("plaquette_slots.json").open() as f:
        return json.load(f)


_SLOTS = _slot_tables()


@dataclass(frozen=True)
class AnsatzSpec:
    family: str
    qubits: Optional[int] = None          # 1D families
    rows: Optional[int] = None            # lattice vertex rows (2D families)
    cols: Optional[int] = None
    reps: Optional[int] = None            # brickwall layers / fdc repetitions

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError("ansatz.family", f"unknown family {self.family!r}")
        if self.family in LATTICE_FAMILIES:
            if not self.rows or not self.cols:
                raise ConfigError("ansatz.rows", f"{self.family} needs lattice dims")
        elif not self.qubits or self.qubits < 2:
            raise ConfigError("ansatz.qubits", f"{self.family} needs qubits >= 2")
        if self.family == "brickwall" and (self.reps or 0) < 1:
            raise ConfigError("ansatz.reps", "brickwall needs reps >= 1")

    @classmethod
    def from_json(cls, d: dict) -> "AnsatzSpec":
        try:
            return cls(family=d["family"], qubits=d.get("qubits"),
                       rows=d.get("rows"), cols=d.get("cols"), reps=d.get("reps"))
        except KeyError as exc:
            raise ConfigError("ansatz", f"missing key {exc}") from exc

    def to_json(self) -> dict:
        out = {"family": self.family}
        for key in ("qubits", "rows", "cols", "reps"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out


@dataclass(frozen=True)
class BuiltAnsatz:
    circuit: Circuit
    manifest: tuple[dict, ...]  # one entry per block: position metadata


def cartan_block(n: int, q1: int, q2: int, param_offset: int) -> Block:
    """Universal two-qubit block: Rz Ry Rz per qubit, XX YY ZZ couplers,
    Rz Ry Rz per qubit again; 15 parameters in application order."""
    if q1 == q2:
        raise BpscopeError("Cartan block needs two distinct qubits")
    single = lambda q, letter: PauliString.from_ops(n, {q: letter})
    pair = lambda letter: PauliString.from_ops(n, {q1: letter, q2: letter})
    layer = ("Z", "Y", "Z")
    gens = []
    for letter in layer:
        gens.extend([single(q1, letter), single(q2, letter)])
    gens.extend([pair("X"), pair("Y"), pair("Z")])
    for letter in layer:
        gens.extend([single(q1, letter), single(q2, letter)])
    gates = tuple(Gate(g, param_index=param_offset + i) for i, g in enumerate(gens))
    return Block(gates, kind="design2")


def _chain_pairs(spec: AnsatzSpec) -> list[tuple[int, int]]:
    n = spec.qubits
    down = [(i, i + 1) for i in range(n - 1)]
    if spec.family == "ladder":
        return down
    if spec.family == "two_way_ladder":
        return down + down[-2::-1]
    if spec.family == "brickwall":
        pairs = []
        for layer in range(spec.reps):
            start = layer % 2
            pairs.extend((i, i + 1) for i in range(start, n - 1, 2))
        return pairs
    raise BpscopeError(f"not a chain family: {spec.family}")


def _plaquette_edge(lat: ToricLattice, r: int, c: int, name: str) -> int:
    top, left, right, bottom = lat.plaquette(r, c)
    return {"top": top, "left": left, "right": right, "bottom": bottom}[name]


def _lattice_blocks(spec: AnsatzSpec) -> tuple[ToricLattice, list[tuple[dict, tuple[int, int]]]]:
    lat = ToricLattice(spec.rows, spec.cols)
    slots = _SLOTS["claw" if spec.family == "fldc_claw" else
                   "ushape" if spec.family == "fldc_ushape" else "claw"]
    placed = []
    if spec.family in ("fldc_claw", "fldc_ushape"):
        for r, c in lat.plaquettes():
            for slot, (e1, e2) in enumerate(slots):
                pair = (_plaquette_edge(lat, r, c, e1), _plaquette_edge(lat, r, c, e2))
                placed.append(({"plaquette": [r, c], "slot": slot}, pair))
    else:  # fdc / gldc: same slot across all plaquettes before the next slot
        reps = spec.reps or (lat.n_qubits if spec.family == "gldc" else 1)
        # vertical couplers of adjacent plaquette rows share an edge, so each
        # slot runs over even plaquette rows before odd ones to stay two
        # layers deep regardless of lattice size
        ordered = ([p for p in lat.plaquettes() if p[0] % 2 == 0]
                   + [p for p in lat.plaquettes() if p[0] % 2 == 1])
        for rep in range(reps):
            for slot, (e1, e2) in enumerate(slots):
                for r, c in ordered:
                    pair = (_plaquette_edge(lat, r, c, e1), _plaquette_edge(lat, r, c, e2))
                    placed.append(({"plaquette": [r, c], "slot": slot, "rep": rep}, pair))
    return lat, placed


def build(spec: AnsatzSpec) -> BuiltAnsatz:
    """Assemble the circuit for a family spec plus a block-position manifest."""
    if spec.family in LATTICE_FAMILIES:
        lat, placed = _lattice_blocks(spec)
        n = lat.n_qubits
        blocks = []
        manifest = []
        for k, (meta, (a, b)) in enumerate(placed):
            q1, q2 = sorted((a, b))
            blocks.append(cartan_block(n, q1, q2, PARAMS_PER_BLOCK * k))
            manifest.append({"block": k, "qubits": [q1, q2], **meta})
        return BuiltAnsatz(Circuit(n, tuple(blocks)), tuple(manifest))
    pairs = _chain_pairs(spec)
    blocks = []
    manifest = []
    for k, (q1, q2) in enumerate(pairs):
        blocks.append(cartan_block(spec.qubits, q1, q2, PARAMS_PER_BLOCK * k))
        manifest.append({"block": k, "qubits": [q1, q2]})
    return BuiltAnsatz(Circuit(spec.qubits, tuple(blocks)), tuple(manifest))


def diff_param_index(block_index: int, which: str = "ryy") -> int:
    """Parameter index of a marked differential gate in a Cartan-block circuit."""
    if which not in DIFF_OFFSETS:
        raise BpscopeError(f"unknown differential gate {which!r}; "
                           f"choose from {sorted(DIFF_OFFSETS)}")
    return PARAMS_PER_BLOCK * block_index + DIFF_OFFSETS[which]
