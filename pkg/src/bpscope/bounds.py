"""Analytic lower bounds on the derivative variance from circuit geometry.

Three bounds with increasing structure requirements:

* path-set bound: per Hamiltonian term, 2**(1 - 2*l(P) - w(P)) with a chosen
  legal path set P through the differential block;
* locality bound: 4**(-r * chi * beta) * sum_j 2 * lambda_j**2 over terms
  touching the differential block (r = Hamiltonian range, chi = max local
  depth, beta = max block size);
* ladder bound: for chain layouts, per term 2**(1 - 2*beta*(dk + r)) with dk
  the block distance from the differential block to the last block on the
  term's support.

All bounds assume every block is an independent local 2-design and that the
differential gate is sandwiched inside its block by 2-designs; reports carry
``sandwich_assumed=True`` to make the latter visible (border gates can
escape it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .circuit import Circuit
from .errors import AssumptionViolation, CoverageError, LayoutError
from .geometry import PathSet, exponent, find_path_set
from .models import Hamiltonian

THEOREM1 = "theorem1"
THEOREM2 = "theorem2"
LADDER = "ladder"


@dataclass(frozen=True)
class BoundReport:
    kind: str
    param_index: int
    per_term: tuple[tuple[int, Optional[PathSet], float], ...]
    total: float
    sandwich_assumed: bool = True

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "param_index": self.param_index,
            "total": self.total,
            "sandwich_assumed": self.sandwich_assumed,
            "per_term": [
                {"term": j, "path_set": ps.to_json() if ps else None, "contribution": v}
                for j, ps, v in self.per_term
            ],
        }


def _common_checks(c: Circuit, hmt: Hamiltonian, param_index: int) -> int:
    if not c.all_design2():
        raise AssumptionViolation("bounds require every block to be a local 2-design")
    if not hmt.support() <= c.support():
        raise CoverageError("circuit support must cover the Hamiltonian support")
    return c.block_of_param(param_index)


def theorem1_bound(c: Circuit, hmt: Hamiltonian, param_index: int) -> BoundReport:
    """Path-set bound: sum_j lambda_j**2 * 2**(1 - 2*l(P_j) - w(P_j))."""
    diff_block = _common_checks(c, hmt, param_index)
    rows = []
    total = 0.0
    for j, (coeff, h) in enumerate(hmt.terms):
        ps = find_path_set(c, diff_block, h.support())
        if ps is None:
            rows.append((j, None, 0.0))
            continue
        contrib = coeff * coeff * 2.0 ** (1.0 - exponent(c, ps))
        rows.append((j, ps, contrib))
        total += contrib
    return BoundReport(THEOREM1, param_index, tuple(rows), total)


def theorem2_bound(c: Circuit, hmt: Hamiltonian, param_index: int) -> BoundReport:
    """Locality bound 4**(-r*chi*beta) * sum over terms hitting the block."""
    diff_block = _common_checks(c, hmt, param_index)
    r = hmt.interaction_range
    chi = c.max_local_depth()
    beta = max((len(b.support) for b in c.blocks), default=0)
    prefactor = 4.0 ** (-(r * chi * beta))
    sup = c.blocks[diff_block].support
    rows = []
    total = 0.0
    for j, (coeff, h) in enumerate(hmt.terms):
        if h.support() & sup:
            contrib = prefactor * 2.0 * coeff * coeff
        else:
            contrib = 0.0
        rows.append((j, None, contrib))
        total += contrib
    return BoundReport(THEOREM2, param_index, tuple(rows), total)


def is_ladder_layout(c: Circuit) -> bool:
    """Chain layout: consecutive blocks overlap, non-adjacent ones are disjoint."""
    if c.block_count == 0:
        return False
    for k in range(c.block_count - 1):
        if not (c.blocks[k].support & c.blocks[k + 1].support):
            return False
    for k in range(c.block_count):
        for k2 in range(k + 2, c.block_count):
            if c.blocks[k].support & c.blocks[k2].support:
                return False
    return True


def ladder_bound(c: Circuit, hmt: Hamiltonian, param_index: int) -> BoundReport:
    """Chain bound: per term 2**(1 - 2*beta*(dk + r)), terms behind the block drop."""
    diff_block = _common_checks(c, hmt, param_index)
    if not is_ladder_layout(c):
        raise LayoutError("ladder bound requires a chain layout")
    r = hmt.interaction_range
    beta = max(len(b.support) for b in c.blocks)
    rows = []
    total = 0.0
    for j, (coeff, h) in enumerate(hmt.terms):
        last = max((k for k in range(c.block_count)
                    if c.blocks[k].support & h.support()), default=None)
        if last is None or last < diff_block:
            rows.append((j, None, 0.0))
            continue
        dk = last - diff_block
        contrib = coeff * coeff * 2.0 ** (1.0 - 2.0 * beta * (dk + r))
        rows.append((j, None, contrib))
        total += contrib
    return BoundReport(LADDER, param_index, tuple(rows), total)
