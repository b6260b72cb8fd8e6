"""Exact gradient variance under the local-2-design assumption.

The doubled-Pauli state is compressed to support patterns: averaging a block
over a 2-design maps any doubled Pauli that is nontrivial on the block to the
uniform mixture of all nontrivial doubled Paulis there, so the state stays a
mixture of classes "uniform over strings with support exactly T".  A class is
stored as its total weight keyed by the support bitmask T.  One block's
channel redistributes the weight of every intersecting pattern over
(T - s) | T' for each nonempty T' inside the block support s, with factor
3**|T'| / (4**|s| - 1); patterns disjoint from s pass through.  The
differential block additionally kills disjoint patterns and scales survivors
by 2 * 4**|s| / (4**|s| - 1).  At the end the all-|0> expectation keeps the
Z/identity-only member of each class, a 3**-|T| fraction, so the variance is
sum_T w(T) * 3**-|T|.

Weights stay within a class population of at most 2**N patterns, which keeps
12-qubit circuits exact and cheap; an optional pruning threshold caps pattern
growth with the discarded mass reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .circuit import Circuit
from .errors import AssumptionViolation, BpscopeError, CoverageError, DimensionError
from .pauli import PauliString

DEFAULT_PRUNE = 1e-15


def _mask(qubits: Iterable[int]) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


def _submasks(mask: int):
    """All nonempty submasks of `mask`."""
    sub = mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


@dataclass
class SupportDistribution:
    """Sparse nonnegative weights over nonempty qubit-subset patterns."""

    n: int
    weights: dict[int, float] = field(default_factory=dict)
    pruned_mass: float = 0.0

    @classmethod
    def point(cls, n: int, pattern: Iterable[int]) -> "SupportDistribution":
        m = _mask(pattern)
        if m == 0:
            raise BpscopeError("pattern must be nonempty")
        return cls(n, {m: 1.0})

    def total(self) -> float:
        return sum(self.weights.values())

    def patterns(self) -> dict[frozenset[int], float]:
        return {
            frozenset(q for q in range(self.n) if (m >> q) & 1): w
            for m, w in self.weights.items()
        }

    def z_fraction(self) -> float:
        """sum_T w(T) * 3**-|T|: the weight on Z/identity-only members."""
        return sum(w * 3.0 ** (-m.bit_count()) for m, w in self.weights.items())

    def prune(self, threshold: float) -> None:
        if threshold <= 0:
            return
        drop = [m for m, w in self.weights.items() if w < threshold]
        for m in drop:
            self.pruned_mass += self.weights.pop(m)


def twirl_step(d: SupportDistribution, s: Iterable[int],
               prune: float = DEFAULT_PRUNE) -> SupportDistribution:
    """One 2-design block channel on support s; weight sum is preserved."""
    smask = _mask(s)
    if smask == 0:
        raise BpscopeError("twirl support must be nonempty")
    denom = 4.0 ** smask.bit_count() - 1.0
    out: dict[int, float] = {}
    for m, w in d.weights.items():
        if m & smask == 0:
            out[m] = out.get(m, 0.0) + w
            continue
        rest = m & ~smask
        for sub in _submasks(smask):
            child = rest | sub
            out[child] = out.get(child, 0.0) + w * (3.0 ** sub.bit_count()) / denom
    res = SupportDistribution(d.n, out, d.pruned_mass)
    res.prune(prune)
    return res


def differential_step(d: SupportDistribution, block_support: Iterable[int],
                      prune: float = DEFAULT_PRUNE) -> SupportDistribution:
    """Sandwiched commutator channel: twirl, kill disjoint patterns, rescale.

    Patterns trivial on the block support contribute nothing; survivors pick
    up the factor 2 * 4**|s| / (4**|s| - 1) on top of the smear.
    """
    smask = _mask(block_support)
    if smask == 0:
        raise BpscopeError("differential support must be nonempty")
    kept = SupportDistribution(
        d.n, {m: w for m, w in d.weights.items() if m & smask}, d.pruned_mass)
    res = twirl_step(kept, block_support, prune)
    four = 4.0 ** smask.bit_count()
    factor = 2.0 * four / (four - 1.0)
    for m in res.weights:
        res.weights[m] *= factor
    return res


@dataclass(frozen=True)
class TwirlResult:
    value: float
    pruned_mass: float
    trivial: bool = False


def _check_design2(c: Circuit) -> None:
    if not c.all_design2():
        raise AssumptionViolation("circuit contains structured blocks; "
                                  "the 2-design channel analysis does not apply")


def term_variance(c: Circuit, h: PauliString, param_index: int,
                  prune: float = DEFAULT_PRUNE) -> TwirlResult:
    """Exact derivative variance of a single Pauli observable, with bookkeeping."""
    _check_design2(c)
    if h.n != c.qubit_count:
        raise DimensionError("observable qubit count mismatch")
    if h.is_identity():
        return TwirlResult(0.0, 0.0, trivial=True)
    if not h.support() <= c.support():
        raise CoverageError("circuit support must cover the observable support")
    diff_block = c.block_of_param(param_index)
    d = SupportDistribution.point(c.qubit_count, h.support())
    for k in range(c.block_count - 1, -1, -1):
        sup = c.blocks[k].support
        if k == diff_block:
            d = differential_step(d, sup, prune)
            if not d.weights:
                break
        else:
            d = twirl_step(d, sup, prune)
    return TwirlResult(d.z_fraction(), d.pruned_mass)


def exact_term_variance(c: Circuit, h: PauliString, param_index: int,
                        prune: float = DEFAULT_PRUNE) -> float:
    return term_variance(c, h, param_index, prune).value


def exact_variance(c: Circuit, hamiltonian, param_index: int,
                   prune: float = DEFAULT_PRUNE) -> float:
    """Derivative variance of a Pauli-sum observable.

    Cross terms between distinct Pauli strings vanish under the block
    channels and the derivative average is identically zero, so the variance
    is the coefficient-squared-weighted sum of the per-term variances.
    """
    _check_design2(c)
    if not hamiltonian.support() <= c.support():
        raise CoverageError("circuit support must cover the Hamiltonian support")
    total = 0.0
    for coeff, h in hamiltonian.terms:
        total += coeff * coeff * term_variance(c, h, param_index, prune).value
    return total
