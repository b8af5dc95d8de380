"""Exact structured simulation via integer phase accumulators.

Once the register is fanned out, every gate in a MAC block is diagonal, so
the whole computation reduces to bookkeeping one integer a_j mod 2^j per
logical position j: position j's relative phase is 2*pi*a_j/2^j, and the
phase gate at site (j, l, slot) adds 2^{j-(l+1-slot)} when its control is
1. Fan-out is a no-op in this picture (copies share their source's phase
contribution by construction, and FF^-1 = I). That makes any register
width tractable.

Everything here is integer arithmetic; there are no floats, so agreement
checks against this module are exact. The default site path evaluates
every gate site of the same canonical enumeration the circuit builder
uses; a closed-form update exists separately so the two validate each
other.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .builder import gate_sites
from .errors import InconsistentStateError, OutOfRangeError

# The vectorized path packs site contributions into uint64. Partial sums may
# wrap mod 2^64, which is harmless: every accumulator is reduced mod 2^j with
# j <= 64, and wrapping mod 2^64 preserves residues mod 2^j.
_VECTOR_MAX_K = 64


@dataclass(frozen=True)
class PhaseState:
    """accumulators[j-1] = a_j, an integer mod 2^j."""

    k: int
    accumulators: tuple[int, ...]

    def __post_init__(self):
        if self.k < 1 or len(self.accumulators) != self.k:
            raise OutOfRangeError("accumulator count must equal k")
        for j, a in enumerate(self.accumulators, start=1):
            if not 0 <= a < (1 << j):
                raise OutOfRangeError(f"a_{j} = {a} is not a residue mod 2^{j}")


def init_from(z: int, k: int) -> PhaseState:
    """State encoding the Fourier transform of |z>: a_j = z mod 2^j."""
    if not 0 <= z < (1 << k):
        raise OutOfRangeError(f"z = {z} does not fit {k} bits")
    return PhaseState(k, tuple(z % (1 << j) for j in range(1, k + 1)))


@lru_cache(maxsize=None)
def _site_arrays(k: int):
    """Per-site index/weight arrays aligned with the builder's enumeration.

    ``pair_idx`` flattens (y_bit, x_bit) so a site's control count can be
    gathered from a k*k table; ``shifts`` is the per-site weight exponent;
    ``starts`` marks each logical position's first site.
    """
    sites = gate_sites(k)
    pair_idx = np.fromiter(
        ((s.y_bit - 1) * k + (s.x_bit - 1) for s in sites), dtype=np.intp, count=len(sites)
    )
    shifts = np.fromiter((s.j - s.exponent for s in sites), dtype=np.uint64, count=len(sites))
    starts = np.zeros(k, dtype=np.intp)
    offset = 0
    for j in range(1, k):
        offset += j * (j + 1) // 2
        starts[j] = offset
    return pair_idx, shifts, starts


def _check_operands(state: PhaseState, x: int, y: int) -> None:
    limit = 1 << state.k
    if not 0 <= x < limit or not 0 <= y < limit:
        raise OutOfRangeError(f"(x, y) = ({x}, {y}) does not fit {state.k} bits")


def _bits_matrix(values: list[int], k: int) -> np.ndarray:
    arr = np.array(values, dtype=np.uint64)
    return (arr[:, None] >> np.arange(k, dtype=np.uint64)[None, :]) & np.uint64(1)


def _site_sums_python(k: int, steps: list[tuple[int, int]]) -> list[int]:
    """Unbounded-int site walk; reference path and the k > 64 fallback."""
    sums = [0] * k
    for x, y in steps:
        for site in gate_sites(k):
            if (y >> (site.y_bit - 1)) & 1 and (x >> (site.x_bit - 1)) & 1:
                sums[site.j - 1] += 1 << (site.j - site.exponent)
    return sums


def _site_sums_vector(k: int, steps: list[tuple[int, int]]) -> list[int]:
    pair_idx, shifts, starts = _site_arrays(k)
    ybits = _bits_matrix([y for _, y in steps], k)
    xbits = _bits_matrix([x for x, _ in steps], k)
    # counts[m, i] = number of steps whose site control AND(y_m, x_i) fires;
    # summing the step axis before the site walk only regroups the addition
    counts = ybits.T @ xbits
    contrib = counts.ravel()[pair_idx] << shifts
    return [int(v) for v in np.add.reduceat(contrib, starts)]


def _advance(state: PhaseState, sums) -> PhaseState:
    accs = tuple(
        (a + s) % (1 << j) for j, (a, s) in enumerate(zip(state.accumulators, sums), start=1)
    )
    return PhaseState(state.k, accs)


def apply_mac_step(state: PhaseState, x: int, y: int) -> PhaseState:
    """Advance by one MAC block, gate site by gate site."""
    _check_operands(state, x, y)
    if state.k <= _VECTOR_MAX_K:
        sums = _site_sums_vector(state.k, [(x, y)])
    else:
        sums = _site_sums_python(state.k, [(x, y)])
    return _advance(state, sums)


def apply_mac_step_python(state: PhaseState, x: int, y: int) -> PhaseState:
    """Same site walk in pure Python ints; cross-checks the vector path."""
    _check_operands(state, x, y)
    return _advance(state, _site_sums_python(state.k, [(x, y)]))


def apply_mac_step_reference(state: PhaseState, x: int, y: int) -> PhaseState:
    """Closed-form update a_j <- (a_j + (y mod 2^j) * x) mod 2^j; validates
    the arithmetic independently of the site enumeration."""
    _check_operands(state, x, y)
    accs = tuple(
        (a + (y % (1 << j)) * x) % (1 << j)
        for j, a in enumerate(state.accumulators, start=1)
    )
    return PhaseState(state.k, accs)


def decode(state: PhaseState) -> int:
    """Recover the accumulated integer (mod 2^k).

    Checks the consistency invariant a_j = a_k (mod 2^j) that must hold for
    any state reachable from init_from by MAC steps; a violation means a
    gate-application bug upstream.
    """
    a_k = state.accumulators[-1]
    for j, a in enumerate(state.accumulators, start=1):
        if a != a_k % (1 << j):
            raise InconsistentStateError(
                f"a_{j} = {a} but a_{state.k} mod 2^{j} = {a_k % (1 << j)}"
            )
    return a_k


def run_mac(k: int, z: int, pairs, *, trace: bool = False):
    """Fold the whole chain; returns the result, or (result, trace) with the
    accumulator tuple after every step when ``trace`` is set."""
    state = init_from(z, k)
    if trace:
        history = [state.accumulators]
        for x, y in pairs:
            state = apply_mac_step(state, x, y)
            history.append(state.accumulators)
        return decode(state), tuple(history)
    steps = [(x, y) for x, y in pairs]
    for x, y in steps:
        _check_operands(state, x, y)
    if steps:
        if k <= _VECTOR_MAX_K:
            sums = _site_sums_vector(k, steps)
        else:
            sums = _site_sums_python(k, steps)
        state = _advance(state, sums)
    return decode(state)
