"""Builders for the hybrid multiply-accumulate circuit family.

Vocabulary used throughout the package:

- *logical position* j (1-based): the register slot whose relative phase
  carries the running value modulo 2^j once the register is in the
  Fourier basis;
- *gate site* (j, l, slot): one single-qubit phase gate of the fused MAC
  block. Sub-block l of position j holds l gates; slot m applies exponent
  l+1-m and is controlled by AND(y_m, x_{j-l+1});
- *copy group* of position j: the j(j+1)/2 qubits (source + auxiliaries)
  that hold fanned-out copies of that position, one per gate site.

Physical layout is little-endian: addresses 0..k-1 are the source qubits,
address i-1 holding input bit i, so a source-register basis index reads
directly as an integer. The forward Fourier transform leaves logical
position j on address k-j; auxiliary copies sit above the sources, grouped
by position. Classical bits are laid out as [scratch | step 0 inputs |
step 1 inputs | ...], each step contributing k bits of y then k bits of x.

Builders are pure: identical parameters produce identical circuits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple

from . import ir
from .errors import InvalidInputError
from .ir import FanoutTag, GateKind, GateOp, HybridCircuit, cbit, qbit

EXACT = "exact"
APPROX = "approx"


# ---------------------------------------------------------------------------
# parameters and inputs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QmacParams:
    """Register width k, number of MAC steps n, and circuit variant."""

    k: int
    n: int = 0
    variant: str = EXACT
    epsilon: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise InvalidInputError(f"k must be >= 1, got {self.k}")
        if self.n < 0:
            raise InvalidInputError(f"n must be >= 0, got {self.n}")
        if self.variant not in (EXACT, APPROX):
            raise InvalidInputError(f"variant must be 'exact' or 'approx', got {self.variant!r}")
        if self.variant == APPROX:
            if self.epsilon is None or not (0.0 < self.epsilon < 1.0):
                raise InvalidInputError("approx variant needs epsilon in (0, 1)")
        elif self.epsilon is not None:
            raise InvalidInputError("epsilon only applies to the approx variant")


@dataclass(frozen=True)
class MacInput:
    """Initial accumulator z and multiplicand pairs (x_i, y_i), stored as
    unsigned residues; ``signed`` only changes boundary encoding/decoding."""

    z: int = 0
    pairs: tuple[tuple[int, int], ...] = ()
    signed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((x, y) for x, y in self.pairs))

    def validate(self, k: int) -> None:
        limit = 1 << k
        for name, value in [("z", self.z)] + [
            (f"pair[{i}]", v) for i, (x, y) in enumerate(self.pairs) for v in (x, y)
        ]:
            if not 0 <= value < limit:
                raise InvalidInputError(f"{name} = {value} does not fit {k} bits")


def to_unsigned(value: int, k: int) -> int:
    """Two's-complement encode a signed k-bit integer."""
    lo, hi = -(1 << (k - 1)), 1 << (k - 1)
    if not lo <= value < hi:
        raise InvalidInputError(f"{value} does not fit signed {k}-bit range [{lo}, {hi})")
    return value & ((1 << k) - 1)


def to_signed(value: int, k: int) -> int:
    """Interpret an unsigned k-bit residue as two's complement."""
    if not 0 <= value < (1 << k):
        raise InvalidInputError(f"{value} is not a {k}-bit residue")
    return value - (1 << k) if value >= (1 << (k - 1)) else value


def normalize_input(k: int, z: int, pairs: Iterable[tuple[int, int]], signed: bool) -> MacInput:
    """Build a MacInput from raw user values.

    Unsigned values are reduced mod 2^k here (the arithmetic is periodic,
    so z and z + m*2^k are the same input); signed values must fit the
    two's-complement range, where a silent reduction would hide mistakes.
    """
    pair_list = [(x, y) for x, y in pairs]
    if signed:
        inp = MacInput(
            z=to_unsigned(z, k),
            pairs=tuple((to_unsigned(x, k), to_unsigned(y, k)) for x, y in pair_list),
            signed=True,
        )
    else:
        mask = (1 << k) - 1
        for name, value in [("z", z)] + [("pair", v) for x, y in pair_list for v in (x, y)]:
            if value < 0:
                raise InvalidInputError(f"negative {name} = {value} requires signed mode")
        inp = MacInput(z=z & mask, pairs=tuple((x & mask, y & mask) for x, y in pair_list))
    inp.validate(k)
    return inp


# ---------------------------------------------------------------------------
# gate sites and layouts
# ---------------------------------------------------------------------------

class GateSite(NamedTuple):
    j: int     # logical position, 1..k
    l: int     # sub-block size, 1..j
    slot: int  # position inside the sub-block, 1..l

    @property
    def x_bit(self) -> int:
        return self.j - self.l + 1

    @property
    def y_bit(self) -> int:
        return self.slot

    @property
    def exponent(self) -> int:
        """Phase exponent of this site's gate (adds 2^{j-exponent} mod 2^j)."""
        return self.l + 1 - self.slot


@lru_cache(maxsize=None)
def gate_sites(k: int) -> tuple[GateSite, ...]:
    """Canonical site enumeration: j ascending, l ascending, slot ascending."""
    return tuple(
        GateSite(j, l, slot)
        for j in range(1, k + 1)
        for l in range(1, j + 1)
        for slot in range(1, l + 1)
    )


def num_gate_sites(k: int) -> int:
    return k * (k + 1) * (k + 2) // 6


@dataclass(frozen=True)
class QubitLayout:
    """Copy groups per logical position; group j holds j(j+1)/2 addresses
    with the source first."""

    k: int
    groups: tuple[tuple[int, ...], ...]
    num_qubits: int

    @property
    def sources(self) -> tuple[int, ...]:
        """Addresses of the k source qubits; address i-1 carries input bit i."""
        return tuple(range(self.k))

    def group(self, j: int) -> tuple[int, ...]:
        return self.groups[j - 1]


@lru_cache(maxsize=None)
def qubit_layout(k: int) -> QubitLayout:
    groups = []
    base = k
    for j in range(1, k + 1):
        size = j * (j + 1) // 2
        groups.append((k - j,) + tuple(range(base, base + size - 1)))
        base += size - 1
    return QubitLayout(k=k, groups=tuple(groups), num_qubits=base)


@lru_cache(maxsize=None)
def site_qubits(k: int) -> tuple[int, ...]:
    """Qubit address per gate site, aligned with gate_sites(k)."""
    layout = qubit_layout(k)
    out = []
    for site in gate_sites(k):
        index = site.l * (site.l - 1) // 2 + site.slot - 1
        out.append(layout.group(site.j)[index])
    return tuple(out)


@dataclass(frozen=True)
class ClassicalLayout:
    """Classical register: one scratch bit per gate site (shared by every
    MAC block), then 2k input bits per step (y bits, then x bits)."""

    k: int
    steps: int

    @property
    def num_sites(self) -> int:
        return num_gate_sites(self.k)

    @property
    def num_bits(self) -> int:
        return self.num_sites + 2 * self.k * self.steps

    def scratch(self, site_index: int) -> int:
        return site_index

    def y_addr(self, step: int, bit: int) -> int:
        return self.num_sites + 2 * self.k * step + bit - 1

    def x_addr(self, step: int, bit: int) -> int:
        return self.num_sites + 2 * self.k * step + self.k + bit - 1


# ---------------------------------------------------------------------------
# layer packing
# ---------------------------------------------------------------------------

class _Packer:
    """List-order ASAP scheduler: each op lands in the earliest layer after
    the last layer that touched any of its bits."""

    def __init__(self):
        self.layers: list[list[GateOp]] = []
        self._last: dict[ir.BitRef, int] = {}

    def add(self, op: GateOp) -> None:
        bits = op.quantum_bits() + op.classical_reads() + op.classical_writes()
        at = max((self._last.get(b, -1) for b in bits), default=-1) + 1
        while len(self.layers) <= at:
            self.layers.append([])
        self.layers[at].append(op)
        for b in bits:
            self._last[b] = at

    def into_circuit(self, num_qubits: int, num_classical: int) -> HybridCircuit:
        circuit = ir.empty(num_qubits, num_classical)
        for ops in self.layers:
            circuit = ir.append_layer(circuit, ops)
        return circuit


def _pack(ops: Iterable[GateOp], num_qubits: int, num_classical: int) -> HybridCircuit:
    packer = _Packer()
    for op in ops:
        packer.add(op)
    return packer.into_circuit(num_qubits, num_classical)


# ---------------------------------------------------------------------------
# Fourier-transform fragments
# ---------------------------------------------------------------------------

def _qft_ops(k: int, dagger: bool, band: int | None) -> list[GateOp]:
    """Gate list of the transform on addresses 0..k-1 (header comment's
    little-endian convention): rotation cascade then bit-reversal swaps;
    reversed and conjugated for the inverse. ``band`` drops every rotation
    with exponent above it."""
    ops: list[GateOp] = []
    for j in range(k, 0, -1):
        ops.append(GateOp(GateKind.HADAMARD, (qbit(j - 1),)))
        for m in range(2, j + 1):
            if band is not None and m > band:
                continue
            ops.append(GateOp(GateKind.CPHASE, (qbit(j - 1), qbit(j - m)), m=m, dagger=dagger))
    for p in range(1, k // 2 + 1):
        ops.append(GateOp(GateKind.SWAP, (qbit(p - 1), qbit(k - p))))
    if dagger:
        ops.reverse()
    return ops


def build_qft(k: int, *, num_qubits: int | None = None, num_classical: int = 0) -> HybridCircuit:
    """Forward transform: on basis state |z> it produces the product state
    whose position-j relative phase is 2*pi*(z mod 2^j)/2^j, i.e. the exact
    DFT over 2^k in the little-endian basis."""
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    return _pack(_qft_ops(k, dagger=False, band=None), num_qubits or k, num_classical)


def build_qft_dagger(k: int, *, num_qubits: int | None = None, num_classical: int = 0) -> HybridCircuit:
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    return _pack(_qft_ops(k, dagger=True, band=None), num_qubits or k, num_classical)


def aqft_band(k: int, epsilon: float) -> int:
    """Rotation cutoff: keep exponents m <= band. Two guard bits give the
    numerically-verified distance bound some margin."""
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError("epsilon must be in (0, 1)")
    return math.ceil(math.log2(k) + math.log2(1.0 / epsilon)) + 2


def build_banded_qft_dagger(
    k: int, band: int, *, num_qubits: int | None = None, num_classical: int = 0
) -> HybridCircuit:
    """Inverse transform with every rotation finer than 2*pi/2^band omitted."""
    if band < 1:
        raise InvalidInputError("band must be >= 1")
    return _pack(_qft_ops(k, dagger=True, band=band), num_qubits or k, num_classical)


def build_approx_qft_dagger(
    k: int, epsilon: float, *, num_qubits: int | None = None, num_classical: int = 0
) -> HybridCircuit:
    return build_banded_qft_dagger(
        k, aqft_band(k, epsilon), num_qubits=num_qubits, num_classical=num_classical
    )


# ---------------------------------------------------------------------------
# fan-out
# ---------------------------------------------------------------------------

def _fanout_rounds(layout: QubitLayout) -> list[list[GateOp]]:
    """CNOT doubling tree per copy group; round r of every group shares a
    layer, giving depth max_j ceil(log2 group size)."""
    rounds: list[list[GateOp]] = []
    for j in range(1, layout.k + 1):
        group = layout.group(j)
        have = [group[0]]
        todo = list(group[1:])
        r = 0
        while todo:
            take = min(len(have), len(todo))
            while len(rounds) <= r:
                rounds.append([])
            rounds[r].extend(
                GateOp(GateKind.CNOT, (qbit(src), qbit(dst)))
                for src, dst in zip(have[:take], todo[:take])
            )
            have.extend(todo[:take])
            del todo[:take]
            r += 1
    return rounds


def build_fanout(
    k: int,
    *,
    inverse: bool = False,
    block: int = 0,
    num_classical: int = 0,
) -> HybridCircuit:
    """Copy each source across its group (forward), or uncopy (inverse).

    The forward tree doubles the copy set every round, so applying the
    *same* gate order twice is not the identity once a copy serves as a
    control; the inverse therefore replays the rounds in reverse order,
    which undoes the forward block exactly (every CNOT is self-inverse).
    Both directions have identical gates, depth and tags apart from the
    direction marker, and the pair composes to the identity on every
    basis state.
    """
    layout = qubit_layout(k)
    rounds = _fanout_rounds(layout)
    if inverse:
        rounds.reverse()
    circuit = ir.empty(layout.num_qubits, num_classical)
    tag = FanoutTag(block=block, direction="inv" if inverse else "fwd")
    for ops in rounds:
        circuit = ir.append_layer(circuit, ops, tag=tag)
    return circuit


def fanout_depth(k: int) -> int:
    biggest = k * (k + 1) // 2
    return math.ceil(math.log2(biggest)) if biggest > 1 else 0


# ---------------------------------------------------------------------------
# MAC blocks
# ---------------------------------------------------------------------------

def classical_and_layer(step: int, classical: ClassicalLayout) -> list[GateOp]:
    """One AND per gate site: scratch[site] = y_{slot} AND x_{j-l+1} of this
    step's inputs. The layer's structure is input-independent; values flow
    in through the classical register at simulation time."""
    return [
        GateOp(
            GateKind.CLASSICAL_AND,
            (
                cbit(classical.y_addr(step, site.y_bit)),
                cbit(classical.x_addr(step, site.x_bit)),
                cbit(classical.scratch(i)),
            ),
        )
        for i, site in enumerate(gate_sites(classical.k))
    ]


def phase_layer(classical: ClassicalLayout) -> list[GateOp]:
    """Every phase gate of the fused block in one layer: site (j, l, slot)
    applies exponent l+1-slot to its own copy, controlled by its scratch bit."""
    qubits = site_qubits(classical.k)
    return [
        GateOp(
            GateKind.PHASE_R,
            (qbit(qubits[i]),),
            m=site.exponent,
            control=cbit(classical.scratch(i)),
        )
        for i, site in enumerate(gate_sites(classical.k))
    ]


def build_m_block(
    step: int, classical: ClassicalLayout, *, num_qubits: int | None = None
) -> HybridCircuit:
    """One MAC block: a classical AND layer, then one phase layer. Depth 2."""
    circuit = ir.empty(num_qubits or qubit_layout(classical.k).num_qubits, classical.num_bits)
    circuit = ir.append_layer(circuit, classical_and_layer(step, classical))
    circuit = ir.append_layer(circuit, phase_layer(classical))
    return circuit


def build_q_block(
    l: int,
    copies: tuple[int, ...],
    controls: tuple[int, ...],
    *,
    num_qubits: int,
    num_classical: int,
) -> HybridCircuit:
    """Standalone sub-block: controlled exponents l, l-1, ..., 1 on distinct
    copies; the gate with exponent l+1-m is controlled by bit m's wire."""
    if len(copies) != l or len(controls) != l:
        raise InvalidInputError(f"sub-block of size {l} needs {l} copies and {l} controls")
    ops = [
        GateOp(GateKind.PHASE_R, (qbit(copies[m - 1]),), m=l + 1 - m, control=cbit(controls[m - 1]))
        for m in range(1, l + 1)
    ]
    return ir.append_layer(ir.empty(num_qubits, num_classical), ops)


# ---------------------------------------------------------------------------
# full chains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainPlan:
    """A built chain plus everything needed to execute it: layouts, the
    classical register image, and the basis value to load on the sources."""

    params: QmacParams
    mac_input: MacInput
    circuit: HybridCircuit
    layout: QubitLayout
    classical: ClassicalLayout
    initial_classical_bits: tuple[int, ...]
    initial_value: int
    stage_depths: tuple[tuple[str, int], ...] = field(default=())

    @property
    def k(self) -> int:
        return self.params.k


def steps_for(params: QmacParams, inp: MacInput) -> tuple[tuple[int, int], ...]:
    """(x, y) per MAC block. The approx variant prepends an 'add z * 1'
    block so the accumulator can start from the uniform state."""
    if params.variant == APPROX:
        return ((1, inp.z),) + inp.pairs
    return inp.pairs


def initial_classical_bits(k: int, steps: tuple[tuple[int, int], ...], classical: ClassicalLayout) -> tuple[int, ...]:
    bits = [0] * classical.num_bits
    for step, (x, y) in enumerate(steps):
        for b in range(1, k + 1):
            bits[classical.y_addr(step, b)] = (y >> (b - 1)) & 1
            bits[classical.x_addr(step, b)] = (x >> (b - 1)) & 1
    return tuple(bits)


def _hadamard_init(k: int, num_qubits: int, num_classical: int) -> HybridCircuit:
    ops = [GateOp(GateKind.HADAMARD, (qbit(i),)) for i in range(k)]
    return ir.append_layer(ir.empty(num_qubits, num_classical), ops)


def build_chain(params: QmacParams, inp: MacInput, *, stepwise: bool = False) -> ChainPlan:
    """Assemble the full circuit for n sequential MAC steps.

    Exact variant:  QFT . F . [AND+phase] x n . F^-1 . QFT^-1, sources
    prepared in |z>. Approx variant: Hadamard layer on |0>, then an extra
    leading block adds z, and the closing transform is the banded inverse.
    Interior fan-outs between consecutive blocks are never emitted (they
    would cancel); ``stepwise=True`` emits them anyway, producing the
    uncancelled one-block-per-step form used by the cancellation tests.
    """
    if params.n != len(inp.pairs):
        raise InvalidInputError(f"params.n = {params.n} but {len(inp.pairs)} pairs given")
    inp.validate(params.k)
    k = params.k
    steps = steps_for(params, inp)
    layout = qubit_layout(k)
    classical = ClassicalLayout(k=k, steps=len(steps))
    nq, nc = layout.num_qubits, classical.num_bits

    fragments: list[HybridCircuit] = []
    stages: list[tuple[str, int]] = []

    def add(name: str, fragment: HybridCircuit) -> None:
        fragments.append(fragment)
        stages.append((name, fragment.depth))

    if params.variant == EXACT:
        add("qft", build_qft(k, num_qubits=nq, num_classical=nc))
    else:
        add("hadamard_init", _hadamard_init(k, nq, nc))

    if stepwise:
        for step in range(len(steps)):
            add("fanout_in", build_fanout(k, block=step, num_classical=nc))
            add("mac_blocks", build_m_block(step, classical, num_qubits=nq))
            add("fanout_out", build_fanout(k, block=step, inverse=True, num_classical=nc))
    else:
        add("fanout_in", build_fanout(k, block=0, num_classical=nc))
        for step in range(len(steps)):
            add("mac_blocks", build_m_block(step, classical, num_qubits=nq))
        add("fanout_out", build_fanout(k, block=1, inverse=True, num_classical=nc))

    if params.variant == EXACT:
        add("qft_dagger", build_qft_dagger(k, num_qubits=nq, num_classical=nc))
    else:
        add("qft_dagger", build_approx_qft_dagger(k, params.epsilon, num_qubits=nq, num_classical=nc))

    first = "qft" if params.variant == EXACT else "hadamard_init"
    merged: dict[str, int] = {
        name: 0 for name in (first, "fanout_in", "mac_blocks", "fanout_out", "qft_dagger")
    }
    for name, depth in stages:
        merged[name] += depth

    return ChainPlan(
        params=params,
        mac_input=inp,
        circuit=ir.compose_all(fragments),
        layout=layout,
        classical=classical,
        initial_classical_bits=initial_classical_bits(k, steps, classical),
        initial_value=inp.z if params.variant == EXACT else 0,
        stage_depths=tuple(merged.items()),
    )
