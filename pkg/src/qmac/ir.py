"""Gate-level IR for hybrid quantum-classical circuits.

A circuit is an ordered sequence of layers; a layer holds operations that
execute in one parallel step, and depth is simply the number of layers.
Within a layer:

- a quantum bit may be touched by at most one operation (no cloning);
- a classical bit may be *read* by any number of operations (classical
  fan-out is free: one wire can drive many gates in the same step);
- a classical bit may be *written* by at most one operation, and a bit
  written in a layer may not also be read in that layer.

Phase angles are never stored as floats. A phase gate carries the integer
exponent ``m`` of the angle 2*pi/2^m plus a ``dagger`` flag for the
conjugate, so circuit construction and comparison stay exact; only the
dense simulator materializes complex numbers.

Circuits are immutable: every operation here returns a new circuit.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .errors import (
    OutOfRangeError,
    OverlappingTargetsError,
    RegisterMismatchError,
)

QUANTUM = "q"
CLASSICAL = "c"

_BITREF_RE = re.compile(r"^([qc])(\d+)$")


@dataclass(frozen=True, order=True)
class BitRef:
    """Address of one bit: kind 'q' (qubit) or 'c' (classical bit)."""

    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in (QUANTUM, CLASSICAL):
            raise ValueError(f"bad bit kind {self.kind!r}")
        if self.index < 0:
            raise OutOfRangeError(f"negative bit index {self.index}")

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "BitRef":
        m = _BITREF_RE.match(text)
        if not m:
            raise ValueError(f"bad bit reference {text!r}")
        return cls(m.group(1), int(m.group(2)))


def qbit(index: int) -> BitRef:
    return BitRef(QUANTUM, index)


def cbit(index: int) -> BitRef:
    return BitRef(CLASSICAL, index)


class GateKind(Enum):
    """Primitive operations of the hybrid gate set."""

    PHASE_R = "phase_r"      # diag(1, e^{+-2*pi*i/2^m}); optional classical control
    CPHASE = "cphase"        # symmetric two-qubit controlled phase, same angle encoding
    CNOT = "cnot"            # targets = (control, target)
    HADAMARD = "hadamard"
    SWAP = "swap"
    CLASSICAL_AND = "and"    # targets = (in_a, in_b, out)


_QUANTUM_KINDS = frozenset(
    {GateKind.PHASE_R, GateKind.CPHASE, GateKind.CNOT, GateKind.HADAMARD, GateKind.SWAP}
)
_PHASE_KINDS = frozenset({GateKind.PHASE_R, GateKind.CPHASE})
_TWO_QUBIT_KINDS = frozenset({GateKind.CPHASE, GateKind.CNOT, GateKind.SWAP})


@dataclass(frozen=True)
class GateOp:
    """One primitive operation.

    ``m`` is the phase exponent for PHASE_R/CPHASE; ``control`` is the
    optional classical control bit (PHASE_R only). CLASSICAL_AND reads
    targets[0] and targets[1] and writes targets[2].
    """

    kind: GateKind
    targets: tuple[BitRef, ...]
    m: int | None = None
    dagger: bool = False
    control: BitRef | None = None

    def __post_init__(self):
        k, t = self.kind, self.targets
        if k in _QUANTUM_KINDS:
            expected = 2 if k in _TWO_QUBIT_KINDS else 1
            if len(t) != expected or any(b.kind != QUANTUM for b in t):
                raise ValueError(f"{k.value} needs {expected} quantum target(s), got {t}")
            if len(t) == 2 and t[0] == t[1]:
                raise OverlappingTargetsError(f"{k.value} targets coincide: {t[0]}")
        else:
            if len(t) != 3 or any(b.kind != CLASSICAL for b in t):
                raise ValueError(f"and needs 3 classical bits (in, in, out), got {t}")
            if t[2] in (t[0], t[1]):
                raise OverlappingTargetsError("and output aliases an input")
        if k in _PHASE_KINDS:
            if self.m is None or self.m < 1:
                raise ValueError(f"{k.value} needs a positive integer exponent, got {self.m}")
        elif self.m is not None:
            raise ValueError(f"{k.value} takes no phase exponent")
        if self.control is not None:
            if k is not GateKind.PHASE_R:
                raise ValueError(f"only phase_r may carry a control, not {k.value}")
            if self.control.kind != CLASSICAL:
                raise ValueError("phase_r control must be a classical bit")
        if self.dagger and k not in _PHASE_KINDS:
            raise ValueError(f"{k.value} has no dagger form")

    @property
    def is_quantum(self) -> bool:
        return self.kind in _QUANTUM_KINDS

    def quantum_bits(self) -> tuple[BitRef, ...]:
        return self.targets if self.is_quantum else ()

    def classical_reads(self) -> tuple[BitRef, ...]:
        if self.kind is GateKind.CLASSICAL_AND:
            return self.targets[:2]
        if self.control is not None:
            return (self.control,)
        return ()

    def classical_writes(self) -> tuple[BitRef, ...]:
        if self.kind is GateKind.CLASSICAL_AND:
            return (self.targets[2],)
        return ()


@dataclass(frozen=True)
class FanoutTag:
    """Structural marker on fan-out layers: block id plus direction."""

    block: int
    direction: str  # "fwd" | "inv"

    def __post_init__(self):
        if self.direction not in ("fwd", "inv"):
            raise ValueError(f"bad fan-out direction {self.direction!r}")


@dataclass(frozen=True)
class Layer:
    ops: tuple[GateOp, ...]
    tag: FanoutTag | None = None


@dataclass(frozen=True)
class HybridCircuit:
    num_qubits: int
    num_classical_bits: int
    layers: tuple[Layer, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class CircuitMetrics:
    depth: int
    quantum_gate_count: int
    classical_gate_count: int
    qubit_count: int


def empty(num_qubits: int, num_classical_bits: int = 0) -> HybridCircuit:
    if num_qubits < 0 or num_classical_bits < 0:
        raise OutOfRangeError("register sizes must be non-negative")
    return HybridCircuit(num_qubits, num_classical_bits)


def _check_layer(ops: Iterable[GateOp], num_qubits: int, num_classical: int) -> None:
    seen_quantum: set[BitRef] = set()
    reads: set[BitRef] = set()
    writes: set[BitRef] = set()
    for op in ops:
        for b in op.quantum_bits():
            if b.index >= num_qubits:
                raise OutOfRangeError(f"{b} outside {num_qubits}-qubit register")
            if b in seen_quantum:
                raise OverlappingTargetsError(f"two ops touch {b} in one layer")
            seen_quantum.add(b)
        for b in op.classical_reads():
            if b.index >= num_classical:
                raise OutOfRangeError(f"{b} outside {num_classical}-bit classical register")
            reads.add(b)
        for b in op.classical_writes():
            if b.index >= num_classical:
                raise OutOfRangeError(f"{b} outside {num_classical}-bit classical register")
            if b in writes:
                raise OverlappingTargetsError(f"two ops write {b} in one layer")
            writes.add(b)
    clash = reads & writes
    if clash:
        raise OverlappingTargetsError(f"bit(s) read and written in one layer: {sorted(map(str, clash))}")


def append_layer(
    circuit: HybridCircuit, ops: Iterable[GateOp], tag: FanoutTag | None = None
) -> HybridCircuit:
    """Return ``circuit`` extended by one validated layer (depth + 1)."""
    ops = tuple(ops)
    _check_layer(ops, circuit.num_qubits, circuit.num_classical_bits)
    return HybridCircuit(
        circuit.num_qubits, circuit.num_classical_bits, circuit.layers + (Layer(ops, tag),)
    )


def compose(a: HybridCircuit, b: HybridCircuit) -> HybridCircuit:
    """Concatenate: layers of ``b`` run after ``a``. Depths add."""
    if (a.num_qubits, a.num_classical_bits) != (b.num_qubits, b.num_classical_bits):
        raise RegisterMismatchError(
            f"cannot compose ({a.num_qubits}q/{a.num_classical_bits}c) "
            f"with ({b.num_qubits}q/{b.num_classical_bits}c)"
        )
    return HybridCircuit(a.num_qubits, a.num_classical_bits, a.layers + b.layers)


def compose_all(circuits: Iterable[HybridCircuit]) -> HybridCircuit:
    result = None
    for c in circuits:
        result = c if result is None else compose(result, c)
    if result is None:
        raise ValueError("compose_all needs at least one circuit")
    return result


def metrics(circuit: HybridCircuit) -> CircuitMetrics:
    """Exact counts: depth = layers, gate counts split quantum/classical."""
    quantum = classical = 0
    for layer in circuit.layers:
        for op in layer.ops:
            if op.is_quantum:
                quantum += 1
            else:
                classical += 1
    return CircuitMetrics(
        depth=len(circuit.layers),
        quantum_gate_count=quantum,
        classical_gate_count=classical,
        qubit_count=circuit.num_qubits,
    )


# ---------------------------------------------------------------------------
# fan-out cancellation
# ---------------------------------------------------------------------------

def _segments(circuit: HybridCircuit) -> list[tuple[FanoutTag | None, list[Layer]]]:
    """Group consecutive layers sharing the same fan-out tag."""
    segs: list[tuple[FanoutTag | None, list[Layer]]] = []
    for layer in circuit.layers:
        if segs and layer.tag is not None and segs[-1][0] == layer.tag:
            segs[-1][1].append(layer)
        else:
            segs.append((layer.tag, [layer]))
    return segs


def _mirror_blocks(a: list[Layer], b: list[Layer]) -> bool:
    """True when ``b`` is ``a`` with layer order reversed (CNOTs self-invert)."""
    if len(a) != len(b):
        return False
    return all(
        frozenset(la.ops) == frozenset(lb.ops) for la, lb in zip(a, reversed(b))
    )


def cancel_adjacent_fanouts(circuit: HybridCircuit) -> HybridCircuit:
    """Remove adjacent fan-out blocks that undo each other.

    A block is a run of layers carrying the same tag. Two neighbouring
    blocks cancel when their directions differ and one is the exact layer
    reversal of the other, so the removal is purely syntactic and leaves
    the simulated action unchanged. No-op when nothing cancels.
    """
    stack: list[tuple[FanoutTag | None, list[Layer]]] = []
    for tag, layers in _segments(circuit):
        if (
            tag is not None
            and stack
            and stack[-1][0] is not None
            and stack[-1][0].direction != tag.direction
            and _mirror_blocks(stack[-1][1], layers)
        ):
            stack.pop()
            continue
        stack.append((tag, layers))
    out: list[Layer] = []
    for _, layers in stack:
        out.extend(layers)
    return HybridCircuit(circuit.num_qubits, circuit.num_classical_bits, tuple(out))


# ---------------------------------------------------------------------------
# line-oriented JSON serialization
# ---------------------------------------------------------------------------

def _op_to_obj(op: GateOp) -> dict:
    obj: dict = {"kind": op.kind.value, "targets": [str(b) for b in op.targets]}
    if op.m is not None:
        obj["m"] = op.m
    if op.dagger:
        obj["dagger"] = True
    if op.control is not None:
        obj["control"] = str(op.control)
    return obj


def _op_from_obj(obj: dict) -> GateOp:
    return GateOp(
        kind=GateKind(obj["kind"]),
        targets=tuple(BitRef.parse(t) for t in obj["targets"]),
        m=obj.get("m"),
        dagger=obj.get("dagger", False),
        control=BitRef.parse(obj["control"]) if "control" in obj else None,
    )


def dumps(circuit: HybridCircuit) -> str:
    """Serialize as line-oriented JSON: a header line, then one line per layer."""
    lines = [
        json.dumps(
            {"num_qubits": circuit.num_qubits, "num_classical_bits": circuit.num_classical_bits},
            sort_keys=True,
            separators=(",", ":"),
        )
    ]
    for layer in circuit.layers:
        obj: dict = {"ops": [_op_to_obj(op) for op in layer.ops]}
        if layer.tag is not None:
            obj["tag"] = {"block": layer.tag.block, "dir": layer.tag.direction}
        lines.append(json.dumps(obj, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def loads(text: str) -> HybridCircuit:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty circuit dump")
    header = json.loads(lines[0])
    circuit = empty(header["num_qubits"], header["num_classical_bits"])
    for ln in lines[1:]:
        obj = json.loads(ln)
        tag = None
        if "tag" in obj:
            tag = FanoutTag(block=obj["tag"]["block"], direction=obj["tag"]["dir"])
        circuit = append_layer(circuit, (_op_from_obj(o) for o in obj["ops"]), tag=tag)
    return circuit
