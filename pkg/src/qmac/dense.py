"""Brute-force statevector execution of hybrid circuits.

Ground truth for everything else at small width. Qubit i is bit i of the
basis-state index (little-endian), so the source register of a chain
(addresses 0..k-1) reads out directly as an integer. Measurement results
are exact marginal distributions computed from amplitudes; nothing here
samples, so every run is deterministic.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .builder import ChainPlan, QubitLayout
from .errors import (
    HasClassicalOpsError,
    InvalidInputError,
    NormDriftError,
    ResidualEntanglementError,
    TooWideError,
)
from .ir import GateKind, HybridCircuit, Layer

DEFAULT_CAP = 22
NORM_TOL = 1e-10
AUX_TOL = 1e-8

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def dense_cap() -> int:
    """Qubit cap for dense simulation; QMAC_DENSE_CAP overrides the default."""
    raw = os.environ.get("QMAC_DENSE_CAP")
    return int(raw) if raw else DEFAULT_CAP


def ensure_within_cap(num_qubits: int, *, cap: int | None = None) -> None:
    """Raise before anything tries to allocate a 2^num_qubits vector."""
    limit = cap if cap is not None else dense_cap()
    if num_qubits > limit:
        raise TooWideError(f"{num_qubits} qubits exceeds the dense cap of {limit}")


@dataclass
class DenseState:
    amplitudes: np.ndarray        # complex128, length 2^num_qubits
    classical_bits: np.ndarray    # uint8

    @classmethod
    def basis(cls, num_qubits: int, num_classical: int = 0, value: int = 0,
              classical_bits=None) -> "DenseState":
        if not 0 <= value < (1 << num_qubits):
            raise InvalidInputError(f"basis value {value} needs more than {num_qubits} qubits")
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[value] = 1.0
        bits = np.zeros(num_classical, dtype=np.uint8)
        if classical_bits is not None:
            bits = np.asarray(classical_bits, dtype=np.uint8)
            if bits.shape != (num_classical,):
                raise InvalidInputError("classical bit vector has the wrong length")
        return cls(amps, bits)

    def copy(self) -> "DenseState":
        return DenseState(self.amplitudes.copy(), self.classical_bits.copy())


def initial_state(plan: ChainPlan) -> DenseState:
    """The chain's starting state: |initial_value> on the sources, |0> on
    every auxiliary, input values loaded into the classical register."""
    return DenseState.basis(
        plan.layout.num_qubits,
        plan.classical.num_bits,
        value=plan.initial_value,
        classical_bits=plan.initial_classical_bits,
    )


# ---------------------------------------------------------------------------
# gate kernels; all operate in place on the last axis so a leading batch
# axis (used for matrix extraction) broadcasts for free
# ---------------------------------------------------------------------------

def _split1(amps: np.ndarray, n: int, q: int) -> np.ndarray:
    return amps.reshape(amps.shape[:-1] + (1 << (n - 1 - q), 2, 1 << q))

def _split2(amps: np.ndarray, n: int, qa: int, qb: int) -> np.ndarray:
    hi, lo = max(qa, qb), min(qa, qb)
    return amps.reshape(
        amps.shape[:-1] + (1 << (n - 1 - hi), 2, 1 << (hi - 1 - lo), 2, 1 << lo)
    )

def _phase_factor(m: int, dagger: bool) -> complex:
    angle = 2.0 * math.pi / (1 << m)
    return complex(math.cos(angle), -math.sin(angle) if dagger else math.sin(angle))

def _apply_phase(amps, n, q, m, dagger):
    _split1(amps, n, q)[..., 1, :] *= _phase_factor(m, dagger)

def _apply_cphase(amps, n, qa, qb, m, dagger):
    _split2(amps, n, qa, qb)[..., 1, :, 1, :] *= _phase_factor(m, dagger)

def _apply_hadamard(amps, n, q):
    v = _split1(amps, n, q)
    a = v[..., 0, :].copy()
    b = v[..., 1, :]
    v[..., 0, :] = (a + b) * _INV_SQRT2
    v[..., 1, :] = (a - b) * _INV_SQRT2

def _apply_cnot(amps, n, control, target):
    v = _split2(amps, n, control, target)
    if control > target:
        tmp = v[..., 1, :, 0, :].copy()
        v[..., 1, :, 0, :] = v[..., 1, :, 1, :]
        v[..., 1, :, 1, :] = tmp
    else:
        tmp = v[..., 0, :, 1, :].copy()
        v[..., 0, :, 1, :] = v[..., 1, :, 1, :]
        v[..., 1, :, 1, :] = tmp

def _apply_swap(amps, n, qa, qb):
    v = _split2(amps, n, qa, qb)
    tmp = v[..., 0, :, 1, :].copy()
    v[..., 0, :, 1, :] = v[..., 1, :, 0, :]
    v[..., 1, :, 0, :] = tmp


def _apply_layer(amps: np.ndarray, bits: np.ndarray, layer: Layer, n: int) -> None:
    for op in layer.ops:
        kind = op.kind
        if kind is GateKind.PHASE_R:
            if op.control is not None and not bits[op.control.index]:
                continue
            _apply_phase(amps, n, op.targets[0].index, op.m, op.dagger)
        elif kind is GateKind.CPHASE:
            _apply_cphase(amps, n, op.targets[0].index, op.targets[1].index, op.m, op.dagger)
        elif kind is GateKind.CNOT:
            _apply_cnot(amps, n, op.targets[0].index, op.targets[1].index)
        elif kind is GateKind.HADAMARD:
            _apply_hadamard(amps, n, op.targets[0].index)
        elif kind is GateKind.SWAP:
            _apply_swap(amps, n, op.targets[0].index, op.targets[1].index)
        else:  # CLASSICAL_AND; layer validation guarantees no read/write races
            a, b, out = (t.index for t in op.targets)
            bits[out] = bits[a] & bits[b]


def simulate(circuit: HybridCircuit, initial: DenseState | None = None, *,
             cap: int | None = None) -> DenseState:
    """Run every layer in order; returns the final state.

    Classically controlled phase gates fire only when their control bit is
    1; AND ops update the classical register. Norm is checked after every
    layer (tolerance 1e-10).
    """
    n = circuit.num_qubits
    ensure_within_cap(n, cap=cap)
    state = (initial or DenseState.basis(n, circuit.num_classical_bits)).copy()
    if state.amplitudes.shape != (1 << n,):
        raise InvalidInputError("initial amplitude vector has the wrong length")
    if state.classical_bits.shape != (circuit.num_classical_bits,):
        raise InvalidInputError("initial classical register has the wrong length")
    amps, bits = state.amplitudes, state.classical_bits
    for layer in circuit.layers:
        _apply_layer(amps, bits, layer, n)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise NormDriftError(f"norm drifted to {norm!r}")
    return state


def measure_register(state: DenseState, layout: QubitLayout, *,
                     aux_tol: float = AUX_TOL) -> list[tuple[int, float]]:
    """Exact marginal over the k source qubits, sorted by falling probability.

    The auxiliaries must be disentangled: if the total probability of any
    auxiliary being outside |0> exceeds ``aux_tol`` the state is broken and
    ResidualEntanglementError is raised.
    """
    k = layout.k
    probs = np.abs(state.amplitudes) ** 2
    table = probs.reshape(-1, 1 << k)  # rows = auxiliary configs, row 0 = all-|0>
    residual = float(table[1:, :].sum())
    if residual > aux_tol:
        raise ResidualEntanglementError(
            f"auxiliary qubits carry probability {residual:.3e} (> {aux_tol:g})"
        )
    marginal = table.sum(axis=0)
    out = [(value, float(p)) for value, p in enumerate(marginal) if p > 1e-15]
    out.sort(key=lambda vp: (-vp[1], vp[0]))
    return out


# ---------------------------------------------------------------------------
# matrix extraction
# ---------------------------------------------------------------------------

UNITARY_CAP = 10


def _batched_run(circuit: HybridCircuit, bits: np.ndarray) -> np.ndarray:
    n = circuit.num_qubits
    batch = np.eye(1 << n, dtype=np.complex128)  # row c = basis input |c>
    for layer in circuit.layers:
        _apply_layer(batch, bits, layer, n)
    return batch.T  # column c = image of |c>


def unitary_of(circuit: HybridCircuit, *, cap: int = UNITARY_CAP) -> np.ndarray:
    """Dense matrix of a purely quantum fragment, built column by column."""
    if circuit.num_qubits > cap:
        raise TooWideError(f"{circuit.num_qubits} qubits exceeds the matrix cap of {cap}")
    for layer in circuit.layers:
        for op in layer.ops:
            if not op.is_quantum or op.control is not None:
                raise HasClassicalOpsError("fragment contains classical ops or controls")
    return _batched_run(circuit, np.zeros(0, dtype=np.uint8))


def linear_action_of(circuit: HybridCircuit, classical_bits, *, cap: int = UNITARY_CAP) -> np.ndarray:
    """Matrix of the quantum action under a fixed classical register image.

    Classical flow is independent of the quantum state, so the map on
    amplitudes is linear for any fixed classical input; this is the
    equivalence oracle for circuits with classically controlled gates.
    """
    if circuit.num_qubits > cap:
        raise TooWideError(f"{circuit.num_qubits} qubits exceeds the matrix cap of {cap}")
    bits = np.asarray(classical_bits, dtype=np.uint8)
    if bits.shape != (circuit.num_classical_bits,):
        raise InvalidInputError("classical bit vector has the wrong length")
    return _batched_run(circuit, bits.copy())


# ---------------------------------------------------------------------------
# debug dumps
# ---------------------------------------------------------------------------

def state_to_json(state: DenseState) -> str:
    return json.dumps(
        {
            "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
            "classical_bits": [int(b) for b in state.classical_bits],
        },
        sort_keys=True,
    )


def distribution_to_json(distribution: list[tuple[int, float]]) -> str:
    return json.dumps(
        {"distribution": [{"value": v, "probability": p} for v, p in distribution]},
        sort_keys=True,
    )


def matrix_to_csv(matrix: np.ndarray) -> str:
    lines = ["row,col,re,im"]
    rows, cols = matrix.shape
    for r in range(rows):
        for c in range(cols):
            entry = matrix[r, c]
            lines.append(f"{r},{c},{entry.real!r},{entry.imag!r}")
    return "\n".join(lines) + "\n"
