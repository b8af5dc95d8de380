"""Depth and size accounting for the hybrid chain, plus a configurable
classical MAC depth model and the crossover point where the hybrid wins.

Layer counts are the cost measure throughout; classical model constants
are caller inputs with documented defaults, not measured facts.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from . import ir
from .builder import (
    APPROX,
    EXACT,
    MacInput,
    QmacParams,
    build_chain,
    fanout_depth,
)
from .errors import InvalidInputError, NoCrossoverError

HYBRID_STEP_DEPTH = 2  # one AND layer + one phase layer per MAC block


def qft_depth(k: int) -> int:
    """Depth of the packed transform: the rotation cascade's critical chain
    has 2k-1 layers and the bit-reversal swaps add one more. Banding removes
    gates off the critical chain only, so this holds for the banded inverse
    too."""
    return 1 if k == 1 else 2 * k


def predicted_stage_depths(params: QmacParams) -> dict[str, int]:
    k, n = params.k, params.n
    if params.variant == EXACT:
        return {
            "qft": qft_depth(k),
            "fanout_in": fanout_depth(k),
            "mac_blocks": HYBRID_STEP_DEPTH * n,
            "fanout_out": fanout_depth(k),
            "qft_dagger": qft_depth(k),
        }
    return {
        "hadamard_init": 1,
        "fanout_in": fanout_depth(k),
        "mac_blocks": HYBRID_STEP_DEPTH * (n + 1),
        "fanout_out": fanout_depth(k),
        "qft_dagger": qft_depth(k),
    }


def predicted_depth(params: QmacParams) -> int:
    return sum(predicted_stage_depths(params).values())


@dataclass(frozen=True)
class DepthReport:
    k: int
    n: int
    variant: str
    epsilon: float | None
    measured_depth: int
    predicted_depth: int
    measured_quantum_gates: int
    measured_classical_gates: int
    measured_qubits: int
    breakdown: dict[str, int]
    predicted_breakdown: dict[str, int]

    @property
    def consistent(self) -> bool:
        return (
            self.measured_depth == self.predicted_depth
            and self.breakdown == self.predicted_breakdown
        )


def _zero_input(n: int) -> MacInput:
    return MacInput(z=0, pairs=tuple((0, 0) for _ in range(n)))


def hybrid_depth(params: QmacParams) -> DepthReport:
    """Build the chain and measure it; depth is value-independent, so a
    zero input stands in for any input of the same shape."""
    plan = build_chain(params, _zero_input(params.n))
    m = ir.metrics(plan.circuit)
    breakdown = dict(plan.stage_depths)
    report = DepthReport(
        k=params.k,
        n=params.n,
        variant=params.variant,
        epsilon=params.epsilon,
        measured_depth=m.depth,
        predicted_depth=predicted_depth(params),
        measured_quantum_gates=m.quantum_gate_count,
        measured_classical_gates=m.classical_gate_count,
        measured_qubits=m.qubit_count,
        breakdown=breakdown,
        predicted_breakdown=predicted_stage_depths(params),
    )
    assert sum(breakdown.values()) == m.depth, "stage depths must sum to the total"
    return report


# ---------------------------------------------------------------------------
# classical model
# ---------------------------------------------------------------------------

ADDER_KINDS = ("ripple", "carry_lookahead")
MULTIPLIER_KINDS = ("wallace_dadda",)


@dataclass(frozen=True)
class ClassicalModel:
    """Per-step depth model for a conventional MAC pipeline. Coefficients
    are layer counts per structural level and must be >= 1."""

    adder_kind: str = "carry_lookahead"
    multiplier_kind: str = "wallace_dadda"
    add_coeff: int = 2
    mult_coeff: int = 3

    def __post_init__(self):
        if self.adder_kind not in ADDER_KINDS:
            raise InvalidInputError(f"unknown adder kind {self.adder_kind!r}")
        if self.multiplier_kind not in MULTIPLIER_KINDS:
            raise InvalidInputError(f"unknown multiplier kind {self.multiplier_kind!r}")
        if self.add_coeff < 1 or self.mult_coeff < 1:
            raise InvalidInputError("model coefficients must be >= 1")

    def adder_depth(self, k: int) -> int:
        if self.adder_kind == "ripple":
            return self.add_coeff * k
        return self.add_coeff * math.ceil(math.log2(k)) if k > 1 else 0

    def multiplier_depth(self, k: int) -> int:
        return self.mult_coeff * math.ceil(math.log2(k)) if k > 1 else 0

    def step_depth(self, k: int) -> int:
        return self.multiplier_depth(k) + self.adder_depth(k)


def classical_depth(model: ClassicalModel, k: int, n: int) -> int:
    """n sequential MAC steps: n * (multiplier depth + adder depth)."""
    if k < 1 or n < 0:
        raise InvalidInputError("need k >= 1, n >= 0")
    return n * model.step_depth(k)


DEFAULT_SEARCH_BOUND = 10**6


def crossover(
    model: ClassicalModel,
    k: int,
    *,
    variant: str = EXACT,
    epsilon: float | None = None,
    bound: int = DEFAULT_SEARCH_BOUND,
) -> int | None:
    """Smallest n where the hybrid chain is strictly shallower than the
    modeled classical pipeline, or None if not found within ``bound``.

    Requires the classical per-step depth to exceed the hybrid's per-step
    slope of 2 layers; otherwise the hybrid can never catch up and
    NoCrossoverError is raised. Depths are evaluated directly per n from
    the closed form that the chain-depth checks pin to the built circuits.
    """
    step = model.step_depth(k)
    if step <= HYBRID_STEP_DEPTH:
        raise NoCrossoverError(
            f"classical per-step depth {step} does not exceed the hybrid slope {HYBRID_STEP_DEPTH}"
        )
    for n in range(1, bound + 1):
        params = QmacParams(k=k, n=n, variant=variant, epsilon=epsilon)
        if predicted_depth(params) < classical_depth(model, k, n):
            return n
    return None


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "k",
    "n",
    "variant",
    "epsilon",
    "measured_depth",
    "predicted_depth",
    "quantum_gates",
    "qubits",
    "classical_depth",
    "crossover_n",
)


def sweep(
    k_values,
    n_values,
    *,
    variant: str = EXACT,
    epsilon: float | None = None,
    model: ClassicalModel | None = None,
) -> list[dict]:
    """Measured vs predicted depth across a (k, n) grid, with the classical
    comparison and per-k crossover attached to every row."""
    model = model or ClassicalModel()
    rows = []
    for k in k_values:
        try:
            cross: int | str | None = crossover(model, k, variant=variant, epsilon=epsilon)
            if cross is None:
                cross = "none"
        except NoCrossoverError:
            cross = "none"
        for n in n_values:
            report = hybrid_depth(QmacParams(k=k, n=n, variant=variant, epsilon=epsilon))
            rows.append(
                {
                    "k": k,
                    "n": n,
                    "variant": variant,
                    "epsilon": "" if epsilon is None else epsilon,
                    "measured_depth": report.measured_depth,
                    "predicted_depth": report.predicted_depth,
                    "quantum_gates": report.measured_quantum_gates,
                    "qubits": report.measured_qubits,
                    "classical_depth": classical_depth(model, k, n),
                    "crossover_n": cross,
                }
            )
    return rows


def crossover_table(
    k_values,
    *,
    variant: str = EXACT,
    epsilon: float | None = None,
    model: ClassicalModel | None = None,
) -> list[dict]:
    model = model or ClassicalModel()
    rows = []
    for k in k_values:
        row = {
            "k": k,
            "variant": variant,
            "epsilon": "" if epsilon is None else epsilon,
            "classical_step_depth": model.step_depth(k),
            "hybrid_step_depth": HYBRID_STEP_DEPTH,
        }
        try:
            n_star = crossover(model, k, variant=variant, epsilon=epsilon)
            row["crossover_n"] = "none" if n_star is None else n_star
        except NoCrossoverError:
            row["crossover_n"] = "none"
        rows.append(row)
    return rows


def rows_to_csv(rows: list[dict], columns=None) -> str:
    if not rows:
        return ""
    columns = list(columns or rows[0].keys())
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# growth-rate fits
# ---------------------------------------------------------------------------

def cubic_fit_residual(k_values, counts) -> float:
    """Largest relative residual of a cubic least-squares fit; the block
    gate count is exactly cubic, so this should be ~0."""
    import numpy as np

    coeffs = np.polyfit(np.asarray(k_values, dtype=float), np.asarray(counts, dtype=float), 3)
    fitted = np.polyval(coeffs, np.asarray(k_values, dtype=float))
    return float(np.max(np.abs(fitted - counts) / np.maximum(np.abs(np.asarray(counts)), 1.0)))


def approx_depth_log_fit(k_values, n: int, epsilon: float):
    """Least-squares fit measured approx-chain depth ~ c1*log2(k) + c2.

    Returns (c1, c2, max relative residual). The residual quantifies how
    close the measured growth is to logarithmic in k.
    """
    import numpy as np

    depths = [
        hybrid_depth(QmacParams(k=k, n=n, variant=APPROX, epsilon=epsilon)).measured_depth
        for k in k_values
    ]
    logs = np.log2(np.asarray(k_values, dtype=float))
    a = np.vstack([logs, np.ones_like(logs)]).T
    (c1, c2), *_ = np.linalg.lstsq(a, np.asarray(depths, dtype=float), rcond=None)
    fitted = c1 * logs + c2
    residual = float(np.max(np.abs(fitted - depths) / np.asarray(depths, dtype=float)))
    return float(c1), float(c2), residual


def approx_gate_bound(k: int, epsilon: float) -> tuple[int, float]:
    """(measured gate count of the banded inverse transform, bound
    k * (log2 k + log2 1/eps + 5)); the bound tracks the banded size."""
    from .builder import build_approx_qft_dagger

    count = ir.metrics(build_approx_qft_dagger(k, epsilon)).quantum_gate_count
    bound = k * (math.log2(k) + math.log2(1.0 / epsilon) + 5.0)
    return count, bound
