"""Verification suites: cross-backend equivalence, depth/size accounting,
transform identities, approximation precision, and fault injection.

Each suite returns a SuiteResult; run_suites collects them into a report.
The drop-gate mutation removes one random controlled phase gate from every
built chain, which the equivalence suite must catch; that is the sanity
check that the suites actually constrain the circuits.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from . import dense, ir, phase
from .builder import (
    APPROX,
    EXACT,
    ClassicalLayout,
    MacInput,
    QmacParams,
    aqft_band,
    build_m_block,
    build_banded_qft_dagger,
    build_chain,
    build_fanout,
    build_qft,
    build_qft_dagger,
    num_gate_sites,
    qubit_layout,
)
from .cost import cubic_fit_residual, hybrid_depth
from .errors import QmacError
from .ir import GateKind, HybridCircuit
from .runner import mac_oracle

MUTATIONS = ("drop-gate",)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class VerifyReport:
    suites: tuple[SuiteResult, ...]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)


def drop_gate_mutation(circuit: HybridCircuit, seed: int) -> HybridCircuit:
    """Remove one pseudo-randomly chosen controlled phase gate."""
    slots = [
        (li, oi)
        for li, layer in enumerate(circuit.layers)
        for oi, op in enumerate(layer.ops)
        if op.kind is GateKind.PHASE_R and op.control is not None
    ]
    if not slots:
        return circuit
    li, oi = random.Random(seed).choice(slots)
    layers = list(circuit.layers)
    victim = layers[li]
    layers[li] = ir.Layer(victim.ops[:oi] + victim.ops[oi + 1 :], victim.tag)
    return HybridCircuit(circuit.num_qubits, circuit.num_classical_bits, tuple(layers))


def _chain_state(params: QmacParams, inp: MacInput, mutate: str | None, seed: int):
    plan = build_chain(params, inp)
    circuit = plan.circuit
    if mutate == "drop-gate":
        circuit = drop_gate_mutation(circuit, seed)
    state = dense.simulate(circuit, dense.initial_state(plan))
    return plan, dense.measure_register(state, plan.layout)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def suite_equivalence(mutate: str | None = None, seed: int = 0) -> SuiteResult:
    """Exhaustive single-step check for k <= 3: dense top outcome has
    probability 1 and matches both the phase backend and the integer
    oracle for every (z, x, y)."""
    failures = []
    cases = 0
    for k in (1, 2, 3):
        size = 1 << k
        params = QmacParams(k=k, n=1)
        for z in range(size):
            for x in range(size):
                for y in range(size):
                    cases += 1
                    inp = MacInput(z=z, pairs=((x, y),))
                    expected = mac_oracle(k, z, [(x, y)])
                    try:
                        _, dist = _chain_state(params, inp, mutate, seed)
                        value, prob = dist[0]
                        ok = value == expected and abs(prob - 1.0) <= 1e-10
                    except QmacError as err:
                        ok, value, prob = False, repr(err), 0.0
                    if ok and phase.run_mac(k, z, [(x, y)]) != expected:
                        ok = False
                    if not ok:
                        failures.append(f"k={k} z={z} x={x} y={y}: got {value} p={prob}")
                        if len(failures) >= 5:
                            detail = f"{cases} cases, failures: " + "; ".join(failures)
                            return SuiteResult("equivalence", False, detail)
    if failures:
        return SuiteResult("equivalence", False, f"{cases} cases, failures: " + "; ".join(failures))
    return SuiteResult("equivalence", True, f"{cases} exhaustive cases match")


def suite_block_depth() -> SuiteResult:
    """Every fused MAC block is exactly 2 layers for k = 1..8."""
    bad = [
        k
        for k in range(1, 9)
        if build_m_block(0, ClassicalLayout(k=k, steps=1)).depth != 2
    ]
    if bad:
        return SuiteResult("block_depth", False, f"depth != 2 for k in {bad}")
    return SuiteResult("block_depth", True, "block depth == 2 for k = 1..8")


def suite_block_size() -> SuiteResult:
    """Block gate count equals k(k+1)(k+2)/6 for k = 1..10 and fits a cubic
    with negligible residual."""
    ks = list(range(1, 11))
    counts = []
    for k in ks:
        m = ir.metrics(build_m_block(0, ClassicalLayout(k=k, steps=1)))
        expected = num_gate_sites(k)
        if m.quantum_gate_count != expected or m.classical_gate_count != expected:
            return SuiteResult(
                "block_size", False, f"k={k}: {m.quantum_gate_count} gates != {expected}"
            )
        counts.append(m.quantum_gate_count)
    residual = cubic_fit_residual(ks, counts)
    if residual >= 1e-9:
        return SuiteResult("block_size", False, f"cubic fit residual {residual:.2e}")
    return SuiteResult("block_size", True, f"counts match closed form; cubic residual {residual:.1e}")


def suite_chain_depth() -> SuiteResult:
    """Measured chain depth equals the closed-form stage sum for all
    k <= 8, n <= 16 in both variants, and each extra step costs exactly
    2 layers."""
    variants = [(EXACT, None), (APPROX, 1e-2)]
    for variant, epsilon in variants:
        for k in range(1, 9):
            previous = None
            for n in range(0, 17):
                report = hybrid_depth(QmacParams(k=k, n=n, variant=variant, epsilon=epsilon))
                if not report.consistent:
                    return SuiteResult(
                        "chain_depth",
                        False,
                        f"{variant} k={k} n={n}: measured {report.measured_depth} "
                        f"{report.breakdown} != predicted {report.predicted_depth} "
                        f"{report.predicted_breakdown}",
                    )
                if previous is not None and report.measured_depth - previous != 2:
                    return SuiteResult(
                        "chain_depth",
                        False,
                        f"{variant} k={k} n={n}: slope {report.measured_depth - previous}",
                    )
                previous = report.measured_depth
    return SuiteResult(
        "chain_depth", True, "measured == predicted for k <= 8, n <= 16, both variants; slope 2"
    )


def _spectral_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b, 2))


def suite_approx_precision(samples: int = 10, seed: int = 0) -> SuiteResult:
    """Banded inverse transform stays within epsilon of the exact inverse
    (spectral norm, k <= 8), and approximate end-to-end runs at k=4,
    eps=1e-3 return the exact result with probability >= 0.99."""
    for k in range(1, 9):
        exact = dense.unitary_of(build_qft_dagger(k))
        for eps in (1e-2, 1e-4):
            banded = dense.unitary_of(build_banded_qft_dagger(k, aqft_band(k, eps)))
            distance = _spectral_distance(exact, banded)
            if distance > eps:
                return SuiteResult(
                    "approx_precision", False, f"k={k} eps={eps}: distance {distance:.3e}"
                )
    rng = random.Random(seed)
    k, eps = 4, 1e-3
    for case in range(samples):
        n = rng.randint(0, 3)
        z = rng.randrange(1 << k)
        pairs = tuple((rng.randrange(1 << k), rng.randrange(1 << k)) for _ in range(n))
        params = QmacParams(k=k, n=n, variant=APPROX, epsilon=eps)
        _, dist = _chain_state(params, MacInput(z=z, pairs=pairs), None, 0)
        value, prob = dist[0]
        expected = mac_oracle(k, z, pairs)
        if value != expected or prob < 0.99:
            return SuiteResult(
                "approx_precision", False,
                f"case {case}: z={z} pairs={pairs}: got {value} p={prob:.4f}, want {expected}",
            )
    return SuiteResult(
        "approx_precision", True,
        f"distance <= eps for k <= 8; {samples} approximate runs exact with p >= 0.99",
    )


def suite_qft() -> SuiteResult:
    """Forward transform matches the DFT matrix (k <= 3) and the inverse
    undoes it (k <= 4)."""
    for k in range(1, 4):
        dim = 1 << k
        omega = np.exp(2j * np.pi / dim)
        dft = np.array([[omega ** (s * t) for s in range(dim)] for t in range(dim)]) / np.sqrt(dim)
        got = dense.unitary_of(build_qft(k))
        if not np.allclose(got, dft, atol=1e-9):
            return SuiteResult("qft", False, f"k={k}: transform differs from the DFT matrix")
    for k in range(1, 5):
        product = dense.unitary_of(build_qft(k)) @ dense.unitary_of(build_qft_dagger(k))
        if not np.allclose(product, np.eye(1 << k), atol=1e-9):
            return SuiteResult("qft", False, f"k={k}: inverse does not undo the transform")
    return SuiteResult("qft", True, "DFT matrix match (k <= 3) and unitarity (k <= 4)")


def suite_fanout() -> SuiteResult:
    """Fan-out followed by its inverse is the identity on every basis state
    (k <= 3), and cancelling interior fan-outs leaves the simulated action
    unchanged while removing 2 * fanout depth layers per interior seam."""
    for k in range(1, 4):
        layout = qubit_layout(k)
        fwd = build_fanout(k)
        inv = build_fanout(k, inverse=True)
        identity = np.eye(1 << layout.num_qubits)
        if not np.allclose(dense.unitary_of(ir.compose(fwd, inv)), identity, atol=1e-9):
            return SuiteResult("fanout", False, f"k={k}: F . F^-1 != I")
        if not np.allclose(dense.unitary_of(ir.compose(inv, fwd)), identity, atol=1e-9):
            return SuiteResult("fanout", False, f"k={k}: F^-1 . F != I")
    k, n = 2, 2
    params = QmacParams(k=k, n=n)
    for x1 in range(4):
        for y1 in range(4):
            inp = MacInput(z=1, pairs=((x1, y1), (y1, x1)))
            stepwise = build_chain(params, inp, stepwise=True)
            fused = build_chain(params, inp)
            cancelled = ir.cancel_adjacent_fanouts(stepwise.circuit)
            if cancelled.depth != fused.circuit.depth:
                return SuiteResult(
                    "fanout", False,
                    f"cancelled depth {cancelled.depth} != fused depth {fused.circuit.depth}",
                )
            bits = stepwise.initial_classical_bits
            before = dense.linear_action_of(stepwise.circuit, bits)
            after = dense.linear_action_of(cancelled, bits)
            if not np.allclose(before, after, atol=1e-9):
                return SuiteResult("fanout", False, f"cancellation changed the action for {inp}")
    return SuiteResult("fanout", True, "F F^-1 == I (k <= 3); interior cancellation is sound")


_SUITES = {
    "equivalence": suite_equivalence,
    "block_depth": suite_block_depth,
    "block_size": suite_block_size,
    "chain_depth": suite_chain_depth,
    "approx_precision": suite_approx_precision,
    "qft": suite_qft,
    "fanout": suite_fanout,
}

SUITE_NAMES = tuple(_SUITES)


def run_suites(
    names=None,
    *,
    mutate: str | None = None,
    seed: int = 0,
    samples: int = 10,
) -> VerifyReport:
    """Run the named suites (all by default). ``mutate`` injects a fault
    into the chains the equivalence suite simulates."""
    if mutate is not None and mutate not in MUTATIONS:
        raise QmacError(f"unknown mutation {mutate!r}; known: {MUTATIONS}")
    chosen = list(names) if names else list(SUITE_NAMES)
    results = []
    for name in chosen:
        if name not in _SUITES:
            raise QmacError(f"unknown suite {name!r}; known: {SUITE_NAMES}")
        if name == "equivalence":
            results.append(suite_equivalence(mutate=mutate, seed=seed))
        elif name == "approx_precision":
            results.append(suite_approx_precision(samples=samples, seed=seed))
        else:
            results.append(_SUITES[name]())
    return VerifyReport(tuple(results))
