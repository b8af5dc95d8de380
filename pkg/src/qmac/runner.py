"""Single-job orchestration shared by the HTTP service and the CLI."""
from __future__ import annotations

from dataclasses import dataclass

from . import dense, phase
from .builder import MacInput, QmacParams, build_chain, to_signed
from .errors import BackendMismatchError, InvalidInputError

BACKENDS = ("dense", "phase", "both")


@dataclass(frozen=True)
class DenseResult:
    value: int
    probability: float
    distribution: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class PhaseResult:
    value: int
    trace: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class RunOutcome:
    params: QmacParams
    mac_input: MacInput
    result_unsigned: int
    result: int               # two's-complement view when the input is signed
    dense_result: DenseResult | None
    phase_result: PhaseResult | None
    agree: bool | None        # None unless both backends ran


def run_job(
    params: QmacParams,
    inp: MacInput,
    *,
    backend: str = "both",
    verbose: bool = False,
    cap: int | None = None,
) -> RunOutcome:
    """Build the chain and execute it on the selected backend(s).

    With both backends the dense top outcome must equal the phase result;
    a disagreement is fatal (BackendMismatchError carries both sides so
    callers can print the traces).
    """
    if backend not in BACKENDS:
        raise InvalidInputError(f"backend must be one of {BACKENDS}, got {backend!r}")

    dense_result = phase_result = None
    if backend in ("phase", "both"):
        if verbose:
            value, trace = phase.run_mac(params.k, inp.z, inp.pairs, trace=True)
            phase_result = PhaseResult(value=value, trace=trace)
        else:
            phase_result = PhaseResult(value=phase.run_mac(params.k, inp.z, inp.pairs))
    if backend in ("dense", "both"):
        plan = build_chain(params, inp)
        dense.ensure_within_cap(plan.layout.num_qubits, cap=cap)
        state = dense.simulate(plan.circuit, dense.initial_state(plan), cap=cap)
        distribution = dense.measure_register(state, plan.layout)
        top_value, top_prob = distribution[0]
        dense_result = DenseResult(
            value=top_value, probability=top_prob, distribution=tuple(distribution)
        )

    if dense_result is not None and phase_result is not None:
        agree = dense_result.value == phase_result.value
        if not agree:
            raise BackendMismatchError(
                f"dense top outcome {dense_result.value} != phase result {phase_result.value}",
                dense=dense_result,
                phase=phase_result,
            )
    else:
        agree = None

    unsigned = dense_result.value if dense_result is not None else phase_result.value
    result = to_signed(unsigned, params.k) if inp.signed else unsigned
    return RunOutcome(
        params=params,
        mac_input=inp,
        result_unsigned=unsigned,
        result=result,
        dense_result=dense_result,
        phase_result=phase_result,
        agree=agree,
    )


def mac_oracle(k: int, z: int, pairs) -> int:
    """Plain-integer reference: (z + sum x_i * y_i) mod 2^k."""
    total = z
    for x, y in pairs:
        total += x * y
    return total % (1 << k)
