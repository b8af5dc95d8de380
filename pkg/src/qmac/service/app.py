"""HTTP service exposing the circuit builder, simulators and cost model.

All endpoints are pure functions of their request bodies: responses carry
no timestamps, so identical requests produce identical payloads.
"""
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, cost, ir, verify
from ..builder import QmacParams, build_chain, normalize_input
from ..errors import (
    BackendMismatchError,
    InvalidInputError,
    NoCrossoverError,
    OutOfRangeError,
    QmacError,
    TooWideError,
)
from ..runner import run_job
from . import schemas

_META = {"tool": "qmac", "version": __version__}

_STATUS_BY_ERROR = {
    TooWideError: 413,
    InvalidInputError: 422,
    OutOfRangeError: 422,
    BackendMismatchError: 409,
}


def _job_to_core(job: schemas.MacJob):
    params = QmacParams(
        k=job.k, n=len(job.pairs), variant=job.variant, epsilon=job.epsilon
    )
    inp = normalize_input(job.k, job.z, job.pairs, job.signed)
    return params, inp


def create_app() -> FastAPI:
    app = FastAPI(title="qmac", version=__version__)

    @app.exception_handler(QmacError)
    async def _qmac_error(_: Request, exc: QmacError):
        status = 400
        for klass, code in _STATUS_BY_ERROR.items():
            if isinstance(exc, klass):
                status = code
                break
        payload = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, BackendMismatchError):
            payload["dense"] = repr(exc.dense)
            payload["phase"] = repr(exc.phase)
        return JSONResponse(status_code=status, content=payload)

    @app.get("/")
    def root():
        return {"service": "qmac", "version": __version__}

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/build", response_model=schemas.BuildResponse)
    def build(job: schemas.MacJob):
        params, inp = _job_to_core(job)
        plan = build_chain(params, inp)
        m = ir.metrics(plan.circuit)
        return schemas.BuildResponse(
            meta=_META,
            metrics=schemas.MetricsOut(
                depth=m.depth,
                quantum_gate_count=m.quantum_gate_count,
                classical_gate_count=m.classical_gate_count,
                qubit_count=m.qubit_count,
                classical_bit_count=plan.classical.num_bits,
            ),
            stage_depths=dict(plan.stage_depths),
            circuit_jsonl=ir.dumps(plan.circuit),
        )

    @app.post("/run", response_model=schemas.RunResponse)
    def run(request: schemas.RunRequest):
        params, inp = _job_to_core(request.job)
        outcome = run_job(params, inp, backend=request.backend, verbose=request.verbose)
        dense_out = phase_out = None
        if outcome.dense_result is not None:
            dense_out = schemas.DenseOut(
                value=outcome.dense_result.value,
                probability=outcome.dense_result.probability,
                distribution=list(outcome.dense_result.distribution),
            )
        if outcome.phase_result is not None:
            trace = outcome.phase_result.trace
            phase_out = schemas.PhaseOut(
                value=outcome.phase_result.value,
                trace=None if trace is None else [list(t) for t in trace],
            )
        return schemas.RunResponse(
            meta=_META,
            result=outcome.result,
            result_unsigned=outcome.result_unsigned,
            agree=outcome.agree,
            dense=dense_out,
            phase=phase_out,
        )

    @app.post("/verify", response_model=schemas.VerifyResponse)
    def verify_endpoint(request: schemas.VerifyRequest):
        report = verify.run_suites(
            request.suites, mutate=request.mutate, seed=request.seed, samples=request.samples
        )
        return schemas.VerifyResponse(
            meta=_META,
            passed=report.passed,
            suites=[
                schemas.SuiteOut(name=s.name, passed=s.passed, detail=s.detail)
                for s in report.suites
            ],
        )

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(request: schemas.SweepRequest):
        model = cost.ClassicalModel(**request.model.model_dump())
        rows = cost.sweep(
            request.k_values,
            request.n_values,
            variant=request.variant,
            epsilon=request.epsilon,
            model=model,
        )
        return schemas.SweepResponse(meta=_META, columns=list(cost.SWEEP_COLUMNS), rows=rows)

    @app.post("/crossover", response_model=schemas.SweepResponse)
    def crossover(request: schemas.CrossoverRequest):
        model = cost.ClassicalModel(**request.model.model_dump())
        rows = cost.crossover_table(
            request.k_values, variant=request.variant, epsilon=request.epsilon, model=model
        )
        columns = list(rows[0].keys()) if rows else []
        return schemas.SweepResponse(meta=_META, columns=columns, rows=rows)

    return app


app = create_app()
