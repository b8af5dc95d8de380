"""Pydantic request/response models for the HTTP service."""
from typing import Literal, Optional

from pydantic import BaseModel, Field


class MacJob(BaseModel):
    """One MAC computation: width k, accumulator z, multiplicand pairs.
    Values may be negative only when ``signed`` is set."""

    k: int = Field(ge=1)
    z: int = 0
    pairs: list[tuple[int, int]] = Field(default_factory=list)
    variant: Literal["exact", "approx"] = "exact"
    epsilon: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    signed: bool = False


class Meta(BaseModel):
    tool: str
    version: str


class MetricsOut(BaseModel):
    depth: int
    quantum_gate_count: int
    classical_gate_count: int
    qubit_count: int
    classical_bit_count: int


class BuildResponse(BaseModel):
    meta: Meta
    metrics: MetricsOut
    stage_depths: dict[str, int]
    circuit_jsonl: str


class RunRequest(BaseModel):
    job: MacJob
    backend: Literal["dense", "phase", "both"] = "both"
    verbose: bool = False


class DenseOut(BaseModel):
    value: int
    probability: float
    distribution: list[tuple[int, float]]


class PhaseOut(BaseModel):
    value: int
    trace: Optional[list[list[int]]] = None


class RunResponse(BaseModel):
    meta: Meta
    result: int
    result_unsigned: int
    agree: Optional[bool]
    dense: Optional[DenseOut] = None
    phase: Optional[PhaseOut] = None


class VerifyRequest(BaseModel):
    suites: Optional[list[str]] = None
    mutate: Optional[Literal["drop-gate"]] = None
    seed: int = 0
    samples: int = Field(default=10, ge=1, le=1000)


class SuiteOut(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    meta: Meta
    passed: bool
    suites: list[SuiteOut]


class ClassicalModelIn(BaseModel):
    adder_kind: Literal["ripple", "carry_lookahead"] = "carry_lookahead"
    multiplier_kind: Literal["wallace_dadda"] = "wallace_dadda"
    add_coeff: int = Field(default=2, ge=1)
    mult_coeff: int = Field(default=3, ge=1)


class SweepRequest(BaseModel):
    k_values: list[int]
    n_values: list[int]
    variant: Literal["exact", "approx"] = "exact"
    epsilon: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    model: ClassicalModelIn = Field(default_factory=ClassicalModelIn)


class SweepResponse(BaseModel):
    meta: Meta
    columns: list[str]
    rows: list[dict]


class CrossoverRequest(BaseModel):
    k_values: list[int]
    variant: Literal["exact", "approx"] = "exact"
    epsilon: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    model: ClassicalModelIn = Field(default_factory=ClassicalModelIn)
