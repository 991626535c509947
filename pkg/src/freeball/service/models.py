"""Request/response models for the HTTP service.

Deep numeric validation (shape consistency, finiteness) happens in
:mod:`freeball.serialization` when a document is decoded; the models pin the
envelope: field names, nesting, and basic types. Complex scalars are
``[re, im]`` pairs everywhere, matrices are nested lists of pairs.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

Pair = tuple[float, float]
Matrix = list[list[Pair]]
Vector = list[Pair]


class RunOptions(BaseModel):
    """Seed and tolerance overrides shared by every operation."""

    seed: int = 0
    rank_tol: float | None = None
    residual_tol: float | None = None
    fd_step: float | None = None


class TupleDocument(BaseModel):
    d: int
    n: int
    coords: list[Matrix]


class TangentDocument(BaseModel):
    d: int
    rows: int
    cols: int
    blocks: list[Matrix]


class VarietyDocument(BaseModel):
    d: int
    relations: list[str]
    name: str | None = None


class VarietyRef(BaseModel):
    """Either a builtin variety name or an inline relation list."""

    builtin: str | None = None
    variety: VarietyDocument | None = None


# ---------------------------------------------------------------- requests


class EvalRequest(BaseModel):
    map: str
    point: TupleDocument
    options: RunOptions = Field(default_factory=RunOptions)


class DiffRequest(BaseModel):
    map: str
    x: TupleDocument
    y: TupleDocument
    z: TangentDocument
    options: RunOptions = Field(default_factory=RunOptions)


class DerivativeRequest(BaseModel):
    map: str
    point: TupleDocument
    options: RunOptions = Field(default_factory=RunOptions)


class PointRequest(BaseModel):
    point: TupleDocument
    options: RunOptions = Field(default_factory=RunOptions)


class MatSpanRequest(BaseModel):
    points: list[TupleDocument]
    options: RunOptions = Field(default_factory=RunOptions)


class MapRequest(BaseModel):
    map: str
    options: RunOptions = Field(default_factory=RunOptions)


class FixVerifyRequest(BaseModel):
    map: str
    levels: list[int] = Field(default_factory=lambda: [1, 2, 3])
    samples: int = 50
    newton_starts: int = 20
    options: RunOptions = Field(default_factory=RunOptions)


class FixFindRequest(BaseModel):
    map: str
    level: int = 2
    starts: int = 20
    options: RunOptions = Field(default_factory=RunOptions)


class QnRequest(BaseModel):
    map: str
    level: int = 1
    point: TupleDocument | None = None
    options: RunOptions = Field(default_factory=RunOptions)


class JordanCheckRequest(BaseModel):
    map: str
    point: TupleDocument
    options: RunOptions = Field(default_factory=RunOptions)


class GeodesicRequest(BaseModel):
    point: TupleDocument
    z: str
    options: RunOptions = Field(default_factory=RunOptions)


class MobiusRequest(BaseModel):
    a: str
    point: TupleDocument
    options: RunOptions = Field(default_factory=RunOptions)


class VarietyCheckRequest(VarietyRef):
    point: TupleDocument
    options: RunOptions = Field(default_factory=RunOptions)


class VarietySampleRequest(VarietyRef):
    level: int = 2
    count: int = 5
    options: RunOptions = Field(default_factory=RunOptions)


class VarietyReportRequest(VarietyRef):
    max_level: int = 3
    samples_per_level: int = 10
    options: RunOptions = Field(default_factory=RunOptions)


class SelftestRequest(BaseModel):
    options: RunOptions = Field(default_factory=RunOptions)


# --------------------------------------------------------------- responses


class SubspaceResponse(BaseModel):
    d: int
    dim: int
    full: bool
    basis: list[Vector]


class RelationsResponse(BaseModel):
    d: int
    dim: int
    basis: list[Vector]


class PerronResponse(BaseModel):
    r: float
    residual: float
    gap: float | None
    near_degenerate: bool
    a: Matrix
    s: Matrix


class CoisometryResponse(BaseModel):
    r: float
    s: Matrix
    normalized: TupleDocument
    residual: float


class GenericResponse(BaseModel):
    generic: bool
    dim: int
    n: int
    witness: Matrix | None


class DerivativeResponse(BaseModel):
    rows: int
    matrix: Matrix


class JhResponse(BaseModel):
    block_sizes: list[int]
    s: Matrix
    constituents: list[TupleDocument]
    subdiagonal_defect: float
    discard_residual: float


class LevelStatsDoc(BaseModel):
    level: int
    samples_on_v: int
    max_residual_on_v: float
    samples_off_v: int
    min_displacement_off_v: float | None
    newton_starts: int
    newton_converged: int
    newton_on_v: int
    ambiguous: int


class NewtonPointDoc(BaseModel):
    level: int
    residual: float
    classified_on_v: bool
    point: TupleDocument


class FixVerifyResponse(BaseModel):
    v1: SubspaceResponse
    levels_checked: list[int]
    levels: list[LevelStatsDoc]
    counterexamples: list[TupleDocument]
    ambiguous_points: list[TupleDocument]
    newton_found: list[NewtonPointDoc]
    seed: int
    passed: bool


class FixFindResponse(BaseModel):
    points: list[TupleDocument]
    residuals: list[float]


class QnResponse(BaseModel):
    normal_dim: int
    q: Pair
    q_matrix: Matrix | list
    block_residual: float


class JordanCheckResponse(BaseModel):
    ok: bool


class DistanceResponse(BaseModel):
    distance: float


class OnVarietyResponse(BaseModel):
    on_variety: bool
    residual: float


class SampleResponse(BaseModel):
    points: list[TupleDocument]


class ScalarSearchDoc(BaseModel):
    points: list[Vector]
    positive_dimensional: bool


class LevelSpanDoc(BaseModel):
    level: int
    dim: int
    full: bool
    points_used: int


class VarietyReportResponse(BaseModel):
    scalar: ScalarSearchDoc
    matspan_per_level: list[LevelSpanDoc]
    hypothesis_ok: bool


class CriterionDoc(BaseModel):
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float


class SelftestResponse(BaseModel):
    results: list[CriterionDoc]
    passed: bool
