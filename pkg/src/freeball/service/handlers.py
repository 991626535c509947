"""One handler per operation, shared by the HTTP app and the CLI.

A handler takes its request model and returns a plain JSON-ready dict (the
same document the CLI prints). All domain errors propagate as the package's
exception types; the app and the CLI translate them into HTTP statuses and
exit codes respectively.
"""

from __future__ import annotations

import dataclasses
import io
import math

import numpy as np

from ..acceptance import run_all
from ..config import DEFAULT_TOL, ToleranceConfig
from ..cpmaps import coisometry_normalizer, perron_pair
from ..errors import ParseError
from ..fixedpoints import (
    caratheodory_distance0,
    find_fixed_points,
    fixed_subspace_level1,
    geodesic_from_origin,
    jordan_multiplicity_check,
    normal_compression,
    verify_fixed_theorem,
)
from ..maps import eval_map, derivative_superop, diff_diff, parse_map_spec
from ..points import MatrixTuple, conjugate
from ..serialization import (
    compression_to_doc,
    jh_to_doc,
    matrix_to_doc,
    relations_to_doc,
    report_to_doc,
    subspace_to_doc,
    tangent_from_doc,
    tangent_to_doc,
    tuple_from_doc,
    tuple_to_doc,
    variety_from_doc,
    variety_report_to_doc,
)
from ..structure import (
    invariant_subspace_witness,
    is_generic,
    jordan_holder,
    linear_relations,
    mat_span,
    reassemble,
    subdiagonal_defect,
)
from ..varieties import (
    VarietySpec,
    builtin_variety,
    on_variety,
    sample_level_n,
    variety_hypothesis_report,
)
from . import models as m

# ----------------------------------------------------------------- helpers


def _tol(options: m.RunOptions) -> ToleranceConfig:
    overrides = {}
    if options.rank_tol is not None:
        overrides["rank_tol"] = options.rank_tol
    if options.residual_tol is not None:
        overrides["residual_tol"] = options.residual_tol
    if options.fd_step is not None:
        overrides["fd_step"] = options.fd_step
    return dataclasses.replace(DEFAULT_TOL, **overrides) if overrides else DEFAULT_TOL


def _point(doc: m.TupleDocument, path: str = "$.point") -> MatrixTuple:
    return tuple_from_doc(doc.model_dump(), path)


def _finite_or_none(value: float) -> float | None:
    return float(value) if math.isfinite(value) else None


def _scalar(text: str, what: str) -> complex:
    cleaned = text.strip().replace(" ", "")
    try:
        return complex(cleaned.replace("i", "j"))
    except ValueError:
        raise ParseError(f"bad {what}: {text!r} is not a complex literal", position=0) from None


def _variety(req: m.VarietyRef) -> VarietySpec:
    if (req.builtin is None) == (req.variety is None):
        raise ValueError("give exactly one of 'builtin' or 'variety'")
    if req.builtin is not None:
        return builtin_variety(req.builtin)
    return variety_from_doc(req.variety.model_dump(), "$.variety")


# ---------------------------------------------------------------- handlers


def eval_op(req: m.EvalRequest) -> dict:
    f = parse_map_spec(req.map)
    return tuple_to_doc(eval_map(f, _point(req.point)))


def diff_op(req: m.DiffRequest) -> dict:
    f = parse_map_spec(req.map)
    x = tuple_from_doc(req.x.model_dump(), "$.x")
    y = tuple_from_doc(req.y.model_dump(), "$.y")
    z = tangent_from_doc(req.z.model_dump(), "$.z")
    return tangent_to_doc(diff_diff(f, x, y, z))


def derivative_op(req: m.DerivativeRequest) -> dict:
    f = parse_map_spec(req.map)
    d = derivative_superop(f, _point(req.point))
    return {"rows": d.shape[0], "matrix": matrix_to_doc(d)}


def perron_op(req: m.PointRequest) -> dict:
    tol = _tol(req.options)
    data = perron_pair(_point(req.point), tol)
    return {
        "r": data.r,
        "residual": data.residual,
        "gap": _finite_or_none(data.gap),
        "near_degenerate": data.near_degenerate,
        "a": matrix_to_doc(data.a),
        "s": matrix_to_doc(data.s),
    }


def normalize_coisometry_op(req: m.PointRequest) -> dict:
    tol = _tol(req.options)
    x = _point(req.point)
    s, r = coisometry_normalizer(x, tol)
    y = conjugate(x, s)
    gram = sum(c @ c.conj().T for c in y.coords)
    residual = float(np.linalg.norm(gram - r * np.eye(x.n)))
    return {"r": r, "s": matrix_to_doc(s), "normalized": tuple_to_doc(y), "residual": residual}


def generic_op(req: m.PointRequest) -> dict:
    tol = _tol(req.options)
    x = _point(req.point)
    flag, dim = is_generic(x, tol.rank_tol)
    witness = None
    if not flag:
        found = invariant_subspace_witness(x, tol.rank_tol)
        witness = matrix_to_doc(found) if found is not None else None
    return {"generic": flag, "dim": dim, "n": x.n, "witness": witness}


def relations_op(req: m.PointRequest) -> dict:
    tol = _tol(req.options)
    return relations_to_doc(linear_relations(_point(req.point), tol.rank_tol))


def matspan_op(req: m.MatSpanRequest) -> dict:
    tol = _tol(req.options)
    if not req.points:
        raise ValueError("matspan needs at least one point")
    points = [
        tuple_from_doc(doc.model_dump(), f"$.points[{i}]") for i, doc in enumerate(req.points)
    ]
    return subspace_to_doc(mat_span(points, tol.rank_tol))


def jh_op(req: m.PointRequest) -> dict:
    tol = _tol(req.options)
    x = _point(req.point)
    decomposition = jordan_holder(x, tol, seed=req.options.seed)
    doc = jh_to_doc(decomposition)
    doc["subdiagonal_defect"] = subdiagonal_defect(decomposition, x)
    doc["discard_residual"] = reassemble(decomposition, x)
    return doc


def fix_detect_op(req: m.MapRequest) -> dict:
    f = parse_map_spec(req.map)
    return subspace_to_doc(fixed_subspace_level1(f, _tol(req.options)))


def fix_verify_op(req: m.FixVerifyRequest) -> dict:
    f = parse_map_spec(req.map)
    report = verify_fixed_theorem(
        f,
        levels=req.levels,
        samples=req.samples,
        seed=req.options.seed,
        tol=_tol(req.options),
        newton_starts=req.newton_starts,
    )
    return report_to_doc(report)


def fix_find_op(req: m.FixFindRequest) -> dict:
    f = parse_map_spec(req.map)
    tol = _tol(req.options)
    points = find_fixed_points(f, req.level, starts=req.starts, seed=req.options.seed, tol=tol)
    residuals = [(eval_map(f, x) - x).frob_norm() for x in points]
    return {"points": [tuple_to_doc(x) for x in points], "residuals": residuals}


def qn_op(req: m.QnRequest) -> dict:
    f = parse_map_spec(req.map)
    tol = _tol(req.options)
    v1 = fixed_subspace_level1(f, tol)
    if req.point is not None:
        x = _point(req.point)
    else:
        x = MatrixTuple.zeros(f.d_in, req.level)
    return compression_to_doc(normal_compression(f, v1, x, tol))


def jordan_check_op(req: m.JordanCheckRequest) -> dict:
    f = parse_map_spec(req.map)
    return {"ok": jordan_multiplicity_check(f, _point(req.point), _tol(req.options))}


def distance_op(req: m.PointRequest) -> dict:
    return {"distance": caratheodory_distance0(_point(req.point))}


def geodesic_op(req: m.GeodesicRequest) -> dict:
    x = _point(req.point)
    z = _scalar(req.z, "geodesic parameter")
    return tuple_to_doc(geodesic_from_origin(x, z))


def mobius_op(req: m.MobiusRequest) -> dict:
    theta = parse_map_spec(f"mobius a={req.a.strip()}")
    return tuple_to_doc(eval_map(theta, _point(req.point)))


def variety_check_op(req: m.VarietyCheckRequest) -> dict:
    v = _variety(req)
    flag, residual = on_variety(v, _point(req.point), _tol(req.options).residual_tol)
    return {"on_variety": flag, "residual": residual}


def variety_sample_op(req: m.VarietySampleRequest) -> dict:
    v = _variety(req)
    points = sample_level_n(v, req.level, req.count, seed=req.options.seed, tol=_tol(req.options))
    return {"points": [tuple_to_doc(x) for x in points]}


def variety_report_op(req: m.VarietyReportRequest) -> dict:
    v = _variety(req)
    report = variety_hypothesis_report(
        v,
        max_level=req.max_level,
        seed=req.options.seed,
        tol=_tol(req.options),
        samples_per_level=req.samples_per_level,
    )
    return variety_report_to_doc(report)


def selftest_op(req: m.SelftestRequest) -> dict:
    results = run_all(seed=req.options.seed, tol=_tol(req.options), stream=io.StringIO())
    return {
        "results": [dataclasses.asdict(r) for r in results],
        "passed": all(r.passed for r in results),
    }


# op name -> (request model, handler); the single source for both front ends.
OPERATIONS = {
    "eval": (m.EvalRequest, eval_op),
    "diff": (m.DiffRequest, diff_op),
    "derivative": (m.DerivativeRequest, derivative_op),
    "perron": (m.PointRequest, perron_op),
    "normalize-coisometry": (m.PointRequest, normalize_coisometry_op),
    "generic": (m.PointRequest, generic_op),
    "relations": (m.PointRequest, relations_op),
    "matspan": (m.MatSpanRequest, matspan_op),
    "jh": (m.PointRequest, jh_op),
    "fix-detect": (m.MapRequest, fix_detect_op),
    "fix-verify": (m.FixVerifyRequest, fix_verify_op),
    "fix-find": (m.FixFindRequest, fix_find_op),
    "qn": (m.QnRequest, qn_op),
    "jordan-check": (m.JordanCheckRequest, jordan_check_op),
    "distance": (m.PointRequest, distance_op),
    "geodesic": (m.GeodesicRequest, geodesic_op),
    "mobius": (m.MobiusRequest, mobius_op),
    "variety-check": (m.VarietyCheckRequest, variety_check_op),
    "variety-sample": (m.VarietySampleRequest, variety_sample_op),
    "variety-report": (m.VarietyReportRequest, variety_report_op),
    "selftest": (m.SelftestRequest, selftest_op),
}
