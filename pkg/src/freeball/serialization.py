"""JSON documents for the core types.

Complex numbers are two-element ``[re, im]`` arrays throughout, so a
round-trip through JSON is lossless at double precision. ``canonical_json``
renders any document deterministically (sorted keys, fixed layout):
identical values give byte-identical output. Non-finite floats are mapped
to ``null`` on the way out.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .errors import ParseError
from .fixedpoints import FixedSubspaceReport, NormalCompression
from .points import MatrixTuple, TangentTuple
from .polynomials import format_polynomial, parse_polynomial
from .structure import JHDecomposition, LinearRelations, MatSpanSubspace
from .varieties import ScalarPointSearch, VarietyReport, VarietySpec

# ---------------------------------------------------------------- scalars


def complex_to_pair(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def pair_to_complex(doc: Any, path: str) -> complex:
    if (
        not isinstance(doc, (list, tuple))
        or len(doc) != 2
        or not all(isinstance(part, (int, float)) and not isinstance(part, bool) for part in doc)
    ):
        raise ParseError(f"expected a [re, im] pair, got {doc!r}", position=path)
    value = complex(float(doc[0]), float(doc[1]))
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ParseError("non-finite entry", position=path)
    return value


# ---------------------------------------------------------------- matrices


def matrix_to_doc(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[complex_to_pair(m[i, j]) for j in range(m.shape[1])] for i in range(m.shape[0])]


def matrix_from_doc(doc: Any, path: str, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    if not isinstance(doc, list) or not doc:
        raise ParseError("expected a nonempty matrix (list of rows)", position=path)
    if rows is not None and len(doc) != rows:
        raise ParseError(f"expected {rows} rows, got {len(doc)}", position=path)
    width = None
    out_rows = []
    for i, row in enumerate(doc):
        if not isinstance(row, list) or not row:
            raise ParseError("expected a nonempty row", position=f"{path}[{i}]")
        if width is None:
            width = len(row)
            if cols is not None and width != cols:
                raise ParseError(f"expected {cols} columns, got {width}", position=f"{path}[{i}]")
        elif len(row) != width:
            raise ParseError(f"ragged row: {len(row)} != {width}", position=f"{path}[{i}]")
        out_rows.append([pair_to_complex(entry, f"{path}[{i}][{j}]") for j, entry in enumerate(row)])
    return np.array(out_rows, dtype=np.complex128)


def vector_to_doc(v: np.ndarray) -> list:
    return [complex_to_pair(z) for z in np.asarray(v, dtype=np.complex128).ravel()]


# ------------------------------------------------------------------ tuples


def tuple_to_doc(x: MatrixTuple) -> dict:
    return {"d": x.d, "n": x.n, "coords": [matrix_to_doc(c) for c in x.coords]}


def tuple_from_doc(doc: Any, path: str = "$") -> MatrixTuple:
    if not isinstance(doc, dict):
        raise ParseError("expected a tuple document (object)", position=path)
    for key in ("d", "n", "coords"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}", position=path)
    d, n = doc["d"], doc["n"]
    if not isinstance(d, int) or d < 1:
        raise ParseError(f"d must be a positive integer, got {d!r}", position=f"{path}.d")
    if not isinstance(n, int) or n < 1:
        raise ParseError(f"n must be a positive integer, got {n!r}", position=f"{path}.n")
    coords = doc["coords"]
    if not isinstance(coords, list) or len(coords) != d:
        raise ParseError(f"coords must be a list of {d} matrices", position=f"{path}.coords")
    mats = [
        matrix_from_doc(c, f"{path}.coords[{j}]", rows=n, cols=n) for j, c in enumerate(coords)
    ]
    return MatrixTuple(mats)


def tangent_to_doc(z: TangentTuple) -> dict:
    rows, cols = z.shape
    return {
        "d": z.d,
        "rows": rows,
        "cols": cols,
        "blocks": [matrix_to_doc(b) for b in z.blocks],
    }


def tangent_from_doc(doc: Any, path: str = "$") -> TangentTuple:
    if not isinstance(doc, dict):
        raise ParseError("expected a tangent document (object)", position=path)
    for key in ("d", "rows", "cols", "blocks"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}", position=path)
    d, rows, cols = doc["d"], doc["rows"], doc["cols"]
    for label, value in (("d", d), ("rows", rows), ("cols", cols)):
        if not isinstance(value, int) or value < 1:
            raise ParseError(f"{label} must be a positive integer, got {value!r}", position=f"{path}.{label}")
    blocks = doc["blocks"]
    if not isinstance(blocks, list) or len(blocks) != d:
        raise ParseError(f"blocks must be a list of {d} matrices", position=f"{path}.blocks")
    mats = [
        matrix_from_doc(b, f"{path}.blocks[{j}]", rows=rows, cols=cols)
        for j, b in enumerate(blocks)
    ]
    return TangentTuple(mats)


# --------------------------------------------------------------- varieties


def variety_to_doc(v: VarietySpec) -> dict:
    doc = {"d": v.d, "relations": [format_polynomial(p) for p in v.relations]}
    if v.name:
        doc["name"] = v.name
    return doc


def variety_from_doc(doc: Any, path: str = "$") -> VarietySpec:
    if not isinstance(doc, dict):
        raise ParseError("expected a variety document (object)", position=path)
    for key in ("d", "relations"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}", position=path)
    d = doc["d"]
    if not isinstance(d, int) or d < 1:
        raise ParseError(f"d must be a positive integer, got {d!r}", position=f"{path}.d")
    raw = doc["relations"]
    if not isinstance(raw, list) or not raw:
        raise ParseError("relations must be a nonempty list of strings", position=f"{path}.relations")
    relations = []
    for i, text in enumerate(raw):
        if not isinstance(text, str):
            raise ParseError("relation must be a string", position=f"{path}.relations[{i}]")
        try:
            relations.append(parse_polynomial(text, d=d))
        except ParseError as err:
            raise ParseError(
                f"bad relation: {err.args[0]}", position=f"{path}.relations[{i}]"
            ) from None
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ParseError("name must be a string", position=f"{path}.name")
    return VarietySpec(d, tuple(relations), name)


# ----------------------------------------------------------------- reports


def subspace_to_doc(v: MatSpanSubspace) -> dict:
    return {
        "d": v.d,
        "dim": v.dim,
        "full": v.is_full,
        "basis": [vector_to_doc(v.level1_basis[:, k]) for k in range(v.dim)],
    }


def relations_to_doc(rel: LinearRelations) -> dict:
    return {
        "d": rel.d,
        "dim": rel.dim,
        "basis": [vector_to_doc(rel.basis[:, k]) for k in range(rel.dim)],
    }


def report_to_doc(report: FixedSubspaceReport) -> dict:
    return {
        "v1": subspace_to_doc(report.v1),
        "levels_checked": list(report.levels_checked),
        "levels": [
            {
                "level": s.level,
                "samples_on_v": s.samples_on_v,
                "max_residual_on_v": s.max_residual_on_v,
                "samples_off_v": s.samples_off_v,
                "min_displacement_off_v": s.min_displacement_off_v,
                "newton_starts": s.newton_starts,
                "newton_converged": s.newton_converged,
                "newton_on_v": s.newton_on_v,
                "ambiguous": s.ambiguous,
            }
            for s in report.level_stats
        ],
        "counterexamples": [tuple_to_doc(x) for x in report.counterexamples],
        "ambiguous_points": [tuple_to_doc(x) for x in report.ambiguous_points],
        "newton_found": [
            {
                "level": p.level,
                "residual": p.residual,
                "classified_on_v": p.classified_on_v,
                "point": tuple_to_doc(p.point),
            }
            for p in report.newton_found
        ],
        "seed": report.seed,
        "passed": report.passed,
    }


def jh_to_doc(decomposition: JHDecomposition) -> dict:
    return {
        "block_sizes": list(decomposition.block_sizes),
        "s": matrix_to_doc(decomposition.s),
        "constituents": [tuple_to_doc(c) for c in decomposition.constituents],
    }


def compression_to_doc(c: NormalCompression) -> dict:
    return {
        "normal_dim": c.normal_dim,
        "q": complex_to_pair(c.q),
        "q_matrix": matrix_to_doc(c.q_matrix) if c.q_matrix.size else [],
        "block_residual": c.block_residual,
    }


def scalar_search_to_doc(search: ScalarPointSearch) -> dict:
    return {
        "points": [vector_to_doc(p) for p in search.points],
        "positive_dimensional": search.positive_dimensional,
    }


def variety_report_to_doc(report: VarietyReport) -> dict:
    return {
        "scalar": scalar_search_to_doc(report.scalar),
        "matspan_per_level": [
            {"level": s.level, "dim": s.dim, "full": s.full, "points_used": s.points_used}
            for s in report.matspan_per_level
        ],
        "hypothesis_ok": report.hypothesis_ok,
    }


# ------------------------------------------------------------ JSON output


def _clean(obj: Any) -> Any:
    """Replace non-finite floats by None so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def canonical_json(obj: Any) -> str:
    """Deterministic JSON rendering (sorted keys, two-space indent)."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
