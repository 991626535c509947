"""Command-line front end.

Every subcommand builds the same request model the HTTP service accepts and
runs it in-process by default; ``--server URL`` sends it to a running
service instead, so scripts can switch transports without changing shape.
Output is a deterministic JSON document (``--format text`` for a human
summary), written to stdout or ``--out``.

Exit codes: 0 success; 1 precondition/domain violation; 2 numerical
failure; 3 parse or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

import numpy as np
import pydantic

from . import __version__
from .acceptance import run_all
from .errors import FreeballError, NumericalFailureError, ParseError
from .serialization import canonical_json
from .service import models as m
from .service.handlers import OPERATIONS

EXIT_OK = 0
EXIT_PRECONDITION = 1
EXIT_NUMERICAL = 2
EXIT_PARSE = 3

_ERROR_KIND_EXITS = {"parse": EXIT_PARSE, "precondition": EXIT_PRECONDITION, "numerical": EXIT_NUMERICAL}


# ------------------------------------------------------------ input loading


def _load_json(path: str) -> Any:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: {err.msg}", position=err.pos) from None
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err.strerror or err}", position=path) from None


def _parse_levels(text: str) -> list[int]:
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            start, stop = int(lo), int(hi)
            if stop < start:
                raise ValueError
            return list(range(start, stop + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ParseError(
            f"bad --levels {text!r}: use N, N..M, or a comma list", position=0
        ) from None


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("FREEBALL_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"FREEBALL_SEED={env!r} is not an integer", position=0) from None
    return 0


# ------------------------------------------------------------- text output


def _np_matrix(doc: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in doc])


def _fmt_matrix(doc: list, indent: str = "  ") -> str:
    text = np.array2string(_np_matrix(doc), precision=6, suppress_small=True)
    return indent + text.replace("\n", "\n" + indent)


def _fmt_tuple(doc: dict) -> str:
    lines = [f"d = {doc['d']}, n = {doc['n']}"]
    for j, coord in enumerate(doc["coords"]):
        lines.append(f"X{j + 1} =")
        lines.append(_fmt_matrix(coord))
    return "\n".join(lines)


def _fmt_basis(doc: dict, label: str) -> str:
    lines = [f"{label}: dim {doc['dim']} of {doc['d']}" + (" (full)" if doc.get("full") else "")]
    for k, vec in enumerate(doc["basis"]):
        entries = ", ".join(f"{complex(re, im):.6g}" for re, im in vec)
        lines.append(f"  b{k + 1} = ({entries})")
    return "\n".join(lines)


def _render_text(op: str, doc: dict) -> str:
    if op in ("eval", "geodesic", "mobius"):
        return _fmt_tuple(doc)
    if op == "diff":
        lines = [f"d = {doc['d']}, blocks {doc['rows']} x {doc['cols']}"]
        for j, block in enumerate(doc["blocks"]):
            lines.append(f"Z{j + 1} =")
            lines.append(_fmt_matrix(block))
        return "\n".join(lines)
    if op == "derivative":
        body = _fmt_matrix(doc["matrix"]) if doc["rows"] <= 8 else f"  ({doc['rows']} rows)"
        return f"derivative superoperator, {doc['rows']} x {doc['rows']}:\n{body}"
    if op == "perron":
        gap = "n/a" if doc["gap"] is None else f"{doc['gap']:.3e}"
        return (
            f"r = {doc['r']!r}\nresidual = {doc['residual']:.3e}\n"
            f"relative gap = {gap}{'  (near-degenerate)' if doc['near_degenerate'] else ''}\n"
            f"A =\n{_fmt_matrix(doc['a'])}"
        )
    if op == "normalize-coisometry":
        return (
            f"r = {doc['r']!r}\ncoisometry residual = {doc['residual']:.3e}\n"
            f"S =\n{_fmt_matrix(doc['s'])}\nnormalized tuple:\n{_fmt_tuple(doc['normalized'])}"
        )
    if op == "generic":
        verdict = "generic" if doc["generic"] else "NOT generic"
        lines = [f"{verdict}: word span dimension {doc['dim']} of {doc['n'] ** 2}"]
        if doc.get("witness"):
            lines.append("invariant subspace witness:")
            lines.append(_fmt_matrix(doc["witness"]))
        return "\n".join(lines)
    if op == "relations":
        if doc["dim"] == 0:
            return "no linear relations"
        return _fmt_basis(doc, "linear relations")
    if op in ("matspan", "fix-detect"):
        label = "mat-span V(1)" if op == "matspan" else "fixed subspace V(1)"
        return _fmt_basis(doc, label)
    if op == "jh":
        sizes = " + ".join(str(s) for s in doc["block_sizes"])
        return (
            f"constituent sizes: {sizes}\n"
            f"subdiagonal defect = {doc['subdiagonal_defect']:.3e}\n"
            f"discard residual = {doc['discard_residual']:.3e}"
        )
    if op == "fix-verify":
        lines = [
            "PASSED" if doc["passed"] else "FAILED",
            _fmt_basis(doc["v1"], "V(1)"),
        ]
        for stats in doc["levels"]:
            displacement = stats["min_displacement_off_v"]
            moved = "n/a" if displacement is None else f"{displacement:.3e}"
            lines.append(
                f"level {stats['level']}: on-V residual <= {stats['max_residual_on_v']:.3e} "
                f"({stats['samples_on_v']} samples), off-V displacement >= {moved} "
                f"({stats['samples_off_v']} samples), Newton {stats['newton_on_v']}/"
                f"{stats['newton_converged']}/{stats['newton_starts']} on-V/converged/starts, "
                f"{stats['ambiguous']} ambiguous"
            )
        lines.append(
            f"counterexamples: {len(doc['counterexamples'])}, "
            f"ambiguous: {len(doc['ambiguous_points'])}"
        )
        return "\n".join(lines)
    if op == "fix-find":
        if not doc["points"]:
            return "no fixed points found"
        lines = [f"{len(doc['points'])} fixed point(s)"]
        for point, residual in zip(doc["points"], doc["residuals"]):
            lines.append(f"residual {residual:.3e}:")
            lines.append(_fmt_tuple(point))
        return "\n".join(lines)
    if op == "qn":
        q = complex(*doc["q"])
        return (
            f"normal dimension = {doc['normal_dim']}\nq = {q!r}\n"
            f"block residual = {doc['block_residual']:.3e}"
        )
    if op == "jordan-check":
        return "multiplicities agree" if doc["ok"] else "multiplicity MISMATCH"
    if op == "distance":
        return f"distance = {doc['distance']!r}"
    if op == "variety-check":
        verdict = "on variety" if doc["on_variety"] else "NOT on variety"
        return f"{verdict} (residual {doc['residual']:.3e})"
    if op == "variety-sample":
        lines = [f"{len(doc['points'])} point(s)"]
        for point in doc["points"]:
            lines.append(_fmt_tuple(point))
        return "\n".join(lines)
    if op == "variety-report":
        scalar = doc["scalar"]
        lines = [
            f"scalar points: {len(scalar['points'])}"
            + (" (positive-dimensional)" if scalar["positive_dimensional"] else "")
        ]
        for span in doc["matspan_per_level"]:
            full = " (full)" if span["full"] else ""
            lines.append(
                f"level {span['level']}: mat-span dim {span['dim']}{full} "
                f"from {span['points_used']} point(s)"
            )
        lines.append("hypotheses hold" if doc["hypothesis_ok"] else "hypotheses NOT verified")
        return "\n".join(lines)
    if op == "selftest":
        lines = [
            f"[{r['number']:2d}/12] {'PASS' if r['passed'] else 'FAIL'}  {r['name']} - "
            f"{r['detail']}  ({r['seconds']:.1f}s)"
            for r in doc["results"]
        ]
        lines.append("all criteria passed" if doc["passed"] else "SUITE FAILED")
        return "\n".join(lines)
    return canonical_json(doc).rstrip("\n")


# ------------------------------------------------------------------ parser


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $FREEBALL_SEED or 0)")
    common.add_argument("--tol", type=float, default=None, metavar="T", help="residual tolerance override")
    common.add_argument("--rank-tol", type=float, default=None, metavar="T", help="rank tolerance override")
    common.add_argument("--fd-step", type=float, default=None, metavar="H", help="finite-difference step override")
    common.add_argument("--format", choices=("json", "text"), default="json", help="output format")
    common.add_argument("--out", metavar="FILE", default=None, help="write output to FILE instead of stdout")
    common.add_argument("--server", metavar="URL", default=None, help="send the request to a running service")

    parser = argparse.ArgumentParser(prog="freeball", description=__doc__)
    parser.add_argument("--version", action="version", version=f"freeball {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text, description=help_text)

    p = cmd("eval", "evaluate a map at a point")
    p.add_argument("--map", required=True, help="map spec text")
    p.add_argument("--point", required=True, help="tuple document (JSON file or - for stdin)")

    p = cmd("diff", "difference-differential Delta f(X, Y)[Z]")
    p.add_argument("--map", required=True)
    p.add_argument("--x", required=True, help="left base point (tuple JSON)")
    p.add_argument("--y", required=True, help="right base point (tuple JSON)")
    p.add_argument("--z", required=True, help="direction (tangent JSON)")

    p = cmd("derivative", "derivative superoperator matrix at a point")
    p.add_argument("--map", required=True)
    p.add_argument("--point", required=True)

    p = cmd("perron", "Perron eigenvalue and eigenmatrix of the CP map")
    p.add_argument("--point", required=True)

    p = cmd("normalize-coisometry", "similarity making the tuple a multiple of a coisometry")
    p.add_argument("--point", required=True)

    p = cmd("generic", "does the tuple generate the full matrix algebra?")
    p.add_argument("--point", required=True)

    p = cmd("relations", "linear relations annihilating the coordinates")
    p.add_argument("--point", required=True)

    p = cmd("matspan", "level-1 mat-span of one or more points")
    p.add_argument("--point", required=True, action="append", dest="points", help="repeatable")

    p = cmd("jh", "simultaneous block-triangularization into generic constituents")
    p.add_argument("--point", required=True)

    p = cmd("fix-detect", "level-1 fixed subspace V(1) of an origin-fixing map")
    p.add_argument("--map", required=True)

    p = cmd("fix-verify", "check Fix(f) = V(n) by sampling and Newton search")
    p.add_argument("--map", required=True)
    p.add_argument("--levels", default="1..3", help="levels to check: N, N..M, or comma list")
    p.add_argument("--samples", type=int, default=50, help="samples per family per level")
    p.add_argument("--newton-starts", type=int, default=20)

    p = cmd("fix-find", "Newton search for fixed points at one level")
    p.add_argument("--map", required=True)
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--starts", type=int, default=20)

    p = cmd("qn", "determinant of the normal compression of Df - I")
    p.add_argument("--map", required=True)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--point", default=None, help="base point (default: origin at --level)")

    p = cmd("jordan-check", "equal multiplicities of eigenvalue 1 at a fixed point")
    p.add_argument("--map", required=True)
    p.add_argument("--point", required=True)

    p = cmd("distance", "Caratheodory distance from the origin")
    p.add_argument("--point", required=True)

    p = cmd("geodesic", "point z X / |X| on the geodesic disc through X")
    p.add_argument("--point", required=True)
    p.add_argument("--z", required=True, help="complex parameter, |z| < 1")

    p = cmd("mobius", "apply the automorphism swapping 0 and a")
    p.add_argument("--a", required=True, help="parameter tuple, e.g. (0.2,0)")
    p.add_argument("--point", required=True)

    def variety_cmd(name: str, help_text: str) -> argparse.ArgumentParser:
        q = cmd(name, help_text)
        q.add_argument("--builtin", default=None, help="builtin variety name")
        q.add_argument("--variety", default=None, help="variety spec (JSON file)")
        return q

    p = variety_cmd("variety-check", "is the point on the variety?")
    p.add_argument("--point", required=True)

    p = variety_cmd("variety-sample", "sample variety points at one level")
    p.add_argument("--level", type=int, default=2)
    p.add_argument("--count", type=int, default=5)

    p = variety_cmd("variety-report", "scalar points and mat-span fullness per level")
    p.add_argument("--max-level", type=int, default=3)
    p.add_argument("--samples", type=int, default=10, help="points sampled per level")

    cmd("selftest", "run the full acceptance suite")

    return parser


# ---------------------------------------------------------------- requests


def _build_request(args: argparse.Namespace) -> pydantic.BaseModel:
    options = m.RunOptions(
        seed=_resolve_seed(args),
        rank_tol=args.rank_tol,
        residual_tol=args.tol,
        fd_step=args.fd_step,
    )
    op = args.command
    if op == "eval":
        return m.EvalRequest(map=args.map, point=_load_json(args.point), options=options)
    if op == "diff":
        return m.DiffRequest(
            map=args.map,
            x=_load_json(args.x),
            y=_load_json(args.y),
            z=_load_json(args.z),
            options=options,
        )
    if op == "derivative":
        return m.DerivativeRequest(map=args.map, point=_load_json(args.point), options=options)
    if op in ("perron", "normalize-coisometry", "generic", "relations", "jh", "distance"):
        return m.PointRequest(point=_load_json(args.point), options=options)
    if op == "matspan":
        return m.MatSpanRequest(points=[_load_json(path) for path in args.points], options=options)
    if op == "fix-detect":
        return m.MapRequest(map=args.map, options=options)
    if op == "fix-verify":
        return m.FixVerifyRequest(
            map=args.map,
            levels=_parse_levels(args.levels),
            samples=args.samples,
            newton_starts=args.newton_starts,
            options=options,
        )
    if op == "fix-find":
        return m.FixFindRequest(map=args.map, level=args.level, starts=args.starts, options=options)
    if op == "qn":
        point = _load_json(args.point) if args.point else None
        return m.QnRequest(map=args.map, level=args.level, point=point, options=options)
    if op == "jordan-check":
        return m.JordanCheckRequest(map=args.map, point=_load_json(args.point), options=options)
    if op == "geodesic":
        return m.GeodesicRequest(point=_load_json(args.point), z=args.z, options=options)
    if op == "mobius":
        return m.MobiusRequest(a=args.a, point=_load_json(args.point), options=options)
    if op == "variety-check":
        return m.VarietyCheckRequest(
            builtin=args.builtin,
            variety=_load_json(args.variety) if args.variety else None,
            point=_load_json(args.point),
            options=options,
        )
    if op == "variety-sample":
        return m.VarietySampleRequest(
            builtin=args.builtin,
            variety=_load_json(args.variety) if args.variety else None,
            level=args.level,
            count=args.count,
            options=options,
        )
    if op == "variety-report":
        return m.VarietyReportRequest(
            builtin=args.builtin,
            variety=_load_json(args.variety) if args.variety else None,
            max_level=args.max_level,
            samples_per_level=args.samples,
            options=options,
        )
    if op == "selftest":
        return m.SelftestRequest(options=options)
    raise AssertionError(f"unhandled command {op}")  # pragma: no cover


def _post_to_server(server: str, op: str, request: pydantic.BaseModel) -> dict:
    import httpx

    url = server.rstrip("/") + "/api/" + op
    try:
        response = httpx.post(url, json=request.model_dump(), timeout=600.0)
    except httpx.HTTPError as err:
        raise ParseError(f"cannot reach {url}: {err}", position=url) from None
    if response.status_code == 200:
        return response.json()
    try:
        body = response.json()
    except ValueError:
        raise ParseError(f"{url}: HTTP {response.status_code}", position=url) from None
    kind = body.get("error", "precondition")
    message = body.get("message", f"HTTP {response.status_code}")
    raise _ServerError(kind, message)


class _ServerError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.exit_code = _ERROR_KIND_EXITS.get(kind, EXIT_PRECONDITION)


# ------------------------------------------------------------------- main


def _emit(args: argparse.Namespace, doc: dict) -> None:
    rendered = (
        canonical_json(doc) if args.format == "json" else _render_text(args.command, doc) + "\n"
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(rendered)
    else:
        sys.stdout.write(rendered)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        request = _build_request(args)

        # Local selftest streams its per-criterion lines as they finish.
        if args.command == "selftest" and args.server is None and args.format == "text" and not args.out:
            from .service.handlers import _tol

            results = run_all(seed=request.options.seed, tol=_tol(request.options))
            return EXIT_OK if all(r.passed for r in results) else EXIT_PRECONDITION

        if args.server is not None:
            doc = _post_to_server(args.server, args.command, request)
        else:
            _, handler = OPERATIONS[args.command]
            doc = handler(request)
    except ParseError as err:
        print(f"freeball: parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except pydantic.ValidationError as err:
        first = err.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ()))
        print(f"freeball: parse error at {where or '<request>'}: {first['msg']}", file=sys.stderr)
        return EXIT_PARSE
    except _ServerError as err:
        print(f"freeball: {err.kind} error: {err}", file=sys.stderr)
        return err.exit_code
    except NumericalFailureError as err:
        print(f"freeball: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FreeballError, ValueError) as err:
        print(f"freeball: {err}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as err:
        print(f"freeball: i/o error: {err}", file=sys.stderr)
        return EXIT_PARSE

    _emit(args, doc)
    # fix-verify reports its verdict in the document (the run succeeded
    # either way); selftest is the one command whose verdict is the product.
    if args.command == "selftest" and not doc.get("passed", False):
        return EXIT_PRECONDITION
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
