"""FastAPI app exposing every operation as ``POST /api/<name>``.

Error bodies carry a machine-readable ``error`` kind so clients (the CLI in
``--server`` mode in particular) can map failures back to exit codes without
parsing prose:

* ``parse`` - malformed document or spec text (HTTP 400),
* ``precondition`` - well-formed input outside an operation's domain (HTTP 400),
* ``numerical`` - the computation itself failed to certify (HTTP 500).

Run with ``uvicorn freeball.service.app:app``.
"""

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import FreeballError, NumericalFailureError, ParseError
from . import models as m
from .handlers import OPERATIONS

_RESPONSE_MODELS = {
    "eval": m.TupleDocument,
    "diff": m.TangentDocument,
    "derivative": m.DerivativeResponse,
    "perron": m.PerronResponse,
    "normalize-coisometry": m.CoisometryResponse,
    "generic": m.GenericResponse,
    "relations": m.RelationsResponse,
    "matspan": m.SubspaceResponse,
    "jh": m.JhResponse,
    "fix-detect": m.SubspaceResponse,
    "fix-verify": m.FixVerifyResponse,
    "fix-find": m.FixFindResponse,
    "qn": m.QnResponse,
    "jordan-check": m.JordanCheckResponse,
    "distance": m.DistanceResponse,
    "geodesic": m.TupleDocument,
    "mobius": m.TupleDocument,
    "variety-check": m.OnVarietyResponse,
    "variety-sample": m.SampleResponse,
    "variety-report": m.VarietyReportResponse,
    "selftest": m.SelftestResponse,
}


def _make_endpoint(request_model, handler):
    def endpoint(payload: request_model):  # type: ignore[valid-type]
        return handler(payload)

    endpoint.__name__ = handler.__name__
    return endpoint


def create_app() -> FastAPI:
    app = FastAPI(title="freeball", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    for name, (request_model, handler) in OPERATIONS.items():
        app.post(f"/api/{name}", response_model=_RESPONSE_MODELS[name], operation_id=name)(
            _make_endpoint(request_model, handler)
        )

    @app.exception_handler(ParseError)
    def parse_error(request, exc: ParseError):
        position = exc.position if isinstance(exc.position, (int, str)) else None
        return JSONResponse(
            status_code=400,
            content={"error": "parse", "message": str(exc), "position": position},
        )

    @app.exception_handler(NumericalFailureError)
    def numerical_error(request, exc: NumericalFailureError):
        return JSONResponse(status_code=500, content={"error": "numerical", "message": str(exc)})

    @app.exception_handler(FreeballError)
    def precondition_error(request, exc: FreeballError):
        return JSONResponse(status_code=400, content={"error": "precondition", "message": str(exc)})

    @app.exception_handler(ValueError)
    def value_error(request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": "precondition", "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    def validation_error(request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        location = ".".join(str(part) for part in first.get("loc", ()))
        message = first.get("msg", "invalid request body")
        return JSONResponse(
            status_code=400,
            content={"error": "parse", "message": message, "position": location or None},
        )

    return app


app = create_app()
