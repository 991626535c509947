import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from freeball import __version__
from freeball.points import MatrixTuple
from freeball.serialization import tuple_to_doc
from freeball.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def _scalar_doc(*values):
    return tuple_to_doc(MatrixTuple.from_scalar_point(list(values)))


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["version"] == __version__


def test_eval_round_trip(client):
    payload = {"map": "scale factors=(1,0.5)", "point": _scalar_doc(0.2, 0.1)}
    response = client.post("/api/eval", json=payload)
    assert response.status_code == 200
    doc = response.json()
    assert doc["coords"][0][0][0] == [0.2, 0.0]
    assert doc["coords"][1][0][0] == [0.05, 0.0]


def test_distance(client):
    response = client.post("/api/distance", json={"point": _scalar_doc(0.5, 0.0)})
    assert response.status_code == 200
    assert abs(response.json()["distance"] - math.atanh(0.5)) < 1e-12


def test_parse_errors_return_400_with_kind(client):
    response = client.post(
        "/api/eval", json={"map": "warp k=2", "point": _scalar_doc(0.1)}
    )
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "parse"
    assert "position" in body


def test_request_validation_reports_the_field(client):
    response = client.post("/api/eval", json={"map": "x1"})
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "parse"
    assert "point" in body["position"]


def test_precondition_errors_return_400(client):
    outside = tuple_to_doc(MatrixTuple([1.5 * np.eye(2)]))
    response = client.post("/api/eval", json={"map": "x1^2", "point": outside})
    assert response.status_code == 400
    assert response.json()["error"] == "precondition"


def test_numerical_errors_return_500(client):
    outside = tuple_to_doc(MatrixTuple([1.5 * np.eye(2)]))
    response = client.post("/api/perron", json={"point": outside})
    assert response.status_code == 500
    assert response.json()["error"] == "numerical"


def test_unknown_operation_is_404(client):
    assert client.post("/api/does-not-exist", json={}).status_code == 404


def test_fix_verify_endpoint(client):
    payload = {
        "map": "scale factors=(1,0.5)",
        "levels": [1],
        "samples": 5,
        "newton_starts": 3,
    }
    response = client.post("/api/fix-verify", json=payload)
    assert response.status_code == 200
    doc = response.json()
    assert doc["passed"] is True
    assert doc["v1"]["dim"] == 1
    assert doc["levels"][0]["newton_converged"] == 3


def test_perron_endpoint_reports_gap(client):
    x = MatrixTuple(
        [np.array([[0.1, 0.4], [0.0, 0.2]]), np.array([[0.0, 0.0], [0.4, 0.1]])]
    )
    response = client.post("/api/perron", json={"point": tuple_to_doc(x)})
    assert response.status_code == 200
    doc = response.json()
    assert 0 < doc["r"] < 1
    assert doc["residual"] < 1e-8
    a = np.array([[complex(*pair) for pair in row] for row in doc["a"]])
    assert np.linalg.eigvalsh((a + a.conj().T) / 2).min() > 0


def test_variety_report_endpoint(client):
    payload = {"builtin": "commutator-half", "max_level": 2, "samples_per_level": 5}
    response = client.post("/api/variety-report", json=payload)
    assert response.status_code == 200
    doc = response.json()
    assert doc["hypothesis_ok"] is True
    assert doc["scalar"]["positive_dimensional"] is True
    levels = {entry["level"]: entry for entry in doc["matspan_per_level"]}
    assert levels[2]["full"] is True
