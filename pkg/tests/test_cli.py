import json
import math

import numpy as np
import pytest

from freeball.cli import main
from freeball.points import MatrixTuple
from freeball.serialization import tuple_to_doc
from freeball.varieties import builtin_fixture


def _write_point(tmp_path, x, name="point.json"):
    path = tmp_path / name
    path.write_text(json.dumps(tuple_to_doc(x)))
    return str(path)


@pytest.fixture
def scalar_point(tmp_path):
    return _write_point(tmp_path, MatrixTuple.from_scalar_point([0.2, 0.1]))


def test_eval_scaling_map(scalar_point, capsys):
    code = main(["eval", "--map", "scale factors=(1,0.5)", "--point", scalar_point])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["d"] == 2 and doc["n"] == 1
    assert doc["coords"][0][0][0] == [0.2, 0.0]
    assert doc["coords"][1][0][0] == [0.05, 0.0]


def test_output_is_byte_identical_across_runs(scalar_point, capsys):
    main(["eval", "--map", "x1^2; x1*x2", "--point", scalar_point])
    first = capsys.readouterr().out
    main(["eval", "--map", "x1^2; x1*x2", "--point", scalar_point])
    assert capsys.readouterr().out == first
    assert first.endswith("\n")


def test_out_flag_writes_the_document(scalar_point, tmp_path, capsys):
    target = tmp_path / "result.json"
    code = main(
        ["distance", "--point", scalar_point, "--out", str(target)]
    )
    assert code == 0
    assert capsys.readouterr().out == ""
    doc = json.loads(target.read_text())
    norm = math.hypot(0.2, 0.1)
    assert abs(doc["distance"] - math.atanh(norm)) < 1e-12


def test_text_format(scalar_point, capsys):
    code = main(["eval", "--map", "scale factors=(1,0.5)", "--point", scalar_point, "--format", "text"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.strip()
    assert "0.05" in out


def test_parse_errors_exit_3(scalar_point, tmp_path, capsys):
    assert main(["eval", "--map", "warp k=2", "--point", scalar_point]) == 3
    assert main(["eval", "--map", "x1", "--point", str(tmp_path / "missing.json")]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["eval", "--map", "x1", "--point", str(bad)]) == 3
    shallow = tmp_path / "shallow.json"
    shallow.write_text('{"d": 2}')
    assert main(["eval", "--map", "x1", "--point", str(shallow)]) == 3
    capsys.readouterr()


def test_precondition_errors_exit_1(tmp_path, capsys):
    outside = _write_point(tmp_path, MatrixTuple([1.5 * np.eye(2)]), "outside.json")
    assert main(["eval", "--map", "x1^2", "--point", outside]) == 1
    # non-generic tuple: the Perron data is undefined
    diag = _write_point(
        tmp_path,
        MatrixTuple([np.diag([0.3, 0.1]), np.diag([0.2, 0.4])]),
        "diag.json",
    )
    assert main(["perron", "--point", diag]) == 1
    capsys.readouterr()


def test_numerical_errors_exit_2(tmp_path, capsys):
    outside = _write_point(tmp_path, MatrixTuple([1.5 * np.eye(2)]), "outside.json")
    assert main(["perron", "--point", outside]) == 2
    capsys.readouterr()


def test_fix_verify_small_run(capsys):
    code = main(
        [
            "fix-verify",
            "--map",
            "scale factors=(1,0.5)",
            "--levels",
            "1..2",
            "--samples",
            "5",
            "--newton-starts",
            "3",
        ]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    assert doc["levels_checked"] == [1, 2]
    assert doc["v1"]["dim"] == 1


def test_qn_at_the_origin(capsys):
    code = main(["qn", "--map", "scale factors=(1,0.5)", "--level", "1"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["q"] == [-0.5, 0.0]
    assert doc["normal_dim"] == 1


def test_variety_check_builtin(tmp_path, capsys):
    fixture = _write_point(tmp_path, builtin_fixture("commutator-half"), "fixture.json")
    code = main(["variety-check", "--builtin", "commutator-half", "--point", fixture])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["on_variety"] is True
    assert doc["residual"] < 1e-12
    # builtin and an explicit spec are mutually exclusive
    spec = tmp_path / "variety.json"
    spec.write_text(json.dumps({"d": 2, "relations": ["x1^2"]}))
    code = main(
        [
            "variety-check",
            "--builtin",
            "commutator-half",
            "--variety",
            str(spec),
            "--point",
            fixture,
        ]
    )
    assert code == 1
    capsys.readouterr()


def test_mobius_swaps_origin_and_parameter(tmp_path, capsys):
    origin = _write_point(tmp_path, MatrixTuple.zeros(2, 2), "origin.json")
    code = main(["mobius", "--a", "(0.2, -0.1j)", "--point", origin])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["coords"][0][0][0] == [0.2, 0.0]
    assert doc["coords"][0][0][1] == [0.0, 0.0]
    assert doc["coords"][1][0][0] == [0.0, -0.1]


def test_geodesic(scalar_point, capsys):
    code = main(["geodesic", "--point", scalar_point, "--z", "0.3j"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    norm = math.hypot(0.2, 0.1)
    expected = 0.3j * 0.2 / norm
    got = complex(*doc["coords"][0][0][0])
    assert abs(got - expected) < 1e-12


def test_seed_env_variable_matches_flag(capsys, monkeypatch):
    argv = ["fix-find", "--map", "scale factors=(1,0.5)", "--level", "1", "--starts", "4"]
    assert main(argv + ["--seed", "5"]) == 0
    flagged = capsys.readouterr().out
    monkeypatch.setenv("FREEBALL_SEED", "5")
    assert main(argv) == 0
    assert capsys.readouterr().out == flagged
    monkeypatch.setenv("FREEBALL_SEED", "not-a-number")
    assert main(argv) == 3
    capsys.readouterr()


def test_matspan_accepts_repeated_points(tmp_path, capsys):
    e1 = _write_point(tmp_path, MatrixTuple([np.eye(2) * 0.3, np.zeros((2, 2))]), "e1.json")
    e2 = _write_point(tmp_path, MatrixTuple([np.zeros((2, 2)), np.eye(2) * 0.3]), "e2.json")
    code = main(["matspan", "--point", e1, "--point", e2])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["dim"] == 2
    assert doc["full"] is True


def test_jh_reports_block_sizes(tmp_path, capsys):
    x = MatrixTuple(
        [
            np.array([[0.3, 0.5, 0.1], [0.2, 0.1, 0.4], [0, 0, 0.2]]),
            np.array([[0.1, 0.4, 0.3], [0.5, 0.2, 0.2], [0, 0, 0.1]]),
        ]
    )
    point = _write_point(tmp_path, x, "triangular.json")
    code = main(["jh", "--point", point])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert sorted(doc["block_sizes"]) == [1, 2]
    assert doc["subdiagonal_defect"] < 1e-8
    assert doc["discard_residual"] < 1e-8
