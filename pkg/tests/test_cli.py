import csv
import io
import json

import jsonschema
import pytest

from rateroute import schemas
from rateroute.cli import main
from rateroute.model import dump_instance, instance_to_dict
from rateroute.pipeline import RUNTIME_COLUMNS


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def diamond_file(tmp_path, diamond_instance):
    p = tmp_path / "diamond.json"
    p.write_text(dump_instance(diamond_instance))
    jsonschema.validate(json.loads(p.read_text()), schemas.INSTANCE)
    return p


def test_solve_diamond(capsys, diamond_file):
    code, out, _ = run(capsys, "solve", diamond_file, "--clamp-beta", "--trials", 50)
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schemas.SOLVE)
    assert doc["total_cost"] == 4
    assert doc["lower_bound"] <= 4
    assert doc["empirical_ratio"] == pytest.approx(4 / doc["lower_bound"])
    assert sorted(p["nodes"][1] for p in doc["paths"].values()) == ["a", "b"]


def test_solve_concave_fit_without_clamp(capsys, diamond_file):
    code, _, err = run(capsys, "solve", diamond_file)
    assert code == 1
    doc = json.loads(err)
    jsonschema.validate(doc, schemas.ERROR)
    assert doc["error"] == "configuration_error"
    assert "non-convex objective" in doc["message"]


def test_oracle_diamond(capsys, diamond_file):
    code, out, _ = run(capsys, "oracle", diamond_file)
    doc = json.loads(out)
    jsonschema.validate(doc, schemas.ORACLE)
    assert doc["optimal_cost"] == 4 and doc["certified"]


def test_fit_single_state(capsys, tmp_path):
    p = tmp_path / "rates.json"
    p.write_text(json.dumps({"rates": [{"speed": 4, "cost": 2}]}))
    code, out, _ = run(capsys, "fit", p)
    doc = json.loads(out)
    jsonschema.validate(doc, schemas.FIT)
    assert doc["beta"] == pytest.approx(0, abs=1e-12)
    assert doc["mu"] == pytest.approx(2)
    assert doc["bounds"]["holds"] is None


def test_relax(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "--seed", 3, "--cost-model", "power", "--sigma-max", 4)
    p = tmp_path / "inst.json"
    p.write_text(out)
    code, out, _ = run(capsys, "relax", p, "--clamp-beta", "--out", tmp_path / "relax.json")
    assert code == 0 and out == ""
    doc = json.loads((tmp_path / "relax.json").read_text())
    jsonschema.validate(doc, schemas.RELAX)
    assert doc["duality_gap"] <= 1e-4


def test_gen_deterministic(capsys):
    _, a, _ = run(capsys, "gen", "--seed", 5, "--nodes", 9)
    _, b, _ = run(capsys, "gen", "--seed", 5, "--nodes", 9)
    assert a == b
    jsonschema.validate(json.loads(a), schemas.INSTANCE)


def test_gen_edp(capsys, tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"edges": [{"id": 0, "u": "a", "v": "b"}, {"id": 1, "u": "b", "v": "c"}],
                             "pairs": [["a", "c"]]}))
    _, out, _ = run(capsys, "gen", "--edp", p, "--rho", 2)
    doc = json.loads(out)
    jsonschema.validate(doc, schemas.INSTANCE)
    assert [r["speed"] for r in doc["rates"]] == [1, 2]
    assert doc["rates"][1]["cost"] == pytest.approx(2 * 2 * 1.01)


def test_invalid_instance(capsys, tmp_path, diamond_instance):
    doc = instance_to_dict(diamond_instance)
    doc["demands"].append({"src": "s", "dst": "s", "amount": 1})
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    code, _, err = run(capsys, "oracle", p)
    assert code == 1
    e = json.loads(err)
    jsonschema.validate(e, schemas.ERROR)
    assert e["error"] == "invalid_instance"
    assert any("degenerate demand" in v for v in e["violations"])


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "solve", tmp_path / "nope.json")
    assert code == 1
    assert json.loads(err)["error"] == "io_error"


def _rows(text):
    lines = text.splitlines()
    assert lines[0] == "# rateroute-bench v1"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_bench_deterministic_and_parallel(capsys):
    args = ["bench", "--seed", 7, "--count", 4, "--trials", 30]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--workers", 2)
    ra, rb = _rows(a), _rows(b)
    for row in ra + rb:
        for c in RUNTIME_COLUMNS:
            row.pop(c)
    assert ra == rb
    assert [r["index"] for r in ra] == ["0", "1", "2", "3"]
    ok = [r for r in ra if r["status"] == "ok"]
    assert ok
    for r in ok:
        if r["certified"] == "True":
            assert float(r["best_cost"]) >= float(r["oracle_cost"]) - 1e-9
            assert float(r["lower_bound"]) <= float(r["oracle_cost"]) * (1 + 1e-4)
