import csv
import json

import numpy as np
import pytest

from subsetflow.cli import dumps, main


def write_points(tmp_path, points, name="in.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"points": points}))
    return str(path)


def run_json(capsys, argv):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


def test_retract_midpoint(tmp_path, capsys):
    code, doc = run_json(capsys, ["retract", write_points(tmp_path, [[0], [1]]), "--k", "1"])
    assert code == 0
    np.testing.assert_allclose(doc["points"], [[0.5]], rtol=1e-12)
    assert set(doc) >= {"points", "t_estimate", "displacement_bound", "steps"}
    assert doc["t_estimate"] == pytest.approx(0.5)


def test_retract_triple_collision(tmp_path, capsys):
    code, doc = run_json(capsys, ["retract", write_points(tmp_path, [[0], [1], [2]]), "--k", "2"])
    assert code == 0
    np.testing.assert_allclose(doc["points"], [[1.0]], rtol=1e-12)


def test_retract_echoes_small_input(tmp_path, capsys):
    pts = [[3.0, 1.0], [0.0, 2.0]]
    code, doc = run_json(capsys, ["retract", write_points(tmp_path, pts), "--k", "5"])
    assert code == 0
    assert doc["points"] == pts
    assert doc["steps"] == 0


def test_retract_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(0)
    src = write_points(tmp_path, rng.uniform(-1, 1, (5, 3)).tolist())
    out = tmp_path / "out.json"
    assert main(["retract", src, "--k", "2", "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["points"]) <= 2
    code, again = run_json(capsys, ["retract", str(out), "--k", "5"])
    assert code == 0 and again["points"] == doc["points"]


@pytest.mark.parametrize("content", [
    "not json",
    json.dumps({"pts": [[0]]}),
    json.dumps({"points": []}),
    json.dumps({"points": [[0, 1], [2]]}),
    json.dumps({"points": [["a"]]}),
])
def test_retract_malformed_input(tmp_path, capsys, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert main(["retract", str(path)]) == 2
    assert capsys.readouterr().err


def test_retract_missing_file(capsys):
    assert main(["retract", "/nonexistent/points.json"]) == 2


def test_retract_divergence_exit_status(tmp_path, capsys):
    assert main(["retract", write_points(tmp_path, [[0], [1], [5]]), "--max-steps", "2"]) == 3


def test_bad_flow_flags(tmp_path):
    assert main(["retract", write_points(tmp_path, [[0], [1]]), "--step-safety", "1.5"]) == 2


def test_trace_csv(tmp_path, capsys):
    assert main(["trace", write_points(tmp_path, [[0], [1]])]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["t", "point_index", "c0"]
    body = np.array(rows[1:], dtype=float)
    t, idx, c = body[:, 0], body[:, 1], body[:, 2]
    # linear approach: point 0 sits at t, point 1 at 1 - t
    np.testing.assert_allclose(c[idx == 0], t[idx == 0], rtol=1e-12)
    np.testing.assert_allclose(c[idx == 1], 1 - t[idx == 1], rtol=1e-12)
    final = c[-2:]
    assert abs(final[1] - final[0]) <= 1e-9


def test_trace_svg(tmp_path):
    src = write_points(tmp_path, [[0, 0], [1, 0], [0.5, 0.8660254037844386]])
    svg = tmp_path / "tri.svg"
    out = tmp_path / "tri.csv"
    assert main(["trace", src, "--svg", str(svg), "-o", str(out)]) == 0
    assert svg.read_text().lstrip().startswith("<?xml")
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0] == ["t", "point_index", "c0", "c1"]
    last = np.array(rows[-3:], dtype=float)[:, 2:]
    np.testing.assert_allclose(last, [[0.5, 0.28867513459481287]] * 3, atol=1e-8)


def test_trace_svg_rejects_high_dimension(tmp_path, capsys):
    assert main(["trace", write_points(tmp_path, [[0, 0, 0], [1, 0, 0]]), "--svg", str(tmp_path / "x.svg")]) == 4
    assert "svg requires d <= 2" in capsys.readouterr().err
    assert not (tmp_path / "x.svg").exists()


def test_trace_needs_two_points(tmp_path):
    assert main(["trace", write_points(tmp_path, [[0, 0], [0, 0]])]) == 2


def test_verify_report(tmp_path):
    out = tmp_path / "report.json"
    code = main(["verify", "--n", "3", "--dim", "2", "--trials", "30", "--seed", "42", "-o", str(out)])
    doc = json.loads(out.read_text())
    assert code == 0 and doc["all_passed"] is True
    for entry in doc["suite"]:
        assert list(entry) == ["name", "passed", "observed", "bound", "tolerance", "trials_run", "witness"]
        assert entry["passed"] == (entry["observed"] <= entry["bound"] * (1 + entry["tolerance"]))


def test_verify_rejects_bad_flags(capsys):
    assert main(["verify", "--n", "1", "--seed", "1"]) == 2
    assert main(["verify", "--trials", "0", "--seed", "1"]) == 2


def test_verify_requires_seed():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--n", "3"])
    assert exc.value.code == 2


def test_bench_rows(tmp_path, capsys):
    assert main(["bench", "--n", "2", "3", "4", "5", "6", "--dim", "2", "--trials", "3", "--seed", "1"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["n", "d", "trials", "mean_steps", "mean_wall_time", "max_ratio_observed"]
    assert [int(r[0]) for r in rows[1:]] == [2, 3, 4, 5, 6]


def test_bench_steps_grow_with_tighter_tolerance(capsys):
    steps = []
    for tol in ("1e-3", "1e-6", "1e-9"):
        assert main(["bench", "--n", "3", "--trials", "5", "--seed", "2", "--collision-tol", tol]) == 0
        rows = list(csv.reader(capsys.readouterr().out.splitlines()))
        steps.append(float(rows[1][3]))
    # roughly equal increments per factor 1000: logarithmic growth
    inc = np.diff(steps)
    assert np.all(inc > 0)
    assert inc[1] == pytest.approx(inc[0], rel=0.3)


def test_bench_requires_seed():
    with pytest.raises(SystemExit):
        main(["bench", "--n", "3"])


def test_dumps_seventeen_digits():
    text = dumps({"x": 0.1, "y": [1, 2.5], "z": float("inf"), "b": True})
    assert "0.10000000000000001" in text
    assert json.loads(text)["z"] == float("inf")
