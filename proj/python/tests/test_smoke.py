import json
import math
from pathlib import Path

import pytest

import wellopt

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_latin_hypercube_fills_every_stratum():
    pts = wellopt.latin_hypercube(8, 3, 5)
    assert len(pts) == 8
    for d in range(3):
        strata = sorted(int(p[d] * 8) for p in pts)
        assert strata == list(range(8))


def test_halton_base_two_and_three():
    assert wellopt.halton(1, 0) == 0.5
    assert wellopt.halton(3, 0) == 0.75
    assert wellopt.halton(1, 1) == pytest.approx(1 / 3)


def test_ortho_directions_are_orthogonal_integers():
    dirs = wellopt.ortho_directions(0.01, 4, 7)
    assert len(dirs) == 8
    for a in range(4):
        for b in range(4):
            dot = sum(x * y for x, y in zip(dirs[a], dirs[b]))
            assert (dot > 0) if a == b else (dot == 0)
        assert dirs[a + 4] == [-v for v in dirs[a]]


def test_optimize_quadratic_reaches_minimizer():
    target = [0.3, 0.6]
    res = wellopt.optimize(lambda x: -sum((a - b) ** 2 for a, b in zip(x, target)), 2,
                           algorithm="mads", budget=2000, seed=3)
    assert res["ok"]
    assert res["simulations"] <= 2000
    for a, b in zip(res["best"]["x"], target):
        assert abs(a - b) < 1e-4


def test_optimize_respects_constraint():
    res = wellopt.optimize(lambda x: (x[0] + x[1], max(x[0] ** 2 + x[1] ** 2 - 0.5, 0.0)), 2,
                           algorithm="mads", budget=4000, seed=2)
    assert res["best"]["feasible"]
    assert res["best"]["npv"] == pytest.approx(1.0, abs=5e-3)


def test_optimize_propagates_python_errors():
    def boom(x):
        raise KeyError("nope")

    with pytest.raises(KeyError):
        wellopt.optimize(boom, 2, algorithm="pso", budget=50)


def test_validate_reports_dimension():
    info = wellopt.validate(str(CONFIGS / "tiny.json"))
    assert info["dimension"] == 2 * 2 + 2 * 5
    assert info["feasibility_tolerance"] == 0.0


def test_bad_config_raises_config_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x"}))
    with pytest.raises(wellopt.ConfigError):
        wellopt.validate(str(bad))


def test_evaluate_gives_finite_npv_and_zero_violation():
    res = wellopt.evaluate(str(CONFIGS / "tiny.json"), [0.2, 0.3, 0.8, 0.7] + [0.5] * 10)
    assert res["status"] == "ok"
    assert math.isfinite(res["npv"])
    assert res["h"] == 0.0


def test_run_small_experiment():
    out = wellopt.run(str(CONFIGS / "tiny.json"), repeats=2, budget=60)
    s = out["summary"]
    assert s["runs"] == 2 and s["failed"] == 0
    for r in out["runs"]:
        assert r["simulations"] <= 60
    assert s["best"] == max(r["best"]["npv"] for r in out["runs"])


def test_simulate_solution_round_trip(tmp_path):
    sol = {
        "format": "wellopt-solution",
        "version": 1,
        "npv": 1.0,
        "wells": [
            {"label": "I1", "role": "injector", "shape": "vertical", "x_idx": 9, "y_idx": 2},
            {"label": "P1", "role": "producer", "shape": "vertical", "x_idx": 1, "y_idx": 7},
        ],
        "schedule": {"interval_years": 2.0, "bhp": [[400.0] * 5, [150.0] * 5]},
    }
    path = tmp_path / "sol.json"
    path.write_text(json.dumps(sol))
    a = wellopt.simulate_solution(str(path), str(CONFIGS / "tiny.json"))
    b = wellopt.simulate_solution(str(path), str(CONFIGS / "tiny.json"))
    assert a["status"] == "ok" and a["feasible"]
    assert a["npv"] > 0 and a["npv"] == b["npv"]
    assert a["recorded_npv"] == 1.0
