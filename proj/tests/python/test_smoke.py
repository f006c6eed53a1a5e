import csv
import io
import json
import math
import os
from pathlib import Path

import pytest

import higvf

SCENARIOS = Path(os.environ.get("HIGVF_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))


def test_case1_settles_on_circle():
    sim = higvf.Simulation.from_file(str(SCENARIOS / "case1_inside.scn"))
    sim.run(40.0)
    assert sim.clock == pytest.approx(40.0)
    x, y = sim.positions()[1]
    assert abs(math.hypot(x - 250, y - 300) - 250) < 1.0


def test_tick_reports_every_robot():
    sim = higvf.Simulation.from_file(str(SCENARIOS / "case1_outside.scn"))
    rec = sim.tick()
    assert rec["tick"] == 1
    assert len(rec["robots"]) == 3
    assert sum(r["influenced"] for r in rec["robots"]) == 1


def test_trajectory_export_is_deterministic():
    def export():
        sim = higvf.Simulation.from_file(str(SCENARIOS / "case3_obstacles.scn"))
        sim.run(5.0)
        return sim.trajectory_csv()

    a, b = export(), export()
    assert a == b
    rows = list(csv.reader(io.StringIO(a)))
    assert len(rows) > 1


def test_scripted_select_moves_influence():
    sim = higvf.Simulation.from_file(str(SCENARIOS / "case1_inside.scn"))
    sim.set_script(json.dumps([{"t": 0.0, "command": {"type": "select_robot", "robot": 2}}]))
    sim.tick()
    rec = sim.tick()
    assert [r["influenced"] for r in rec["robots"]] == [False, False, True]


def test_submit_rejects_bad_command():
    sim = higvf.Simulation.from_file(str(SCENARIOS / "case1_inside.scn"))
    with pytest.raises(higvf.CommandError):
        sim.submit(json.dumps({"type": "launch"}))


def test_qp_projection():
    # min |v - (2, 0)|^2 with x <= 1 projects to (1, 0)
    (vx, vy), feasible = higvf.solve_qp((2.0, 0.0), [(1.0, 0.0, 1.0)])
    assert feasible
    assert (vx, vy) == pytest.approx((1.0, 0.0))
    assert higvf.solve_qp((0.5, 0.25), [(1.0, 0.0, 1.0)])[0] == (0.5, 0.25)


def test_invalid_scenario_raises():
    with pytest.raises(higvf.ScenarioError):
        higvf.validate_scenario(json.dumps({"robots": [[0, 0], [0, 0]]}))


def test_table1_losses_positive():
    sim = higvf.Simulation.from_file(str(SCENARIOS / "table1.scn"))
    sim.run(20.0)
    areas, total = sim.loss()
    assert len(areas) == 5
    assert total == pytest.approx(sum(areas))
    assert sim.safety()["min_robot_distance"] >= 20.0 - 1e-3
