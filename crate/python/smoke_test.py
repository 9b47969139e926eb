"""Smoke test for the nbap_py extension module.

Build and install first:
    pip install --no-build-isolation -e crates/python
"""

import math
import tempfile
from pathlib import Path

import nbap_py as nb


def check_graph():
    g = nb.AisleGraph(4, 5)
    assert (g.rows, g.cols) == (4, 5)
    assert g.bases == [(2, 0), (2, 6)]
    assert g.row_cost(1) == 4.0
    assert g.legal_moves((2, 0), "right")
    cost, path = g.route_to_base((1, 3), "right")
    assert path[-1] in g.bases and cost > 0


def check_boundary():
    # g(p) = mu w (e^{p/w} - 1 - p/w)
    p, mu, w = 3.0, 1.5, 2.0
    x = p / w
    assert math.isclose(nb.boundary(p, mu, w), mu * w * (math.exp(x) - 1 - x), rel_tol=1e-12)
    assert nb.should_continue(10.0, 0.0, 1.0, 2.0)
    assert not nb.should_continue(1.0, 100.0, 1.0, 2.0)


def check_mission():
    g = nb.AisleGraph(6, 8)
    m = nb.Mission.random(g, [(1, 1.0, 2.0)], 20, 40.0, 80.0, seed=5)
    assert len(m) == 20
    again = nb.Mission.random(g, [(1, 1.0, 2.0)], 20, 40.0, 80.0, seed=5)
    assert m.tasks == again.tasks
    for planner in nb.PLANNERS:
        trace = m.execute(planner, robots=2)
        m.check(trace)
        stats = trace.metrics()
        assert stats["completed"] == 20, (planner, stats)
        back = nb.Trace.parse(trace.to_text())
        assert back.metrics() == stats


def check_scenario():
    assert "table1_s1" in nb.preset_names()
    s = nb.Scenario.preset("table1_s1")
    s.trials = 2
    s.planners = ["nbap", "nlm"]
    rows = s.run()
    assert [r["planner"] for r in rows] == ["nbap", "nlm"]
    assert nb.Scenario.from_toml(s.to_toml()).to_toml() == s.to_toml()
    with tempfile.TemporaryDirectory() as d:
        files = s.write(d)
        assert (Path(d) / "trials.csv").exists() and files


def check_abort_rate():
    # single level: rate approaches 1 / (ratio + 1)
    rate = nb.abort_rate([(1, 1.0, 1.0)], 4.0, 20000, seed=1)
    assert abs(rate - 0.2) < 0.02, rate


def check_errors():
    for bad in (lambda: nb.AisleGraph(0, 3), lambda: nb.boundary(-1.0, 1.0, 1.0), lambda: nb.Scenario.preset("nope")):
        try:
            bad()
        except ValueError:
            continue
        raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for check in (check_graph, check_boundary, check_mission, check_scenario, check_abort_rate, check_errors):
        check()
        print(f"{check.__name__}: ok")
