import numpy as np
import pytest

from sensordrop.gp import KernelParams, NoiseParams, UncertainLocation
from sensordrop.planner import UAV, Scenario
from sensordrop.world import DropNode, WorldGraph

_criteria = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "_acceptance", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        num, title = marker
        prev = _criteria.get(num, (title, True))
        _criteria[num] = (title, prev[1] and report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("acceptance")
    if m is not None:
        outcome.get_result()._acceptance = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        title, ok = _criteria[num]
        terminalreporter.write_line(f"AC{num} {'PASS' if ok else 'FAIL'}  {title}")


def random_metric_scenario(rng, n=6, n_uavs=2, k=2, budget=None, n_pois=3, var_range=(0.0, 400.0), eta=0.0):
    """Small Euclidean scenario on random points in a 200 m square."""
    xy = rng.uniform(0.0, 200.0, size=(n, 2))
    nodes = []
    for i, p in enumerate(xy):
        v = rng.uniform(*var_range)
        nodes.append(DropNode(i, [p[0], p[1], 100.0], UncertainLocation(p + rng.normal(0, 10, 2), v * np.eye(2))))
    edges = [(i, j, float(np.hypot(*(xy[i] - xy[j])))) for i in range(n) for j in range(i + 1, n)]
    depots = list(rng.choice(n, size=n_uavs, replace=True))
    g = WorldGraph(nodes, edges, depots)
    if budget is None:
        budget = float(rng.uniform(250.0, 600.0))
    pois = rng.uniform(0.0, 200.0, size=(n_pois, 2))
    uavs = [UAV(int(d), budget, k) for d in depots]
    return Scenario(g, pois, KernelParams(1.0, (40.0, 40.0)), NoiseParams(0.01), uavs, eta)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
