"""Shipped scenario templates.

``scenario1`` and ``scenario2`` use a uniform wind and the same landing
covariance at every vertex; ``scenario3`` derives wind-speed-dependent
landing distributions from the descent simulation; ``tiny-oracle`` is small
enough for exhaustive search.
"""

import numpy as np

from .dropsim import SensorBody, WindField, simulate_descent
from .exceptions import InvalidInputError

RELEASE_HEIGHT = 500.0
BUDGET = 870.0
GRID_N = 5
SPACING = 60.0
UNIFORM_WIND = (1.5, 0.5)
KERNEL = {"signal_variance": 0.1, "length_scales": [25.0, 25.0]}
NOISE = {"measurement_variance": 1e-3, "jitter": 0.0}

# Points of interest: two square clusters on the south-west/north-east diagonal.
POIS = [
    [80.0, 80.0], [110.0, 80.0], [80.0, 110.0], [110.0, 110.0],
    [200.0, 200.0], [230.0, 200.0], [200.0, 230.0], [230.0, 230.0],
]
# Depots: opposite corners of the grid for the uniform-covariance scenarios,
# adjacent corners for the physics scenario.
CORNER_DEPOTS = (0, GRID_N * GRID_N - 1)
SIDE_DEPOTS = (0, GRID_N - 1)


def _grid_spec(n=GRID_N, spacing=SPACING):
    return {"grid": {"nx": n, "ny": n, "spacing": spacing, "height": RELEASE_HEIGHT,
                     "origin": [0.0, 0.0], "diagonals": True}}


def _grid_positions(n=GRID_N, spacing=SPACING):
    return [(ix * spacing, iy * spacing, RELEASE_HEIGHT) for iy in range(n) for ix in range(n)]


def ground_truth(seed, n_bumps=5, lo=0.0, hi=300.0):
    """Random positive Gaussian bumps, rescaled so the field peaks at 1 on the map.

    Returns the components and the factor that restores the raw amplitudes.
    """
    rng = np.random.default_rng([int(seed), 7])
    centers = rng.uniform(lo, hi, size=(n_bumps, 2))
    widths = rng.uniform(30.0, 60.0, size=n_bumps)
    amps = rng.uniform(0.3, 1.0, size=n_bumps)
    xs = np.linspace(lo, hi, 121)
    grid = np.stack(np.meshgrid(xs, xs), axis=-1).reshape(-1, 2)
    field = np.zeros(len(grid))
    for c, w, a in zip(centers, widths, amps):
        field += a * np.exp(-np.sum((grid - c) ** 2, axis=1) / (2 * w * w))
    scale = float(field.max())
    amps = amps / scale
    comps = [{"center": [float(c[0]), float(c[1])], "amplitude": float(a), "width": float(w)}
             for c, w, a in zip(centers, widths, amps)]
    return comps, scale


def _base(name, seed):
    comps, scale = ground_truth(seed)
    return {
        "name": name,
        "pois": [list(p) for p in POIS],
        "kernel": dict(KERNEL, length_scales=list(KERNEL["length_scales"])),
        "noise": dict(NOISE),
        "eta": 0.0,
        "ground_truth": comps,
        "ground_truth_scale": scale,
        "eval": {"trials": 100, "master_seed": int(seed)},
    }


def _uniform_cov_landing(variance):
    wind = WindField.uniform(UNIFORM_WIND)
    body = SensorBody()
    cov = [[float(variance), 0.0], [0.0, float(variance)]]
    out = []
    for pos in _grid_positions():
        mean = simulate_descent(pos, wind, body)
        out.append({"mean": [float(mean[0]), float(mean[1])], "cov": cov})
    return {"explicit": out}


def wind_grid():
    """Non-uniform wind: speed grows from about 1 m/s (south-west) to 3 m/s (north-east)."""
    n = 7
    cell = 50.0
    values = []
    for iy in range(n):
        row = []
        for ix in range(n):
            s = 1.0 + 2.0 * (ix + iy) / (2 * (n - 1))
            row.append([round(0.9 * s, 6), round(0.3 * s, 6)])
        values.append(row)
    return {"values": values, "origin": [0.0, 0.0], "cell_size": cell,
            "gust_std": 5.0, "gust_speed_ratio": 7.0}


def make_template(name, seed=0):
    """Scenario document for a named template."""
    if name == "scenario1":
        doc = _base(name, seed)
        doc["graph"] = _grid_spec()
        doc["landing"] = _uniform_cov_landing(900.0)
        doc["uavs"] = [{"depot": d, "budget": BUDGET, "sensors": 4} for d in CORNER_DEPOTS]
    elif name == "scenario2":
        doc = _base(name, seed)
        doc["graph"] = _grid_spec()
        doc["landing"] = _uniform_cov_landing(820.0)
        doc["uavs"] = [{"depot": d, "budget": BUDGET, "sensors": 3} for d in CORNER_DEPOTS]
    elif name == "scenario3":
        doc = _base(name, seed)
        doc["graph"] = _grid_spec()
        doc["landing"] = {"physics": {"wind": wind_grid(),
                                      "body": {"mass": 10.0, "surface_coefficient": 1.0, "air_density": 1.225},
                                      "dt": 0.05, "n_samples": 400, "seed": int(seed)}}
        doc["uavs"] = [{"depot": d, "budget": BUDGET, "sensors": 4} for d in SIDE_DEPOTS]
    elif name == "tiny-oracle":
        doc = _base(name, seed)
        doc["pois"] = [[60.0, 40.0], [150.0, 60.0], [100.0, 140.0]]
        positions = [(0.0, 0.0), (80.0, 0.0), (160.0, 0.0), (0.0, 80.0), (80.0, 80.0), (160.0, 80.0)]
        doc["graph"] = {
            "vertices": [{"id": i, "position": [x, y, RELEASE_HEIGHT]} for i, (x, y) in enumerate(positions)],
            "edges": [[i, j, float(np.hypot(positions[i][0] - positions[j][0], positions[i][1] - positions[j][1]))]
                      for i in range(6) for j in range(i + 1, 6)],
        }
        wind = WindField.uniform(UNIFORM_WIND)
        doc["landing"] = {"explicit": [
            {"mean": [float(v) for v in simulate_descent((x, y, RELEASE_HEIGHT), wind)],
             "cov": [[400.0, 0.0], [0.0, 400.0]]}
            for x, y in positions]}
        doc["uavs"] = [{"depot": 0, "budget": 400.0, "sensors": 2}, {"depot": 2, "budget": 400.0, "sensors": 2}]
    else:
        raise InvalidInputError(f"unknown template {name!r}; choose from {sorted(TEMPLATES)}")
    return doc


TEMPLATES = ("scenario1", "scenario2", "scenario3", "tiny-oracle")
