"""Scenario files: JSON schema, parsing, emission, and shipped templates."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .dropsim import SensorBody, WindField, estimate_landing_distribution, simulate_descent
from .evaluation import GaussianBump, GroundTruth
from .exceptions import InvalidInputError, ScenarioError, SensorDropError
from .gp import KernelParams, NoiseParams, UncertainLocation
from .planner import UAV, Scenario
from .world import DropNode, WorldGraph

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_vec2 = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_vec3 = {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}
_mat2 = {"type": "array", "items": _vec2, "minItems": 2, "maxItems": 2}
_int0 = {"type": "integer", "minimum": 0}

SCHEMA = {
    "type": "object",
    "required": ["graph", "landing", "pois", "kernel", "noise", "uavs"],
    "properties": {
        "name": {"type": "string"},
        "graph": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["vertices", "edges"],
                    "additionalProperties": False,
                    "properties": {
                        "vertices": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "required": ["id", "position"],
                                "properties": {"id": _int0, "position": _vec3},
                            },
                        },
                        "edges": {
                            "type": "array",
                            "items": {"type": "array", "prefixItems": [_int0, _int0, _nonneg],
                                      "minItems": 3, "maxItems": 3},
                        },
                    },
                },
                {
                    "type": "object",
                    "required": ["grid"],
                    "additionalProperties": False,
                    "properties": {
                        "grid": {
                            "type": "object",
                            "required": ["nx", "ny", "spacing", "height"],
                            "properties": {
                                "nx": {"type": "integer", "minimum": 1},
                                "ny": {"type": "integer", "minimum": 1},
                                "spacing": _pos,
                                "height": _pos,
                                "origin": _vec2,
                                "diagonals": {"type": "boolean"},
                            },
                        }
                    },
                },
            ]
        },
        "landing": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "explicit": {
                    "type": "array",
                    "items": {"type": "object", "required": ["mean", "cov"],
                              "properties": {"mean": _vec2, "cov": _mat2}},
                },
                "physics": {
                    "type": "object",
                    "required": ["wind"],
                    "properties": {
                        "wind": {
                            "type": "object",
                            "required": ["values", "cell_size"],
                            "properties": {
                                "values": {"type": "array", "minItems": 1,
                                           "items": {"type": "array", "minItems": 1, "items": _vec2}},
                                "origin": _vec2,
                                "cell_size": _pos,
                                "gust_std": _nonneg,
                                "gust_speed_ratio": _nonneg,
                            },
                        },
                        "body": {
                            "type": "object",
                            "properties": {"mass": _pos, "surface_coefficient": _pos, "air_density": _pos},
                        },
                        "dt": _pos,
                        "n_samples": {"type": "integer", "minimum": 2},
                        "seed": _int0,
                    },
                },
            },
        },
        "pois": {"type": "array", "minItems": 1, "items": _vec2},
        "kernel": {
            "type": "object",
            "required": ["signal_variance", "length_scales"],
            "properties": {"signal_variance": _pos,
                           "length_scales": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2}},
        },
        "noise": {
            "type": "object",
            "required": ["measurement_variance"],
            "properties": {"measurement_variance": _nonneg, "jitter": _nonneg},
        },
        "uavs": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["depot", "budget", "sensors"],
                "properties": {"depot": _int0, "budget": _pos, "sensors": _int0},
            },
        },
        "eta": _nonneg,
        "ground_truth": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "object", "required": ["center", "amplitude", "width"],
                      "properties": {"center": _vec2, "amplitude": _num, "width": _pos}},
        },
        "ground_truth_scale": _pos,
        "eval": {
            "type": "object",
            "properties": {"trials": {"type": "integer", "minimum": 1}, "master_seed": _int0},
        },
    },
}


def json_path(parts):
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "$"


@dataclass(eq=False)
class LoadedScenario:
    scenario: Scenario
    ground_truth: GroundTruth = None
    eval_config: dict = field(default_factory=dict)
    name: str = ""
    source: dict = field(default_factory=dict)


def _grid_graph(spec):
    nx, ny = spec["nx"], spec["ny"]
    h = spec["spacing"]
    ox, oy = spec.get("origin", [0.0, 0.0])
    positions = [(ox + ix * h, oy + iy * h, spec["height"]) for iy in range(ny) for ix in range(nx)]
    steps = [(1, 0), (0, 1)] + ([(1, 1), (-1, 1)] if spec.get("diagonals", True) else [])
    edges = []
    for iy in range(ny):
        for ix in range(nx):
            for dx, dy in steps:
                jx, jy = ix + dx, iy + dy
                if 0 <= jx < nx and 0 <= jy < ny:
                    u, v = iy * nx + ix, jy * nx + jx
                    edges.append((u, v, float(np.hypot(dx * h, dy * h))))
    return positions, edges


def _wind_from(spec):
    return WindField(
        np.asarray(spec["values"], dtype=float),
        origin=tuple(spec.get("origin", (0.0, 0.0))),
        cell_size=spec["cell_size"],
        gust_std=spec.get("gust_std", 0.0),
        gust_speed_ratio=spec.get("gust_speed_ratio", 0.0),
    )


def physics_landings(positions, spec):
    """Landing distribution per release position from a physics spec."""
    wind = _wind_from(spec["wind"])
    body = SensorBody(**spec.get("body", {}))
    dt = spec.get("dt", 0.05)
    n = spec.get("n_samples", 200)
    seed = spec.get("seed", 0)
    out = []
    for i, pos in enumerate(positions):
        if wind.stochastic:
            vseed = int(np.random.SeedSequence([int(seed), i]).generate_state(1)[0])
            out.append(estimate_landing_distribution(pos, wind, body, dt, n, seed=vseed))
        else:
            out.append(UncertainLocation(simulate_descent(pos, wind, body, dt), np.zeros((2, 2))))
    return out


def scenario_from_dict(doc):
    """Validate a scenario document and build the in-memory objects."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise ScenarioError(json_path(err.absolute_path), err.message)

    gspec = doc["graph"]
    if "grid" in gspec:
        positions, edges = _grid_graph(gspec["grid"])
    else:
        verts = gspec["vertices"]
        for i, v in enumerate(verts):
            if v["id"] != i:
                raise ScenarioError(f"graph.vertices[{i}].id", f"ids must be dense and ordered, expected {i}")
        positions = [tuple(v["position"]) for v in verts]
        edges = [tuple(e) for e in gspec["edges"]]
        for j, (u, v, _) in enumerate(edges):
            for side, x in (("0", u), ("1", v)):
                if x >= len(positions):
                    raise ScenarioError(f"graph.edges[{j}][{side}]", f"vertex {x} does not exist")
    n = len(positions)

    lspec = doc["landing"]
    if "explicit" in lspec:
        entries = lspec["explicit"]
        if len(entries) != n:
            raise ScenarioError("landing.explicit", f"expected {n} entries (one per vertex), got {len(entries)}")
        landings = []
        for i, e in enumerate(entries):
            try:
                landings.append(UncertainLocation(e["mean"], e["cov"]))
            except SensorDropError as exc:
                raise ScenarioError(f"landing.explicit[{i}].cov", str(exc)) from None
    else:
        landings = physics_landings(positions, lspec["physics"])

    try:
        nodes = [DropNode(i, positions[i], landings[i]) for i in range(n)]
    except InvalidInputError as exc:
        raise ScenarioError("graph.vertices", str(exc)) from None
    uavs = doc["uavs"]
    for i, u in enumerate(uavs):
        if u["depot"] >= n:
            raise ScenarioError(f"uavs[{i}].depot", f"vertex {u['depot']} does not exist")
    graph = WorldGraph(nodes, edges, [u["depot"] for u in uavs])
    kernel = KernelParams(doc["kernel"]["signal_variance"], tuple(doc["kernel"]["length_scales"]))
    noise = NoiseParams(doc["noise"]["measurement_variance"], doc["noise"].get("jitter", 0.0))
    try:
        noise.check_against(kernel)
    except InvalidInputError as exc:
        raise ScenarioError("noise.jitter", str(exc)) from None
    scenario = Scenario(graph, np.asarray(doc["pois"], dtype=float), kernel, noise,
                        [UAV(u["depot"], u["budget"], u["sensors"]) for u in uavs], doc.get("eta", 0.0))
    gt = None
    if "ground_truth" in doc:
        gt = GroundTruth(tuple(GaussianBump(tuple(c["center"]), c["amplitude"], c["width"])
                               for c in doc["ground_truth"]), doc.get("ground_truth_scale", 1.0))
    eval_cfg = {"trials": 100, "master_seed": 0}
    eval_cfg.update(doc.get("eval", {}))
    return LoadedScenario(scenario, gt, eval_cfg, doc.get("name", ""), doc)


def load_scenario(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"invalid JSON: {exc}") from None
    return scenario_from_dict(doc)


def scenario_to_dict(scenario, ground_truth=None, eval_config=None, name=""):
    """Explicit-form document: every vertex, edge, and landing distribution spelled out."""
    g = scenario.graph
    doc = {
        "name": name,
        "graph": {
            "vertices": [{"id": v.id, "position": [float(x) for x in v.position]} for v in g.vertices],
            "edges": [[u, v, w] for u, v, w in g.edges],
        },
        "landing": {
            "explicit": [
                {"mean": [float(x) for x in v.landing.mean],
                 "cov": [[float(x) for x in row] for row in v.landing.covariance]}
                for v in g.vertices
            ]
        },
        "pois": [[float(x) for x in p] for p in scenario.pois],
        "kernel": {"signal_variance": scenario.kernel.signal_variance,
                   "length_scales": list(scenario.kernel.length_scales)},
        "noise": {"measurement_variance": scenario.noise.measurement_variance, "jitter": scenario.noise.jitter},
        "uavs": [{"depot": u.depot, "budget": u.budget, "sensors": u.sensors} for u in scenario.uavs],
        "eta": scenario.eta,
    }
    if ground_truth is not None:
        doc["ground_truth"] = [{"center": list(c.center), "amplitude": c.amplitude, "width": c.width}
                               for c in ground_truth.components]
        if ground_truth.scale != 1.0:
            doc["ground_truth_scale"] = ground_truth.scale
    if eval_config:
        doc["eval"] = dict(eval_config)
    return doc


def dump_json(obj, path):
    # json emits floats with repr(), which round-trips exactly
    Path(path).write_text(json.dumps(obj, indent=1, allow_nan=False) + "\n")
